#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "scqp/quadform.hpp"

using namespace scqp;

TEST_SUITE("quadform") {
  TEST_CASE("symmetrize and hermitian_part") {
    CMat M(2, 2);
    M << cxd(1.0, 0.0), cxd(2.0, 1.0), cxd(0.0, 0.0), cxd(3.0, 0.0);
    const CMat S = symmetrize(M);
    CHECK(is_hermitian(S));
    CHECK(S(0, 0).real() == doctest::Approx(2.0));
    CHECK(S(0, 1) == cxd(2.0, 1.0));
    CHECK(S(1, 0) == cxd(2.0, -1.0));

    const CMat H = hermitian_part(M);
    CHECK(is_hermitian(H));
    CHECK(H(0, 1) == cxd(1.0, 0.5));
  }

  TEST_CASE("make_form rejects non-Hermitian A") {
    CMat A(2, 2);
    A << cxd(1.0, 0.0), cxd(2.0, 0.0), cxd(0.0, 0.0), cxd(1.0, 0.0);
    CVec s = CVec::Zero(2);
    CHECK_THROWS_AS(make_form(A, s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_form(CMat::Identity(2, 2), CVec::Zero(3), 0.0), std::invalid_argument);
  }

  TEST_CASE("eval matches the closed form") {
    // f(x) = 2 Re[s^dag x] - x^dag A x + c on a complex point.
    CMat A(2, 2);
    A << cxd(2.0, 0.0), cxd(0.0, 1.0), cxd(0.0, -1.0), cxd(1.0, 0.0);
    CVec s(2);
    s << cxd(1.0, -1.0), cxd(0.5, 0.0);
    const QuadraticForm q = make_form(A, s, 0.25);

    CVec x(2);
    x << cxd(0.3, 0.7), cxd(-1.0, 0.2);
    const cxd sx = s.adjoint() * x;
    const cxd xAx = x.adjoint() * (A * x);
    const double expect = 2.0 * sx.real() - xAx.real() + 0.25;
    CHECK(eval(q, x) == doctest::Approx(expect).epsilon(1e-14));
  }

  TEST_CASE("negate flips all three parts") {
    const QuadraticForm q = make_form(CMat::Identity(2, 2), CVec::Ones(2), 3.0);
    const QuadraticForm n = negate(q);
    CVec x(2);
    x << cxd(0.2, 0.1), cxd(-0.4, 0.0);
    CHECK(eval(n, x) == doctest::Approx(-eval(q, x)).epsilon(1e-14));
  }

  TEST_CASE("composite and lagrangian are linear in the weights") {
    std::vector<QuadraticForm> rows;
    rows.push_back(make_form(CMat::Identity(2, 2), CVec::Ones(2), 1.0));
    CMat A2(2, 2);
    A2 << cxd(0.0, 0.0), cxd(1.0, 0.0), cxd(1.0, 0.0), cxd(-1.0, 0.0);
    CVec s2(2);
    s2 << cxd(0.0, 1.0), cxd(2.0, 0.0);
    rows.push_back(make_form(A2, s2, -0.5));

    RVec phi(2);
    phi << 0.7, 1.3;
    const QuadraticForm comb = composite(rows, phi);
    CVec x(2);
    x << cxd(1.0, -0.5), cxd(0.0, 0.3);
    const double direct = phi(0) * eval(rows[0], x) + phi(1) * eval(rows[1], x);
    CHECK(eval(comb, x) == doctest::Approx(direct).epsilon(1e-13));

    const QuadraticForm obj = make_form(CMat::Zero(2, 2), s2, 2.0);
    const QuadraticForm lag = lagrangian(obj, rows, phi);
    CHECK(eval(lag, x) == doctest::Approx(eval(obj, x) + direct).epsilon(1e-13));
  }

  TEST_CASE("psd_check classifies definite and indefinite matrices") {
    const PsdReport ok = psd_check(CMat::Identity(3, 3), 1e-12);
    CHECK(ok.is_psd);
    CHECK(ok.min_eig == doctest::Approx(1.0));

    CMat D = CMat::Zero(2, 2);
    D(0, 0) = cxd(1.0, 0.0);
    D(1, 1) = cxd(-0.5, 0.0);
    const PsdReport bad = psd_check(D, 1e-12);
    CHECK_FALSE(bad.is_psd);
    CHECK(bad.min_eig == doctest::Approx(-0.5));
  }

  TEST_CASE("stationary_point maximizes a PD form") {
    // f(x) = 2 Re[s^dag x] - x^dag A x has maximizer A^{-1} s when A is PD.
    CMat A = CMat::Zero(2, 2);
    A(0, 0) = cxd(2.0, 0.0);
    A(1, 1) = cxd(4.0, 0.0);
    CVec s(2);
    s << cxd(1.0, 0.0), cxd(0.0, 2.0);
    const StationaryPoint sp = stationary_point(make_form(A, s, 0.0));
    CHECK(sp.in_range);
    CHECK(std::abs(sp.x(0) - cxd(0.5, 0.0)) < 1e-12);
    CHECK(std::abs(sp.x(1) - cxd(0.0, 0.5)) < 1e-12);
  }

  TEST_CASE("stationary_point flags a source with kernel component") {
    // A has kernel direction e2; s leans into it, so the form is unbounded.
    CMat A = CMat::Zero(2, 2);
    A(0, 0) = cxd(1.0, 0.0);
    CVec s(2);
    s << cxd(1.0, 0.0), cxd(0.5, 0.0);
    const StationaryPoint sp = stationary_point(make_form(A, s, 0.0));
    CHECK_FALSE(sp.in_range);

    // With s orthogonal to the kernel the pseudoinverse solve is in range.
    s(1) = cxd(0.0, 0.0);
    const StationaryPoint ok = stationary_point(make_form(A, s, 0.0));
    CHECK(ok.in_range);
    CHECK(std::abs(ok.x(0) - cxd(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(ok.x(1)) < 1e-12);
  }
}
