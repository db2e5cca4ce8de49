#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "scqp/problem.hpp"
#include "scqp/problems.hpp"

using namespace scqp;

namespace {

SCQP two_row_program() {
  SCQP p;
  p.objective = make_form(CMat::Zero(2, 2), CVec::Ones(2), 0.0);
  CMat A1 = CMat::Identity(2, 2);
  CVec s1 = CVec::Zero(2);
  p.constraints.push_back({make_form(A1, s1, 1.0), Sense::GE});
  CMat A2 = CMat::Zero(2, 2);
  A2(0, 0) = cxd(2.0, 0.0);
  CVec s2(2);
  s2 << cxd(0.5, 0.0), cxd(0.0, -1.0);
  p.constraints.push_back({make_form(A2, s2, -0.125), Sense::EQ});
  RVec kappa(2);
  kappa << 1.0, 0.0;
  p.kappa = kappa;
  p.label = "two-row";
  return p;
}

}  // namespace

TEST_SUITE("problem") {
  TEST_CASE("expand doubles EQ rows into negated pairs") {
    const SCQP p = two_row_program();
    const ExpandedProgram ep = expand(p);
    REQUIRE(ep.rows.size() == 3);
    CHECK(ep.source_row == std::vector<int>({0, 1, 1}));
    CHECK(ep.negated == std::vector<bool>({false, false, true}));

    CVec x(2);
    x << cxd(0.3, -0.2), cxd(0.1, 0.4);
    CHECK(eval(ep.rows[1], x) == doctest::Approx(eval(p.constraints[1].form, x)));
    CHECK(eval(ep.rows[2], x) == doctest::Approx(-eval(p.constraints[1].form, x)));

    // kappa mass sits on the un-negated copies only.
    REQUIRE(ep.kappa.size() == 3);
    CHECK(ep.kappa(0) == doctest::Approx(1.0));
    CHECK(ep.kappa(1) == doctest::Approx(0.0));
    CHECK(ep.kappa(2) == doctest::Approx(0.0));
  }

  TEST_CASE("residuals and feasibility respect senses") {
    const SCQP p = two_row_program();
    CVec x = CVec::Zero(2);
    const RVec r = residuals(p, x);
    REQUIRE(r.size() == 2);
    CHECK(r(0) == doctest::Approx(1.0));
    CHECK(r(1) == doctest::Approx(-0.125));
    // Row 2 is EQ and nonzero at the origin, so the origin is infeasible.
    CHECK_FALSE(is_feasible(p, x));

    // A point on the EQ set inside the disk: the real root of
    // f2(x0, 0) = x0 - 2 x0^2 - 1/8 = 0 is x0 = 1/4 (double root).
    CVec y = CVec::Zero(2);
    y(0) = cxd(0.25, 0.0);
    const RVec ry = residuals(p, y);
    CHECK(std::abs(ry(1)) < 1e-12);
    CHECK(is_feasible(p, y));
  }

  TEST_CASE("kappa_form combines rows with the stored weights") {
    SCQP p = two_row_program();
    p.kappa << 2.0, 0.5;
    const QuadraticForm fk = kappa_form(p);
    CVec x(2);
    x << cxd(0.2, 0.0), cxd(-0.1, 0.3);
    const double direct =
        2.0 * eval(p.constraints[0].form, x) + 0.5 * eval(p.constraints[1].form, x);
    CHECK(eval(fk, x) == doctest::Approx(direct).epsilon(1e-13));
  }

  TEST_CASE("find_kappa prefers the candidate, then falls back") {
    const SCQP p = two_row_program();
    RVec cand(2);
    cand << 3.0, 0.0;
    const RVec kept = find_kappa(p.constraints, cand);
    CHECK((kept - cand).norm() == 0.0);

    // Without a candidate it still finds a PD combination.
    const RVec found = find_kappa(p.constraints);
    const QuadraticForm fk = composite({p.constraints[0].form, p.constraints[1].form}, found);
    CHECK(psd_check(fk.A, 1e-12).min_eig > 0.0);

    // No PD combination exists when every row has zero bilinear part.
    std::vector<SensedConstraint> flat;
    flat.push_back({make_form(CMat::Zero(2, 2), CVec::Ones(2), 0.0), Sense::GE});
    CHECK_THROWS_AS(find_kappa(flat), std::runtime_error);
  }

  TEST_CASE("validate rejects malformed programs") {
    SCQP p = two_row_program();
    validate(p);  // baseline passes

    SCQP bad_kappa = p;
    bad_kappa.kappa(0) = -1.0;
    CHECK_THROWS_AS(validate(bad_kappa), std::invalid_argument);

    SCQP wrong_len = p;
    wrong_len.kappa = RVec::Ones(3);
    CHECK_THROWS_AS(validate(wrong_len), std::invalid_argument);

    SCQP mismatched = p;
    mismatched.constraints[0].form = make_form(CMat::Identity(3, 3), CVec::Zero(3), 1.0);
    CHECK_THROWS_AS(validate(mismatched), std::invalid_argument);

    SCQP not_pd = p;
    not_pd.kappa << 0.0, 1.0;  // row 2 alone is only semidefinite
    CHECK_THROWS_AS(validate(not_pd), std::invalid_argument);
  }

  TEST_CASE("build_local_constraints realizes the witness rows") {
    ScatteringModel m;
    m.n = 2;
    m.G0 = CMat::Zero(2, 2);
    m.G0(0, 1) = cxd(0.0, 0.3);
    m.G0(1, 0) = cxd(0.0, 0.3);
    m.e_i = CVec::Ones(2);
    m.Xbul_inv = CMat::Identity(2, 2) * cxd(0.5, -0.1);
    m.witnesses = {CMat::Identity(2, 2)};
    m.sense_rule = {Sense::GE};
    const auto rows = build_local_constraints(m);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].sense == Sense::GE);
    CHECK(rows[0].form.c == 0.0);

    // f(x) = Re[x^dag Q e_i - x^dag Q U x] with U = Xbul_inv - G0.
    const CMat U = m.Xbul_inv - m.G0;
    CVec x(2);
    x << cxd(0.4, 0.2), cxd(-0.3, 0.6);
    const cxd lin = x.adjoint() * (m.witnesses[0] * m.e_i);
    const cxd quad = x.adjoint() * (m.witnesses[0] * (U * x));
    CHECK(eval(rows[0].form, x) == doctest::Approx((lin - quad).real()).epsilon(1e-12));
  }

  TEST_CASE("image_separable distinguishes overlapping components") {
    CMat D1 = CMat::Zero(3, 3);
    D1(0, 0) = 1.0;
    CMat D2 = CMat::Zero(3, 3);
    D2(1, 1) = 1.0;
    CHECK(image_separable({D1, D2}));
    // Identical images are inseparable.
    CHECK_FALSE(image_separable({D1, D1}));
  }

  TEST_CASE("encode_subset_sum builds a solvable indicator program") {
    const SCQP p = encode_subset_sum({1, 2}, 3);
    validate(p);
    const PrimalResult pr = brute_force_primal_binary(p);
    REQUIRE(pr.found);
    // Only {1,2} sums to 3, so the best indicator is all ones.
    CHECK(std::abs(pr.argmax(0) - cxd(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(pr.argmax(1) - cxd(1.0, 0.0)) < 1e-12);
    CHECK(is_feasible(p, pr.argmax));

    // An unsatisfiable target admits no feasible indicator.
    const SCQP bad = encode_subset_sum({2, 4}, 3);
    CHECK_THROWS_AS(brute_force_primal_binary(bad), std::runtime_error);
  }

  TEST_CASE("brute_force_primal_grid solves the ball program") {
    const SCQP ball = load_builtin("ball");
    GridSearch gs;
    gs.points_per_dim = 101;
    const PrimalResult pr = brute_force_primal_grid(ball, gs);
    REQUIRE(pr.found);
    // max 2 Re[x0] on ||x|| <= 1 is 2 at (1, 0).
    CHECK(pr.value == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(pr.argmax(0) - cxd(1.0, 0.0)) < 1e-4);
    CHECK(std::abs(pr.argmax(1)) < 1e-4);
  }

  TEST_CASE("random_scqp emits validated programs") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10; ++i) {
      const SCQP p = random_scqp(rng);
      validate(p);
      CHECK(p.objective.dim() <= 4);
      CHECK(p.constraints.size() <= 6);
    }
  }
}
