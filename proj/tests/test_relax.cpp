#include <cmath>
#include <random>

#include "doctest.h"
#include "scqp/problems.hpp"
#include "scqp/relax.hpp"

using namespace scqp;

TEST_SUITE("relax") {
  TEST_CASE("homogenize reproduces every row on lifted vectors") {
    const SCQP fig = load_builtin("fig2a");
    const HomogenizedProgram hp = homogenize(fig);
    REQUIRE(hp.n_plus_1 == 3);
    REQUIRE(hp.H.size() == fig.constraints.size());

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 5; ++t) {
      CVec x(2);
      x << cxd(u(rng), u(rng)), cxd(u(rng), u(rng));
      CVec xt(3);
      xt << x(0), x(1), cxd(1.0, 0.0);
      const cxd lifted_o = xt.adjoint() * (hp.H_o * xt);
      CHECK(lifted_o.real() == doctest::Approx(eval(fig.objective, x)).epsilon(1e-12));
      for (size_t j = 0; j < hp.H.size(); ++j) {
        const cxd lifted = xt.adjoint() * (hp.H[j] * xt);
        CHECK(lifted.real() ==
              doctest::Approx(eval(fig.constraints[j].form, x)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("schur_psd_test agrees with direct eigenvalues") {
    CMat A = CMat::Identity(2, 2) * 2.0;
    CMat B(2, 1);
    B << cxd(0.5, 0.1), cxd(-0.3, 0.0);
    CMat D = CMat::Identity(1, 1);
    const SchurReport ok = schur_psd_test(A, B, B.adjoint(), D);
    CHECK(ok.psd);
    CHECK(ok.min_eig_complement > 0.0);

    // Make the complement negative: D too small for the coupling.
    CMat Dbad = CMat::Identity(1, 1) * 0.05;
    const SchurReport bad = schur_psd_test(A, B, B.adjoint(), Dbad);
    CHECK_FALSE(bad.psd);

    // Both diagonal blocks singular forces the direct fallback.
    CMat Z = CMat::Zero(1, 1);
    const SchurReport fb = schur_psd_test(Z, Z, Z, Z);
    CHECK(fb.used_fallback);
    CHECK(fb.psd);

    // Off-diagonal blocks that are not adjoints of each other are rejected.
    CHECK_THROWS_AS(schur_psd_test(A, B, 2.0 * B.adjoint(), D), std::invalid_argument);
  }

  TEST_CASE("the SDP oracle solves the ball program with rank-1 recovery") {
    const SCQP ball = load_builtin("ball");
    const SdpSolution sol = solve_sdp_relaxation_tiny(ball);
    CHECK(sol.converged);
    CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(sol.rank_eps == 1);
    REQUIRE(sol.extracted_x.has_value());
    CHECK(std::abs((*sol.extracted_x)(0) - cxd(1.0, 0.0)) < 1e-4);
    CHECK(std::abs((*sol.extracted_x)(1)) < 1e-4);
  }

  TEST_CASE("the benchmark SDP closes the nonconvex gap without rank-1") {
    // Primal optimum is 0 but the relaxation (= dual) reaches 1/3; the
    // optimal moment matrix is genuinely rank-2, so no point is extracted.
    const SCQP fig = load_builtin("fig2a");
    const SdpSolution sol = solve_sdp_relaxation_tiny(fig);
    CHECK(sol.converged);
    CHECK(sol.value == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
    CHECK(sol.rank_eps == 2);
    CHECK_FALSE(sol.extracted_x.has_value());
  }

  TEST_CASE("extract_rank1 dehomogenizes clean rank-1 moments") {
    CVec xt(3);
    xt << cxd(0.4, -0.2), cxd(1.0, 0.3), cxd(2.0, 0.0);
    const CMat B = xt * xt.adjoint();
    const auto x = extract_rank1(B, 1e-6);
    REQUIRE(x.has_value());
    REQUIRE(x->size() == 2);
    CHECK(std::abs((*x)(0) - xt(0) / xt(2)) < 1e-9);
    CHECK(std::abs((*x)(1) - xt(1) / xt(2)) < 1e-9);

    // Rank-2 input is rejected.
    CMat B2 = B;
    B2(0, 0) += cxd(1.0, 0.0);
    CHECK_FALSE(extract_rank1(B2, 1e-6).has_value());
  }

  TEST_CASE("check_equivalence certifies dual = SDP = Schur form") {
    const SCQP ball = load_builtin("ball");
    const EquivalenceReport rb = check_equivalence(ball);
    CHECK(rb.pass);
    CHECK(rb.gap < 1e-5 * (1.0 + std::abs(rb.dual_value)));
    CHECK(rb.dual_value == doctest::Approx(2.0).epsilon(1e-6));

    const SCQP fig = load_builtin("fig2a");
    const EquivalenceReport rf = check_equivalence(fig);
    CHECK(rf.pass);
    CHECK(rf.dual_value == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(rf.schur_value == doctest::Approx(rf.dual_value).epsilon(1e-5));
  }

  TEST_CASE("the SDP oracle refuses large programs") {
    SCQP big;
    const Eigen::Index n = 16;
    big.objective = make_form(CMat::Zero(n, n), CVec::Ones(n), 0.0);
    big.constraints.push_back({make_form(CMat::Identity(n, n), CVec::Zero(n), 1.0), Sense::GE});
    big.kappa = RVec::Ones(1);
    CHECK_THROWS_AS(solve_sdp_relaxation_tiny(big), std::invalid_argument);
  }
}
