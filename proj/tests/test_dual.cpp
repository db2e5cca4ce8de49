#include <cmath>
#include <limits>

#include "doctest.h"
#include "scqp/dual.hpp"
#include "scqp/problems.hpp"

using namespace scqp;

TEST_SUITE("dual") {
  TEST_CASE("eval_dual on the ball program matches the closed form") {
    // max 2 Re[x0] over ||x||^2 <= 1: D(phi) = 1/phi + phi, minimized at phi=1.
    const SCQP ball = load_builtin("ball");
    RVec phi(1);
    phi << 1.0;
    const DualEval ev = eval_dual(ball, phi);
    CHECK(ev.in_range);
    CHECK(ev.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(ev.x_star(0) - cxd(1.0, 0.0)) < 1e-10);
    CHECK(std::abs(ev.x_star(1)) < 1e-10);
    // grad(0) = f_ball(x_star) = 1 - ||x*||^2 = 0 at the optimum.
    CHECK(std::abs(ev.grad(0)) < 1e-10);

    phi << 2.0;
    CHECK(eval_dual(ball, phi).value == doctest::Approx(2.5).epsilon(1e-12));
  }

  TEST_CASE("eval_dual signals out-of-range sources") {
    // With phi = 0 the composite A_psi vanishes while s_o != 0: unbounded.
    const SCQP ball = load_builtin("ball");
    RVec phi = RVec::Zero(1);
    const DualEval ev = eval_dual(ball, phi);
    CHECK_FALSE(ev.in_range);
    CHECK(ev.value == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("minimize_dual solves the ball program") {
    const SCQP ball = load_builtin("ball");
    const DualResult dr = minimize_dual(ball);
    CHECK(dr.converged);
    CHECK(dr.eval.value == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(dr.phi_star(0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(dr.eval.x_star(0) - cxd(1.0, 0.0)) < 1e-4);
  }

  TEST_CASE("accepted dual values never increase along the iteration history") {
    const SCQP fig = load_builtin("fig2a");
    const DualResult dr = minimize_dual(fig);
    REQUIRE(dr.history.size() >= 2);
    for (size_t i = 1; i < dr.history.size(); ++i)
      CHECK(dr.history[i].second <= dr.history[i - 1].second + 1e-12);
  }

  TEST_CASE("minimize_dual reproduces the two-constraint benchmark") {
    const SCQP fig = load_builtin("fig2a");
    const DualResult dr = minimize_dual(fig);
    CHECK(dr.converged);
    // Dual optimum 1/3 at multipliers (1/3, 4/3).
    CHECK(dr.eval.value == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(dr.phi_star(0) == doctest::Approx(1.0 / 3.0).epsilon(2e-2));
    CHECK(dr.phi_star(1) == doctest::Approx(4.0 / 3.0).epsilon(2e-2));
    // Kernel-resolved maximizer (-1/2, -1/3).
    CHECK(std::abs(dr.eval.x_star(0) - cxd(-0.5, 0.0)) < 2e-3);
    CHECK(std::abs(dr.eval.x_star(1) - cxd(-1.0 / 3.0, 0.0)) < 2e-3);
  }

  TEST_CASE("warm starts are honoured and converge faster on the ball") {
    const SCQP ball = load_builtin("ball");
    RVec warm(1);
    warm << 1.0 + 1e-6;
    const DualResult dr = minimize_dual(expand(ball), SolverOptions{}, &warm);
    CHECK(dr.converged);
    CHECK(dr.eval.value == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(dr.iterations <= 10);
  }

  TEST_CASE("schur_dual_value agrees with eval_dual") {
    const SCQP ball = load_builtin("ball");
    RVec phi(1);
    phi << 1.5;
    const double ref = eval_dual(ball, phi).value;
    CHECK(schur_dual_value(ball, phi) == doctest::Approx(ref).epsilon(1e-8));

    const SCQP fig = load_builtin("fig2a");
    RVec mu(2);
    mu << 1.0 / 3.0, 4.0 / 3.0;
    const double dv = schur_dual_value(fig, mu);
    CHECK(dv == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  }

  TEST_CASE("schur_dual_value returns infinity off the range") {
    const SCQP ball = load_builtin("ball");
    RVec phi = RVec::Zero(1);
    CHECK(schur_dual_value(ball, phi) == std::numeric_limits<double>::infinity());
  }

  TEST_CASE("boundary_proximity is 0 at the center, 1 on the shell") {
    const SCQP ball = load_builtin("ball");
    // kappa row: 1 - ||x||^2; center x_c = 0.
    CVec center = CVec::Zero(2);
    CHECK(boundary_proximity(ball, center) == doctest::Approx(0.0));

    CVec shell(2);
    shell << cxd(0.0, 1.0), cxd(0.0, 0.0);
    CHECK(boundary_proximity(ball, shell) == doctest::Approx(1.0));

    CVec mid(2);
    mid << cxd(0.5, 0.0), cxd(0.0, 0.0);
    CHECK(boundary_proximity(ball, mid) == doctest::Approx(0.25));

    bool outside = false;
    CVec far(2);
    far << cxd(2.0, 0.0), cxd(0.0, 0.0);
    const double rho = boundary_proximity(ball, far, &outside);
    CHECK(outside);
    CHECK(rho == doctest::Approx(4.0));
  }

  TEST_CASE("lemma_feasibility_bounds vanish on PD-row programs") {
    // Every row of the ball program has PSD bilinear part, so the per-row
    // violation caps are all zero regardless of x.
    const SCQP ball = load_builtin("ball");
    CVec x(2);
    x << cxd(0.3, 0.1), cxd(-0.2, 0.0);
    const RVec eps = lemma_feasibility_bounds(ball, x);
    CHECK(eps.maxCoeff() == doctest::Approx(0.0));

    // The benchmark's first row has an indefinite part, so its cap is active.
    const SCQP fig = load_builtin("fig2a");
    CVec y = CVec::Zero(2);
    const RVec eps2 = lemma_feasibility_bounds(fig, y);
    CHECK(eps2(0) > 0.0);
    CHECK(eps2(1) == doctest::Approx(0.0));
  }

  TEST_CASE("dual_kernel_basis detects the degenerate direction") {
    const SCQP fig = load_builtin("fig2a");
    RVec mu(2);
    mu << 1.0 / 3.0, 4.0 / 3.0;
    // Rows are diag(0,-4) and I, so A_psi = mu0*diag(0,-4) + mu1*I
    // = diag(4/3, 0): rank-1 with kernel direction e2.
    const CMat K = dual_kernel_basis(expand(fig), mu);
    REQUIRE(K.cols() == 1);
    CHECK(std::abs(K(0, 0)) < 1e-6);
    CHECK(std::abs(std::abs(K(1, 0)) - 1.0) < 1e-9);

    // Away from the optimum the composite is PD: empty kernel.
    RVec interior(2);
    interior << 0.1, 2.0;
    CHECK(dual_kernel_basis(expand(fig), interior).cols() == 0);
  }
}
