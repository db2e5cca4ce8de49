#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "scqp/problems.hpp"
#include "scqp/verlan.hpp"

using namespace scqp;

TEST_SUITE("verlan") {
  TEST_CASE("geometric_schedule halves down from the ceiling and closes at 0") {
    const std::vector<double> sched = geometric_schedule(8.0);
    REQUIRE(sched.size() == 8);
    CHECK(sched.front() == doctest::Approx(8.0));
    for (int j = 0; j < 7; ++j) CHECK(sched[size_t(j)] == doctest::Approx(8.0 * std::pow(2.0, -j)));
    CHECK(sched.back() == 0.0);
    CHECK_THROWS_AS(geometric_schedule(0.0), std::invalid_argument);
  }

  TEST_CASE("make_program swaps the objective drift vector") {
    const SCQP ball = load_builtin("ball");
    CVec r(2);
    r << cxd(0.0, 1.0), cxd(2.0, 0.0);
    const SCQP moved = make_program(ball, r, 0.0);
    CHECK((moved.objective.s - r).norm() == 0.0);
    // Constraints are untouched at alpha = 0.
    REQUIRE(moved.constraints.size() == ball.constraints.size());
    CHECK((moved.constraints[0].form.A - ball.constraints[0].form.A).norm() == 0.0);
    CHECK(moved.constraints[0].form.c == ball.constraints[0].form.c);

    // A base without scattering provenance cannot contract the potential.
    CHECK_THROWS_AS(make_program(ball, r, 0.5), std::invalid_argument);
  }

  TEST_CASE("make_program contracts the scattering potential at alpha > 0") {
    BuiltinRequest req;
    req.name = "helmholtz1d";
    req.cells = 8;
    const SCQP base = load_builtin(req);
    REQUIRE(base.scattering.has_value());
    const double alpha = 0.7;
    const SCQP tight = make_program(base, base.objective.s, alpha);
    REQUIRE(tight.scattering.has_value());
    const CMat shift =
        tight.scattering->Xbul_inv - base.scattering->Xbul_inv;
    CHECK((shift - alpha * CMat::Identity(8, 8)).norm() < 1e-12);
    // Rows are rebuilt from the shifted potential, so the bilinear parts of
    // the resistive row differ from the base program's.
    CHECK((tight.constraints[0].form.A - base.constraints[0].form.A).norm() > 1e-12);
  }

  TEST_CASE("resolve_params fills defaults and rejects bad rates") {
    const SCQP ball = load_builtin("ball");
    VerlanParams vp;
    const VerlanParams rp = resolve_params(ball, vp);
    // No provenance: the only admissible level is 0 and epsilon turns finite.
    REQUIRE(rp.alpha_schedule.size() == 1);
    CHECK(rp.alpha_schedule[0] == 0.0);
    CHECK(rp.epsilon > 0.0);
    // Kernel resolution is forced off for the drifting solves.
    CHECK_FALSE(rp.solver.resolve_kernel);

    VerlanParams bad;
    bad.sigma = 1.5;
    CHECK_THROWS_AS(resolve_params(ball, bad), std::invalid_argument);
    VerlanParams badg;
    badg.gamma = -0.1;
    CHECK_THROWS_AS(resolve_params(ball, badg), std::invalid_argument);
    VerlanParams bade;
    bade.epsilon = -1.0;
    CHECK_THROWS_AS(resolve_params(ball, bade), std::invalid_argument);
  }

  TEST_CASE("the ball run terminates immediately at strong duality") {
    const SCQP ball = load_builtin("ball");
    const VerlanResult res = run_verlan(ball);
    CHECK(res.terminal);
    CHECK(res.solves_used == 1);
    CHECK(res.r_drift == doctest::Approx(0.0));
    CHECK(res.state.rho_cur == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.state.x_cur.norm() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(res.lemma_ok);
    CHECK_FALSE(res.inferred.has_value());
  }

  TEST_CASE("the benchmark run matches its golden trajectory") {
    const SCQP fig = load_builtin("fig2a");
    const VerlanResult res = run_verlan(fig);
    CHECK(res.terminal);
    CHECK(res.solves_used == 2);
    REQUIRE(res.state.history.size() == 2);
    CHECK(res.state.history[0].step_kind == StepKind::CONTRACT);
    CHECK(res.state.history[1].step_kind == StepKind::SCRAPE);
    CHECK(res.state.rho_cur == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.r_drift == doctest::Approx(0.51828485).epsilon(1e-4));
    CHECK(res.lemma_ok);
  }

  TEST_CASE("a sigma scrape at the boundary is mix-only and keeps contact") {
    // On the ball the maximizer sits on the shell, so contract returns after
    // its entry solve; the sigma branch then drifts r without a new solve and
    // the re-solved maximizer stays on the shell.
    const SCQP ball = load_builtin("ball");
    const VerlanParams rp = resolve_params(ball, VerlanParams{});
    VerlanState st;
    contract(st, ball, rp);
    REQUIRE(st.rho_cur > 1.0 - rp.boundary_tol);
    CHECK(st.solves_used == 1);
    REQUIRE(st.history.size() == 1);

    const ScrapeOutcome out = scrape(st, ball, rp);
    CHECK(out == ScrapeOutcome::AtBoundary);
    CHECK(st.solves_used == 1);  // no dual solve on the sigma branch
    REQUIRE(st.history.size() == 2);
    CHECK(st.history[1].step_kind == StepKind::SCRAPE);

    expand(st, ball, rp);
    CHECK(st.terminal);
    CHECK(st.rho_cur == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("gamma = 0 leaves r fixed and the protocol cannot progress") {
    // With gamma = 0 the off-boundary mix is the identity: every scrape
    // re-solves the same program, the loop exhausts scrape_limit, and the
    // contraction schedule (a single level for bases without provenance)
    // runs out.
    const SCQP fig = load_builtin("fig2a");
    VerlanParams vp;
    vp.gamma = 0.0;
    vp.scrape_limit = 4;
    const VerlanResult res = run_verlan(fig, vp);
    CHECK_FALSE(res.terminal);
    CHECK((res.state.r - fig.objective.s).norm() == 0.0);
    CHECK(res.diagnostics.find("exhausted") != std::string::npos);
    // Entry solve plus one stalled gamma loop.
    CHECK(res.solves_used == 1 + 4);
  }

  TEST_CASE("the budget guard rejects runs that need more solves") {
    const SCQP fig = load_builtin("fig2a");
    VerlanParams vp;
    vp.max_solves = 1;  // the benchmark needs 2
    const VerlanResult res = run_verlan(fig, vp);
    CHECK_FALSE(res.terminal);
    CHECK(res.solves_used == 1);
    CHECK(!res.diagnostics.empty());
  }

  TEST_CASE("the 8-cell design run terminates with an inferred structure") {
    BuiltinRequest req;
    req.name = "helmholtz1d";
    req.cells = 8;
    const SCQP base = load_builtin(req);
    const VerlanResult res = run_verlan(base);
    CHECK(res.terminal);
    CHECK(res.state.rho_cur == doctest::Approx(1.0).epsilon(1e-6));
    REQUIRE(res.inferred.has_value());
    CHECK(res.inferred->chi_proj.size() == 8);
    CHECK(res.r_drift == doctest::Approx(10.9525539).epsilon(1e-3));
    CHECK(res.lemma_ok);
  }
}
