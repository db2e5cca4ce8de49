#include <cmath>

#include "doctest.h"
#include "scqp/dual.hpp"
#include "scqp/physics1d.hpp"
#include "scqp/problems.hpp"

using namespace scqp;

TEST_SUITE("physics1d") {
  TEST_CASE("green_1d matches the outgoing-wave kernel") {
    Grid1D g;
    g.n = 4;
    const CMat G = green_1d(g);
    REQUIRE(G.rows() == 4);
    const cxd pref = cxd(0.0, 1.0) * g.k * g.dx / 2.0;
    for (Eigen::Index l = 0; l < 4; ++l) {
      for (Eigen::Index m = 0; m < 4; ++m) {
        const double phase = g.k * g.dx * std::abs(double(l - m));
        const cxd expect = pref * std::exp(cxd(0.0, phase));
        CHECK(std::abs(G(l, m) - expect) < 1e-14);
      }
    }
    // Symmetric (not Hermitian): G^T = G.
    CHECK((G - G.transpose()).norm() < 1e-14);
  }

  TEST_CASE("dipole_source carries the right phase and amplitude") {
    Grid1D g;
    g.n = 3;
    const double pos = -0.5;
    const cxd amp(2.0, -1.0);
    const CVec e = dipole_source(g, pos, amp);
    REQUIRE(e.size() == 3);
    for (Eigen::Index l = 0; l < 3; ++l) {
      const double xl = (double(l) + 0.5) * g.dx;
      const cxd expect = amp * cxd(0.0, 1.0) * (g.k / 2.0) *
                         std::exp(cxd(0.0, g.k * std::abs(xl - pos)));
      CHECK(std::abs(e(l) - expect) < 1e-13);
    }
  }

  TEST_CASE("build_design_scqp wires the model into constraint rows") {
    Grid1D g;
    g.n = 8;
    g.design_span = {0, 8};
    MaterialSet mat;
    Dipole src;
    const DesignProgram dp = build_design_scqp(g, mat, src, WitnessSet::GlobalPlusLocal);
    const SCQP& p = dp.program;
    validate(p);

    // One global resistive row plus one local row per cell.
    REQUIRE(p.constraints.size() == 1 + 8);
    CHECK(p.scattering.has_value());
    CHECK(p.scattering->n == 8);
    // The model potential bound is diagonal 1/chi_max.
    const CMat expectXinv = CMat::Identity(8, 8) * (cxd(1.0, 0.0) / mat.chi_max);
    CHECK((p.scattering->Xbul_inv - expectXinv).norm() < 1e-14);
    // All rows are GE and the compactness mass sits on the resistive row.
    for (const auto& row : p.constraints) CHECK(row.sense == Sense::GE);
    CHECK(p.kappa(0) > 0.0);

    // Objective is (1/2) Im[e_i^dag x]: s_o = i e_i / 4, no quadratic part.
    CHECK(p.objective.A.norm() == doctest::Approx(0.0));
    const CVec ei = dipole_source(g, src.pos, src.amplitude);
    const CVec s_expect = cxd(0.0, 0.25) * ei;
    CHECK((p.objective.s - s_expect).norm() < 1e-13);
  }

  TEST_CASE("a uniform slab field satisfies every witness row") {
    // Fields generated by an actual scattering solve with admissible chi are
    // primal-feasible: every witness row vanishes there.
    Grid1D g;
    g.n = 8;
    g.design_span = {0, 8};
    MaterialSet mat;
    Dipole src;
    const DesignProgram dp = build_design_scqp(g, mat, src);
    const CVec chi = CVec::Constant(8, 0.6 * mat.chi_max);
    const Resimulated rs = resimulate(chi, dp.model);
    const RVec r = residuals(dp.program, rs.x_phys);
    const double scale = rs.x_phys.squaredNorm();
    for (Eigen::Index j = 0; j < r.size(); ++j) CHECK(std::abs(r(j)) < 1e-6 * (1.0 + scale));
    CHECK(is_feasible(dp.program, rs.x_phys, 1e-6));
  }

  TEST_CASE("the 8-cell design dual bound matches its pinned value") {
    BuiltinRequest req;
    req.name = "helmholtz1d";
    req.cells = 8;
    const SCQP p = load_builtin(req);
    const DualResult dr = minimize_dual(p);
    CHECK(dr.converged);
    CHECK(dr.eval.value == doctest::Approx(57.559503).epsilon(1e-3));
  }
}
