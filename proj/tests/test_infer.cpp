#include <cmath>
#include <random>

#include "doctest.h"
#include "scqp/infer.hpp"
#include "scqp/physics1d.hpp"

using namespace scqp;

namespace {

DesignProgram make_design(Eigen::Index n) {
  Grid1D g;
  g.n = n;
  g.design_span = {0, n};
  return build_design_scqp(g, MaterialSet{}, Dipole{});
}

}  // namespace

TEST_SUITE("infer") {
  TEST_CASE("infer_potential recovers the susceptibility behind a physical field") {
    const DesignProgram dp = make_design(8);
    MaterialSet mat;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    CVec chi(8);
    for (Eigen::Index k = 0; k < 8; ++k) chi(k) = u(rng) * mat.chi_max;

    const Resimulated rs = resimulate(chi, dp.model);
    const InferredPotential ip = infer_potential(rs.x_phys, dp.model, mat.chi_max);
    CHECK(ip.singular_cells.empty());
    CHECK((ip.chi_raw - chi).norm() < 1e-10 * chi.norm());
  }

  TEST_CASE("vacuum cells infer to zero, not to the ceiling") {
    const DesignProgram dp = make_design(8);
    MaterialSet mat;
    CVec chi = CVec::Zero(8);
    chi(2) = 0.8 * mat.chi_max;
    chi(5) = 0.3 * mat.chi_max;
    const Resimulated rs = resimulate(chi, dp.model);
    const InferredPotential ip = infer_potential(rs.x_phys, dp.model, mat.chi_max);
    CHECK(std::abs(ip.chi_raw(0)) < 1e-8);
    CHECK(std::abs(ip.chi_raw(2) - chi(2)) < 1e-8);
    CHECK(std::abs(ip.chi_raw(5) - chi(5)) < 1e-8);
  }

  TEST_CASE("project_potential clamps to the admissible set") {
    MaterialSet grey;
    CVec raw(3);
    raw << 0.5 * grey.chi_max, 1.4 * grey.chi_max, -0.2 * grey.chi_max;
    const CVec pg = project_potential(raw, grey);
    CHECK(std::abs(pg(0) - 0.5 * grey.chi_max) < 1e-12);
    CHECK(std::abs(pg(1) - grey.chi_max) < 1e-12);
    CHECK(std::abs(pg(2)) < 1e-12);

    MaterialSet binary;
    binary.admissible = Admissible::Binary;
    CVec rb(3);
    rb << 0.9 * binary.chi_max, 0.1 * binary.chi_max, 0.5 * binary.chi_max;
    const CVec pb = project_potential(rb, binary);
    CHECK(std::abs(pb(0) - binary.chi_max) < 1e-12);
    CHECK(std::abs(pb(1)) < 1e-12);
    // Exact midpoint ties resolve to vacuum.
    CHECK(std::abs(pb(2)) < 1e-12);
  }

  TEST_CASE("delta_residuals vanish exactly at the implied potential") {
    const DesignProgram dp = make_design(8);
    MaterialSet mat;
    CVec chi = CVec::Constant(8, 0.7 * mat.chi_max);
    const Resimulated rs = resimulate(chi, dp.model);
    const RVec dr = delta_residuals(rs.x_phys, chi, dp.model);
    const double scale = 1.0 + rs.x_phys.squaredNorm();
    for (Eigen::Index j = 0; j < dr.size(); ++j) CHECK(std::abs(dr(j)) < 1e-9 * scale);

    // Probing with a different potential leaves a visible mismatch.
    CVec wrong = CVec::Constant(8, 0.2 * mat.chi_max);
    const RVec dw = delta_residuals(rs.x_phys, wrong, dp.model);
    CHECK(dw.cwiseAbs().maxCoeff() > 1e-4);
  }

  TEST_CASE("resimulate reports the extracted-power objective") {
    const DesignProgram dp = make_design(8);
    MaterialSet mat;
    CVec chi = CVec::Constant(8, 0.5 * mat.chi_max);
    const Resimulated rs = resimulate(chi, dp.model);
    const cxd ip = dp.model.e_i.adjoint() * rs.x_phys;
    CHECK(rs.objective == doctest::Approx(0.5 * ip.imag()).epsilon(1e-12));
    CHECK(rs.rcond > 1e-6);
    // The physical field also scores the same value under the program
    // objective, tying the design task to the scattering model.
    CHECK(eval(dp.program.objective, rs.x_phys) == doctest::Approx(rs.objective).epsilon(1e-9));
  }

  TEST_CASE("infer_structure bundles inference, projection, and resimulation") {
    const DesignProgram dp = make_design(8);
    MaterialSet mat;
    CVec chi(8);
    for (Eigen::Index k = 0; k < 8; ++k)
      chi(k) = ((k % 2) ? 0.9 : 0.4) * mat.chi_max;
    const Resimulated rs = resimulate(chi, dp.model);
    const InferredStructure st = infer_structure(rs.x_phys, dp.model, mat);
    CHECK((st.chi_raw - chi).norm() < 1e-8 * chi.norm());
    // All implied values are admissible grey points already, so the
    // projection is a no-op and resimulation reproduces the objective.
    CHECK((st.chi_proj - chi).norm() < 1e-8 * chi.norm());
    CHECK(st.objective_resim == doctest::Approx(rs.objective).epsilon(1e-6));
    CHECK(st.residuals.cwiseAbs().maxCoeff() < 1e-8 * (1.0 + rs.x_phys.squaredNorm()));
    CHECK(st.singular_cells.empty());
  }
}
