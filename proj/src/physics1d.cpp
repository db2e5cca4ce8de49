#include "scqp/physics1d.hpp"

#include <cmath>
#include <stdexcept>

namespace scqp {

CMat green_1d(const Grid1D& grid) {
  if (grid.n <= 0 || !(grid.dx > 0.0) || !(grid.k > 0.0)) {
    throw std::invalid_argument("green_1d: invalid grid");
  }
  if (grid.dx > 1.0 / 20.0 + 1e-15) {
    throw std::invalid_argument("green_1d: dx exceeds the resolution floor of 1/20 wavelength");
  }
  const cxd pref = cxd(0.0, 1.0) * grid.k * grid.dx / 2.0;
  CMat G(grid.n, grid.n);
  for (Eigen::Index l = 0; l < grid.n; ++l) {
    for (Eigen::Index m = 0; m < grid.n; ++m) {
      const double phase = grid.k * grid.dx * std::abs(static_cast<double>(l - m));
      G(l, m) = pref * std::exp(cxd(0.0, phase));
    }
  }
  return G;
}

CVec dipole_source(const Grid1D& grid, double pos, cxd amplitude) {
  CVec e(grid.n);
  const cxd pref = amplitude * cxd(0.0, 1.0) * grid.k / 2.0;
  for (Eigen::Index l = 0; l < grid.n; ++l) {
    const double xl = (static_cast<double>(l) + 0.5) * grid.dx;
    e(l) = pref * std::exp(cxd(0.0, grid.k * std::abs(xl - pos)));
  }
  return e;
}

DesignProgram build_design_scqp(const Grid1D& grid, const MaterialSet& mat,
                                const Dipole& source, WitnessSet witnesses) {
  if (mat.chi_max == cxd(0.0, 0.0)) {
    throw std::invalid_argument("build_design_scqp: chi_max must be nonzero");
  }
  DesignProgram out;
  ScatteringModel& model = out.model;
  model.n = grid.n;
  model.G0 = green_1d(grid);
  model.e_i = dipole_source(grid, source.pos, source.amplitude);
  model.Xbul_inv = (1.0 / mat.chi_max) * CMat::Identity(grid.n, grid.n);

  model.witnesses.push_back(CMat::Identity(grid.n, grid.n));
  model.witnesses.push_back(cxd(0.0, 1.0) * CMat::Identity(grid.n, grid.n));
  if (witnesses == WitnessSet::GlobalPlusLocal) {
    for (Eigen::Index c = 0; c < grid.n; ++c) {
      CMat E = CMat::Zero(grid.n, grid.n);
      E(c, c) = cxd(1.0, 0.0);
      model.witnesses.push_back(E);
      model.witnesses.push_back(cxd(0.0, 1.0) * E);
    }
  }
  model.sense_rule.assign(model.witnesses.size(), Sense::GE);

  SCQP& p = out.program;
  p.label = "helmholtz1d";
  // f_o = (1/2) Im[e_i^dag x] written as 2 Re[s_o^dag x] with s_o = (i/4) e_i.
  p.objective = make_form(CMat::Zero(grid.n, grid.n), (cxd(0.0, 0.25) * model.e_i).eval(), 0.0);
  p.constraints = build_local_constraints(model);
  p.kappa = RVec::Zero(static_cast<Eigen::Index>(p.constraints.size()));
  p.kappa(1) = 1.0;  // resistive global-power row (witness iI)

  Eigen::SelfAdjointEigenSolver<CMat> es(kappa_form(p).A);
  if (!(es.eigenvalues()(0) > 0.0)) {
    throw std::domain_error(
        "build_design_scqp: resistive witness row is not positive definite; "
        "choose a lossier material or a different witness set");
  }

  p.feasible_witnesses.push_back(CVec::Zero(grid.n));
  p.feasible_witnesses.push_back(resimulate(CVec::Constant(grid.n, mat.chi_max), model).x_phys);
  p.scattering = model;
  validate(p);
  return out;
}

}  // namespace scqp
