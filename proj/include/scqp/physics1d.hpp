#pragma once

#include <utility>

#include "scqp/infer.hpp"
#include "scqp/problem.hpp"

namespace scqp {

// 1-D design region discretized into n cells of size dx (units of the
// wavelength); cell centers sit at (l + 1/2) dx.
struct Grid1D {
  Eigen::Index n = 32;
  double dx = 1.0 / 40.0;
  double k = 2.0 * M_PI;
  std::pair<Eigen::Index, Eigen::Index> design_span{0, 32};
};

struct Dipole {
  double pos = -0.5;  // half a wavelength left of the design region
  cxd amplitude = cxd(1.0, 0.0);
};

enum class WitnessSet { Global, GlobalPlusLocal };

// Outgoing-wave kernel G_{lm} = (i k dx / 2) exp(i k dx |l - m|); the
// scattering solve in this convention reads (I - G X) e_t = e_i.
CMat green_1d(const Grid1D& grid);

// Point-source field e_i(l) = amplitude (i k / 2) exp(i k |x_l - pos|).
CVec dipole_source(const Grid1D& grid, double pos, cxd amplitude);

struct DesignProgram {
  SCQP program;
  ScatteringModel model;
};

// Extracted-power design task: objective (1/2) Im[e_i^dag x] with constraints
// from the witness set over U = (1/chi_max) I - G; the resistive global row
// (witness iI) is the compactness certificate.
DesignProgram build_design_scqp(const Grid1D& grid, const MaterialSet& mat,
                                const Dipole& source,
                                WitnessSet witnesses = WitnessSet::GlobalPlusLocal);

}  // namespace scqp
