#pragma once

#include <vector>

#include "scqp/problem.hpp"

namespace scqp {

enum class Admissible { GreyScale, Binary };

struct MaterialSet {
  cxd chi_max = cxd(4.0, 0.1);
  // Grey-scale: the segment {t chi_max : t in [0,1]}; binary: {0, chi_max}.
  Admissible admissible = Admissible::GreyScale;
};

struct InferredPotential {
  CVec chi_raw;
  // Cells where the denominator vanished under a non-negligible polarization;
  // their chi_raw is pinned to the material ceiling.
  std::vector<Eigen::Index> singular_cells;
};

struct InferredStructure {
  CVec chi_raw;
  CVec chi_proj;
  RVec residuals;  // per-witness potential-mismatch values at the given x
  double objective_resim = 0.0;
  std::vector<Eigen::Index> singular_cells;
};

struct Resimulated {
  CVec x_phys;
  double objective = 0.0;
  double rcond = 1.0;  // reciprocal condition estimate of (I - G X)
};

// Per-cell implied susceptibility chi_k = x_k / ((G x)_k + e_i_k); cells with
// tiny denominator AND tiny x are vacuum, tiny denominator with live x are
// flagged singular and pinned to chi_max.
InferredPotential infer_potential(const CVec& x, const ScatteringModel& model,
                                  cxd chi_max_for_singular);

// Elementwise nearest admissible point; binary ties resolve to vacuum.
CVec project_potential(const CVec& chi_raw, const MaterialSet& mat);

// Per-witness values of x^dag [Q_j (X_probe^-1 - X_x^-1)]^s x restricted to
// the support of x; zero iff the probe reproduces the implied potential there.
RVec delta_residuals(const CVec& x, const CVec& chi_probe, const ScatteringModel& model);

// Ground truth for a design: solve (I - G X) e_t = e_i, return x = X e_t and
// the extracted-power objective (1/2) Im[e_i^dag x].
Resimulated resimulate(const CVec& chi, const ScatteringModel& model);

// Full inference bundle at a field x: infer, project, diagnose, resimulate.
InferredStructure infer_structure(const CVec& x, const ScatteringModel& model,
                                  const MaterialSet& mat);

}  // namespace scqp
