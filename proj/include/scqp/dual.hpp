#pragma once

#include <utility>
#include <vector>

#include "scqp/problem.hpp"

namespace scqp {

struct SolverOptions {
  double grad_tol = 1e-8;        // relative: stop when ||pg|| <= grad_tol * (1 + |D|)
  double psd_margin = 1e-10;     // relative floor on min_eig(A_psi)
  int max_iters = 10000;
  double step_init = 1.0;
  double backtrack_ratio = 0.5;
  // Interior-margin continuation: the solver keeps min_eig(A_psi) above
  // stage * ||A_kappa|| and tightens the floor stage by stage.
  std::vector<double> margin_stages{1e-2, 1e-4, 1e-6};
  // When A_psi at the optimum has a numerical kernel, pick the reported
  // maximizer by maximizing the bounded Sion function along the kernel.
  // The line searches price a multiplier LP per sample, so resolution is
  // restricted to small programs (dim <= resolve_nmax).
  bool resolve_kernel = true;
  double kernel_tol = 1e-6;
  int kernel_max_dim = 3;
  Eigen::Index resolve_nmax = 8;
};

struct DualEval {
  double value = 0.0;
  CVec x_star;
  RVec grad;  // per expanded row: f_j(x_star)
  double min_eig_Apsi = 0.0;
  bool in_range = true;  // false => value is the +infinity sentinel
};

struct DualResult {
  RVec phi_star;
  DualEval eval;
  int iterations = 0;
  bool converged = false;
  std::vector<std::pair<RVec, double>> history;  // accepted (phi, value) steps
};

// D(phi) = max_x L(phi, x) with the inner maximum in closed form through the
// pseudo-inverse of A_psi. Throws when A_psi is indefinite beyond the margin
// (multipliers outside the cone).
DualEval eval_dual(const ExpandedProgram& ep, const RVec& phi, double psd_margin = 1e-10);
DualEval eval_dual(const SCQP& p, const RVec& phi, double psd_margin = 1e-10);

// Projected-gradient descent over {phi >= 0 : A_psi PSD} with backtracking
// line search and closed-form restoration along the kappa direction.
DualResult minimize_dual(const ExpandedProgram& ep, const SolverOptions& opts = {},
                         const RVec* warm_start = nullptr);
DualResult minimize_dual(const SCQP& p, const SolverOptions& opts = {},
                         const RVec* warm_start = nullptr);

// min alpha with [[-A_psi, s_psi], [s_psi^dag, c_psi - alpha]] <= 0, found by
// bisection; equals eval_dual's value (returns +infinity when no finite alpha
// closes the block, i.e. s_psi leaves the range of A_psi).
double schur_dual_value(const ExpandedProgram& ep, const RVec& phi, double tol = 1e-10);
double schur_dual_value(const SCQP& p, const RVec& phi, double tol = 1e-10);

// rho = 1 - f_kappa(x)/f_kappa(x_c): 0 at the center x_c, 1 on the boundary,
// clamped to [0,1] inside; values > 1 are returned raw and flag x outside the
// compact set (optional out-parameter mirrors that flag).
double boundary_proximity(const SCQP& p, const CVec& x, bool* outside = nullptr);

// Per expanded row: epsilon_j = |min(0, lambda_min(A_j))| / lambda_min(A_kappa)
// * max(0, f_kappa(x)) — the guaranteed cap on constraint violation at a dual
// optimum as x approaches the boundary of the compact set.
RVec lemma_feasibility_bounds(const SCQP& p, const CVec& x);

// Orthonormal columns spanning the numerical kernel of A_psi(phi); eigenvalues
// below max(kernel_tol * max_eig, 2 * final margin floor) count as kernel.
CMat dual_kernel_basis(const ExpandedProgram& ep, const RVec& phi,
                       const SolverOptions& opts = {});

}  // namespace scqp
