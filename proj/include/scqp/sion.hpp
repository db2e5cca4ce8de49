#pragma once

#include <vector>

#include "scqp/dual.hpp"
#include "scqp/problem.hpp"

namespace scqp {

struct SionOptions {
  double lp_tol = 1e-9;     // spectrahedral cut tolerance (relative)
  int cut_limit = 500;      // maximum eigenvector cuts per evaluation
  // Membership: a schedule step is flat when |dS_b/db| <= plateau_tol *
  // (1 + max_j |f_j(x)|); rates under that floor are indistinguishable from
  // finite-precision ray costs.
  double plateau_tol = 1e-6;
};

struct SionEval {
  double value = 0.0;
  RVec phi_min;
  double bound_b = 0.0;
  // Slope of value versus b when the bound is active (<= 0); 0 on a plateau.
  double divergence_rate = 0.0;
};

struct SionSetReport {
  bool member = false;
  std::vector<double> b_schedule;
  std::vector<double> values;
  // First schedule point where successive values agree to plateau_tol; the
  // value there is the converged S(x) for members. Large b amplifies solver
  // noise linearly (the box lets the LP ride tolerance-level negative ray
  // costs), so the tail of `values` is not the place to read S(x).
  int plateau_index = -1;
  double plateau_value = 0.0;
  double divergence_rate = 0.0;
};

// S_b(x) = f_o(x) + min { sum_j phi_j f_j(x) : 0 <= phi <= b, A_psi(phi) PSD },
// the bounded Sion function. The PSD constraint is enforced by eigenvector
// cutting planes over a deterministic LP.
SionEval eval_sion_bounded(const ExpandedProgram& ep, const CVec& x, double b,
                           const SionOptions& opts = {});
SionEval eval_sion_bounded(const SCQP& p, const CVec& x, double b,
                           const SionOptions& opts = {});

// Membership in the Sion set: evaluate S_b along an increasing b schedule and
// test for a plateau; divergence shows up as a persistent negative slope.
SionSetReport sion_membership(const SCQP& p, const CVec& x,
                              const std::vector<double>& b_schedule,
                              const SionOptions& opts = {});

struct BScheduleReport {
  std::vector<double> b;
  double scale = 1.0;
  // Sufficient condition for a finite adequate bound: every boundary
  // multiplier direction carries a nonzero offset or linear part.
  bool remark_ok = true;
};

// Geometric schedule {1,2,...,1024} * scale with scale estimated from the
// objective's range over the kappa ellipsoid and a sampled lower bound on
// max_x f_phi over unit multiplier directions.
BScheduleReport default_b_schedule(const SCQP& p);

struct SionProgramResult {
  CVec x_tilde;
  double value = 0.0;
  CMat kernel_basis;  // columns span the numerical kernel of A_psi at optimum
  DualResult dual;
};

// The Sion program max_x S(x) solved through the dual; the kernel basis
// reports the ambiguity class of maximizers when A_psi at the optimum is
// singular.
SionProgramResult solve_sion_program(const SCQP& p, const SolverOptions& opts = {});

}  // namespace scqp
