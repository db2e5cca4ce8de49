#pragma once

#include <optional>
#include <vector>

#include "scqp/problem.hpp"

namespace scqp {

// Homogeneous block form: tr(H_j Y) recovers f_j(x) on rank-1 Y = xt xt^dag
// with xt = (x, 1); the corner normalization Y_{n+1,n+1} = 1 is carried as a
// separate linear equality.
struct HomogenizedProgram {
  Eigen::Index n_plus_1 = 0;
  CMat H_o;
  std::vector<CMat> H;
  std::vector<Sense> senses;
};

struct SdpSolution {
  double value = 0.0;
  CMat B;
  int rank_eps = 0;  // numerical rank at 1e-6 relative eigenvalue threshold
  std::optional<CVec> extracted_x;
  bool converged = true;
  double barrier_gap = 0.0;  // residual duality-gap estimate of the barrier
};

struct SchurReport {
  bool psd = false;
  bool used_fallback = false;   // both diagonal blocks singular
  double min_eig_complement = 0.0;
  double min_eig_direct = 0.0;
};

struct EquivalenceReport {
  double dual_value = 0.0;
  double sdp_value = 0.0;
  double schur_value = 0.0;
  double gap = 0.0;
  bool pass = false;
  int rank = 0;
  std::optional<CVec> extracted_x;
};

HomogenizedProgram homogenize(const SCQP& p);

// Block PSD test via the Schur complement (A > 0 and D - C A^-1 B >= 0, or the
// mirrored elimination), cross-validated against direct eigendecomposition.
SchurReport schur_psd_test(const CMat& A, const CMat& B, const CMat& C, const CMat& D,
                           double tol = 1e-10);

// Reference log-barrier interior-point solver for
//   max tr(H_o B)  s.t.  tr(H_j B) >= 0 (GE) / = 0 (EQ),  B_{n+1,n+1} = 1,
//   B PSD.  Dense, n <= 12; an oracle for cross-validation.
SdpSolution solve_sdp_relaxation_tiny(const SCQP& p);

// Dehomogenize the leading eigenvector when B is numerically rank-1 and its
// last entry is usable.
std::optional<CVec> extract_rank1(const CMat& B, double tol);

// |minimize_dual - SDP| <= tol (1 + |value|), and the Schur-form dual at the
// optimal multipliers matches both.
EquivalenceReport check_equivalence(const SCQP& p, double tol = 1e-5);

}  // namespace scqp
