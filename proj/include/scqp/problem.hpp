#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scqp/quadform.hpp"

namespace scqp {

enum class Sense { GE, EQ };

struct SensedConstraint {
  QuadraticForm form;
  Sense sense = Sense::GE;
};

struct ScatteringModel {
  Eigen::Index n = 0;
  CMat G0;        // free propagation operator
  CVec e_i;       // incident field
  CMat Xbul_inv;  // inverse bulk potential (diagonal for local media)
  std::vector<CMat> witnesses;
  std::vector<Sense> sense_rule;  // per witness
};

// Quadratic program over complex vectors: maximize objective subject to every
// constraint row holding (GE rows: f >= 0; EQ rows: f = 0), with a compactness
// certificate kappa whose constraint combination has positive-definite
// bilinear part.
struct SCQP {
  QuadraticForm objective;
  std::vector<SensedConstraint> constraints;
  RVec kappa;  // nonnegative weights over stored constraint rows
  std::string label;
  std::string notes;  // free-form header (sense resolution decisions etc.)
  std::vector<CVec> feasible_witnesses;  // optional known-feasible points
  // Present when the constraints came from a scattering model; programs with
  // this provenance support potential-contraction rebuilds.
  std::optional<ScatteringModel> scattering;
};

// EQ rows expanded to (f >= 0, -f >= 0) pairs; multiplier vectors for the
// dual and Sion machinery index these expanded rows.
struct ExpandedProgram {
  QuadraticForm objective;
  std::vector<QuadraticForm> rows;
  std::vector<int> source_row;  // stored-row index per expanded row
  std::vector<bool> negated;    // true on the negation half of an EQ pair
  RVec kappa;                   // kappa mass carried on the un-negated copies
};

ExpandedProgram expand(const SCQP& p);

// Per stored row: eval of the row's form at x (sense not applied).
RVec residuals(const SCQP& p, const CVec& x);

bool is_feasible(const SCQP& p, const CVec& x, double tol_scale = 1e-6);

// Combination f_kappa = composite(rows, kappa) as a form.
QuadraticForm kappa_form(const SCQP& p);

// Checks the candidate, then all-ones over GE rows, then single rows; the
// returned weights give a positive-definite combination.
RVec find_kappa(const std::vector<SensedConstraint>& constraints,
                const std::optional<RVec>& candidate = std::nullopt);

void validate(const SCQP& p);

// ---- scattering models -----------------------------------------------------

// One constraint per witness Q: f(x) = Re[x^dag Q e_i - x^dag Q U x] with
// U = Xbul_inv - G0, realized as s = Q e_i / 2, A = [Q U]^s / 2, c = 0.
std::vector<SensedConstraint> build_local_constraints(const ScatteringModel& model);

struct NonlocalDesign {
  std::vector<CMat> D;  // image-separable potential components
  CMat P;               // free weighting operator
  std::vector<CMat> Q;  // witnesses
  CMat G0;
  CVec j_i;  // incident current
};

// Numerical image-separability check: for each j some functional annihilates
// every other component but not D_j.
bool image_separable(const std::vector<CMat>& D, double tol = 1e-9);

std::vector<SensedConstraint> build_nonlocal_constraints(const NonlocalDesign& design,
                                                         const CMat& Xbul);

// ---- discrete encodings ----------------------------------------------------

SCQP encode_subset_sum(const std::vector<long>& S, long t);

// ---- brute-force oracles ---------------------------------------------------

struct GridSearch {
  int points_per_dim = 201;
  double residual_tol = 1e-6;
  int refine_rounds = 2;
};

struct PrimalResult {
  double value = 0.0;
  CVec argmax;
  bool found = false;
};

// Real-coordinate grid scan over the kappa-ellipsoid bounding box with local
// refinement; imaginary parts pinned to zero (n <= 3).
PrimalResult brute_force_primal_grid(const SCQP& p, const GridSearch& spec = {});

// 0/1 indicator enumeration (n <= 20).
PrimalResult brute_force_primal_binary(const SCQP& p);

}  // namespace scqp
