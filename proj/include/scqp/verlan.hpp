#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scqp/dual.hpp"
#include "scqp/infer.hpp"
#include "scqp/problem.hpp"

namespace scqp {

enum class StepKind { CONTRACT, EXPAND, SCRAPE };

const char* to_string(StepKind kind);

struct VerlanRecord {
  StepKind step_kind = StepKind::CONTRACT;
  CVec r;
  double alpha = 0.0;
  CVec x_star;
  double dual_value = 0.0;
  double rho = 0.0;
  double x_norm = 0.0;  // always equals the norm of x_star
  // Conditioning of the solve behind x_star: min_eig(A_psi) at its dual
  // optimum. Near-zero values mark ambiguous maximizer faces, where the
  // scrape magnitude guarantee does not apply.
  double min_eig = 0.0;
};

struct VerlanParams {
  double sigma = 0.5;        // scrape rate applied at the boundary
  double gamma = 0.5;        // scrape rate applied off the boundary
  double epsilon = 0.0;      // expansion step; 0 selects alpha_max / 8
  double boundary_tol = 1e-3;
  int scrape_limit = 25;
  // Descending contraction levels ending at 0; empty selects the geometric
  // default {alpha_max 2^-j : j = 0..6} + {0} with alpha_max = 10 |Xbul_inv|_F.
  std::vector<double> alpha_schedule;
  bool convex_mix = true;    // r <- (1-rate) r + rate x*, else r <- r + rate x*
  bool normalize_r = false;  // rescale r to the magnitude of s_o after mixing
  int max_solves = 400;      // total dual-solve budget for a run
  SolverOptions solver;      // inner dual solves; kernel resolution off
};

// Most recent state with rho(x*) >= 1 - boundary_tol.
struct StrongSnapshot {
  bool valid = false;
  CVec r;
  double alpha = 0.0;
  CVec x_star;
  double dual_value = 0.0;
  double rho = 0.0;
};

struct VerlanState {
  CVec r;                    // drifting objective linear part, starts at s_o
  double alpha = 0.0;        // current contraction level
  double epsilon_cur = 0.0;
  StrongSnapshot last_strong_dual;
  std::vector<VerlanRecord> history;
  // Mirrors of the latest dual solve.
  CVec x_cur;
  double rho_cur = 0.0;
  double dual_cur = 0.0;
  double min_eig_cur = 0.0;
  bool terminal = false;
  int solves_used = 0;
  std::string diagnostics;
};

// Contraction levels ran out before strong duality; carries the best
// proximity reached.
struct ContractError : std::runtime_error {
  explicit ContractError(const std::string& what, double best)
      : std::runtime_error(what), best_rho(best) {}
  double best_rho = 0.0;
};

// Dual-solve budget exhausted mid-protocol.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ScrapeOutcome {
  AtBoundary,   // single sigma-mix applied, resume expansion
  Strong,       // gamma loop reached the boundary (exit a)
  Reverted,     // scrape_limit hit; epsilon halved, state reverted (exit b)
  Stalled,      // scrape_limit hit with stationary x*; caller should contract
};

struct VerlanResult {
  VerlanState state;
  bool terminal = false;
  double r_drift = 0.0;  // |r - s_o|
  std::optional<InferredStructure> inferred;
  // Constraint residuals of the terminal program at x* against the
  // eigenvalue-ratio feasibility bounds.
  RVec terminal_residuals;
  RVec terminal_bounds;
  bool lemma_ok = false;
  int solves_used = 0;
  std::string diagnostics;
};

// Descending levels {alpha_max 2^-j : j = 0..6} closed with 0; the default
// contraction schedule for a given ceiling.
std::vector<double> geometric_schedule(double alpha_max);

// Rebuild the program with objective linear part r and every constraint's
// potential shifted to Xbul_inv + alpha I.  Bases without scattering
// provenance support only r-replacement (alpha must be 0).
SCQP make_program(const SCQP& base, const CVec& r, double alpha);

// Fill in the schedule/epsilon defaults that depend on the base program.
VerlanParams resolve_params(const SCQP& base, const VerlanParams& params);

// Protocol (a): advance alpha up the schedule, scraping at each new level,
// until strong duality; records a snapshot.  Throws ContractError when the
// schedule is exhausted.
VerlanState& contract(VerlanState& state, const SCQP& base, const VerlanParams& params);

// Protocol (b): one expansion step (alpha decreases by epsilon_cur, floored
// at 0) followed by a dual solve; sets the terminal flag at alpha = 0 with
// strong duality.
VerlanState& expand(VerlanState& state, const SCQP& base, const VerlanParams& params);

// Protocol (c): at the boundary, a single sigma-mix; off the boundary,
// gamma-mix + re-solve up to scrape_limit times.
ScrapeOutcome scrape(VerlanState& state, const SCQP& base, const VerlanParams& params);

// Full orchestration: initial solve, contraction if needed, then
// expand/scrape until terminal or budget; attaches an inferred structure on
// terminal states with scattering provenance.
VerlanResult run_verlan(const SCQP& base, const VerlanParams& params = {});

}  // namespace scqp
