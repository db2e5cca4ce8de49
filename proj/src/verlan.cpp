#include "scqp/verlan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace scqp {

namespace {

bool is_strong(const VerlanState& st, const VerlanParams& pp) {
  return st.rho_cur >= 1.0 - pp.boundary_tol;
}

void take_snapshot(VerlanState& st) {
  st.last_strong_dual.valid = true;
  st.last_strong_dual.r = st.r;
  st.last_strong_dual.alpha = st.alpha;
  st.last_strong_dual.x_star = st.x_cur;
  st.last_strong_dual.dual_value = st.dual_cur;
  st.last_strong_dual.rho = st.rho_cur;
}

// One dual solve of the current (r, alpha) program; appends a record and
// refreshes the strong-duality snapshot when the boundary is reached.
void solve_at(VerlanState& st, const SCQP& base, const VerlanParams& pp, StepKind kind) {
  if (st.solves_used >= pp.max_solves) {
    throw BudgetError("dual-solve budget exhausted after " +
                      std::to_string(st.solves_used) + " solves");
  }
  const SCQP prog = make_program(base, st.r, st.alpha);
  const DualResult dr = minimize_dual(prog, pp.solver);
  ++st.solves_used;
  st.x_cur = dr.eval.x_star;
  st.dual_cur = dr.eval.value;
  st.rho_cur = boundary_proximity(prog, dr.eval.x_star);
  st.min_eig_cur = dr.eval.min_eig_Apsi;
  VerlanRecord rec;
  rec.step_kind = kind;
  rec.r = st.r;
  rec.alpha = st.alpha;
  rec.x_star = st.x_cur;
  rec.dual_value = st.dual_cur;
  rec.rho = st.rho_cur;
  rec.x_norm = st.x_cur.norm();
  rec.min_eig = st.min_eig_cur;
  st.history.push_back(std::move(rec));
  if (is_strong(st, pp)) take_snapshot(st);
}

void mix_r(VerlanState& st, const SCQP& base, double rate, const VerlanParams& pp) {
  if (pp.convex_mix) {
    st.r = ((1.0 - rate) * st.r + rate * st.x_cur).eval();
  } else {
    st.r = (st.r + rate * st.x_cur).eval();
  }
  if (pp.normalize_r) {
    const double target = base.objective.s.norm();
    const double cur = st.r.norm();
    if (cur > 0.0) st.r *= target / cur;
  }
}

void append_mix_record(VerlanState& st) {
  VerlanRecord rec;
  rec.step_kind = StepKind::SCRAPE;
  rec.r = st.r;
  rec.alpha = st.alpha;
  rec.x_star = st.x_cur;
  rec.dual_value = st.dual_cur;
  rec.rho = st.rho_cur;
  rec.x_norm = st.x_cur.norm();
  rec.min_eig = st.min_eig_cur;
  st.history.push_back(std::move(rec));
}

// Gamma-mix + re-solve until the boundary or the limit; enforces the
// magnitude monotonicity derivation in raw (non-convex) mixing.
// Returns {reached_boundary, last |x*| change}.
//
// The derivation treats x* as the unambiguous maximizer for its objective
// vector. When the multiplier composite is near singular the maximizer is a
// face, the reported point is its minimum-norm element, and the magnitude can
// genuinely drop, so those steps are exempt; the tolerance sits above the
// stationarity noise of well-conditioned solves (observed <= ~2e-7).
std::pair<bool, double> gamma_loop(VerlanState& st, const SCQP& base, const VerlanParams& pp) {
  const double degeneracy_cut =
      1e-5 * kappa_form(make_program(base, st.r, st.alpha)).A.norm();
  double last_change = std::numeric_limits<double>::infinity();
  for (int k = 0; k < pp.scrape_limit; ++k) {
    mix_r(st, base, pp.gamma, pp);
    const double before = st.x_cur.norm();
    const double before_eig = st.min_eig_cur;
    solve_at(st, base, pp, StepKind::SCRAPE);
    const double after = st.x_cur.norm();
    last_change = std::abs(after - before);
    if (!pp.convex_mix && before_eig > degeneracy_cut && st.min_eig_cur > degeneracy_cut &&
        after < before - 1e-6 * (1.0 + after)) {
      throw std::logic_error("scrape monotonicity violated: |x*| decreased from " +
                             std::to_string(before) + " to " + std::to_string(after));
    }
    if (is_strong(st, pp)) return {true, last_change};
  }
  return {false, last_change};
}

}  // namespace

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::CONTRACT: return "CONTRACT";
    case StepKind::EXPAND: return "EXPAND";
    case StepKind::SCRAPE: return "SCRAPE";
  }
  return "UNKNOWN";
}

std::vector<double> geometric_schedule(double alpha_max) {
  if (!(alpha_max > 0.0)) throw std::invalid_argument("geometric_schedule: alpha_max must be > 0");
  std::vector<double> sched;
  for (int j = 0; j <= 6; ++j) sched.push_back(alpha_max / static_cast<double>(1 << j));
  sched.push_back(0.0);
  return sched;
}

SCQP make_program(const SCQP& base, const CVec& r, double alpha) {
  if (r.size() != base.objective.dim()) {
    throw std::invalid_argument("make_program: r dimension mismatch");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("make_program: alpha must be >= 0");
  SCQP p;
  if (base.scattering.has_value()) {
    ScatteringModel model = *base.scattering;
    if (alpha != 0.0) {
      model.Xbul_inv =
          (model.Xbul_inv + alpha * CMat::Identity(model.n, model.n)).eval();
    }
    p.constraints = build_local_constraints(model);
    p.scattering = std::move(model);
  } else {
    if (alpha != 0.0) {
      throw std::invalid_argument(
          "make_program: contraction requires scattering provenance; alpha must be 0");
    }
    p.constraints = base.constraints;
  }
  p.objective = base.objective;
  p.objective.s = r;
  p.kappa = base.kappa;
  p.label = base.label;
  if (alpha == 0.0) {
    p.feasible_witnesses = base.feasible_witnesses;
  } else {
    p.feasible_witnesses = {CVec::Zero(base.objective.dim())};
  }
  validate(p);
  return p;
}

VerlanParams resolve_params(const SCQP& base, const VerlanParams& params) {
  VerlanParams pp = params;
  if (!(pp.sigma >= 0.0) || !(pp.gamma >= 0.0)) {
    throw std::invalid_argument("verlan: sigma and gamma must be >= 0");
  }
  if (!(pp.boundary_tol > 0.0 && pp.boundary_tol < 1.0)) {
    throw std::invalid_argument("verlan: boundary_tol must lie in (0,1)");
  }
  if (pp.scrape_limit < 1) throw std::invalid_argument("verlan: scrape_limit must be >= 1");
  if (pp.max_solves < 1) throw std::invalid_argument("verlan: max_solves must be >= 1");
  // Protocol solves consume the raw stationary field; kernel resolution is a
  // reporting refinement and is kept out of the inner loop for cost and
  // robustness.
  pp.solver.resolve_kernel = false;
  const double amax =
      base.scattering.has_value() ? 10.0 * base.scattering->Xbul_inv.norm() : 0.0;
  if (pp.alpha_schedule.empty()) {
    pp.alpha_schedule = (amax > 0.0) ? geometric_schedule(amax) : std::vector<double>{0.0};
  }
  for (size_t i = 0; i + 1 < pp.alpha_schedule.size(); ++i) {
    if (!(pp.alpha_schedule[i] > pp.alpha_schedule[i + 1])) {
      throw std::invalid_argument("verlan: alpha_schedule must be strictly descending");
    }
  }
  if (pp.alpha_schedule.back() != 0.0) {
    throw std::invalid_argument("verlan: alpha_schedule must end at 0");
  }
  if (!(pp.epsilon > 0.0)) {
    pp.epsilon = (amax > 0.0) ? amax / 8.0 : 1.0;
  }
  return pp;
}

VerlanState& contract(VerlanState& state, const SCQP& base, const VerlanParams& params) {
  const VerlanParams pp = resolve_params(base, params);
  if (state.r.size() == 0) state.r = base.objective.s;
  if (state.history.empty()) solve_at(state, base, pp, StepKind::CONTRACT);
  if (is_strong(state, pp)) return state;

  double best_rho = state.rho_cur;
  auto scrape_here = [&]() {
    const auto [strong, change] = gamma_loop(state, base, pp);
    (void)change;
    best_rho = std::max(best_rho, state.rho_cur);
    return strong;
  };
  if (scrape_here()) return state;

  std::vector<double> levels;
  for (double a : pp.alpha_schedule) {
    if (a > state.alpha * (1.0 + 1e-12) + 1e-300) levels.push_back(a);
  }
  std::sort(levels.begin(), levels.end());
  for (double a : levels) {
    state.alpha = a;
    solve_at(state, base, pp, StepKind::CONTRACT);
    best_rho = std::max(best_rho, state.rho_cur);
    if (is_strong(state, pp)) return state;
    if (scrape_here()) return state;
  }
  std::ostringstream msg;
  msg << "contraction schedule exhausted without strong duality (best rho " << best_rho
      << ", target " << 1.0 - pp.boundary_tol << ")";
  throw ContractError(msg.str(), best_rho);
}

VerlanState& expand(VerlanState& state, const SCQP& base, const VerlanParams& params) {
  const VerlanParams pp = resolve_params(base, params);
  if (state.r.size() == 0) throw std::logic_error("expand: state not initialized");
  if (state.epsilon_cur <= 0.0) state.epsilon_cur = pp.epsilon;
  state.alpha = std::max(0.0, state.alpha - state.epsilon_cur);
  solve_at(state, base, pp, StepKind::EXPAND);
  if (state.alpha == 0.0 && is_strong(state, pp)) state.terminal = true;
  return state;
}

ScrapeOutcome scrape(VerlanState& state, const SCQP& base, const VerlanParams& params) {
  const VerlanParams pp = resolve_params(base, params);
  if (state.history.empty()) throw std::logic_error("scrape: requires a prior dual solve");
  if (is_strong(state, pp)) {
    mix_r(state, base, pp.sigma, pp);
    append_mix_record(state);
    return ScrapeOutcome::AtBoundary;
  }
  const auto [strong, last_change] = gamma_loop(state, base, pp);
  if (strong) return ScrapeOutcome::Strong;
  if (last_change < 1e-8) return ScrapeOutcome::Stalled;
  if (!state.last_strong_dual.valid) return ScrapeOutcome::Stalled;
  state.epsilon_cur *= 0.5;
  state.r = state.last_strong_dual.r;
  state.alpha = state.last_strong_dual.alpha;
  state.x_cur = state.last_strong_dual.x_star;
  state.dual_cur = state.last_strong_dual.dual_value;
  state.rho_cur = state.last_strong_dual.rho;
  return ScrapeOutcome::Reverted;
}

VerlanResult run_verlan(const SCQP& base, const VerlanParams& params) {
  const VerlanParams pp = resolve_params(base, params);
  VerlanState st;
  st.r = base.objective.s;
  st.alpha = 0.0;
  st.epsilon_cur = pp.epsilon;

  const double eps_floor = 1e-12 * std::max(1.0, pp.alpha_schedule.front());
  try {
    solve_at(st, base, pp, StepKind::CONTRACT);
    if (!(st.alpha == 0.0 && is_strong(st, pp))) {
      contract(st, base, pp);
      while (!(st.alpha == 0.0 && is_strong(st, pp))) {
        expand(st, base, pp);
        if (st.terminal) break;
        if (is_strong(st, pp)) {
          scrape(st, base, pp);  // single sigma-mix at the boundary
          continue;
        }
        const ScrapeOutcome oc = scrape(st, base, pp);
        if (oc == ScrapeOutcome::Stalled) {
          contract(st, base, pp);
        } else if (oc == ScrapeOutcome::Reverted && st.epsilon_cur < eps_floor) {
          st.diagnostics = "expansion step collapsed below the revert floor";
          break;
        }
      }
    }
    if (st.alpha == 0.0 && is_strong(st, pp)) st.terminal = true;
  } catch (const ContractError& e) {
    st.diagnostics = e.what();
  } catch (const BudgetError& e) {
    st.diagnostics = e.what();
  }

  VerlanResult out;
  out.terminal = st.terminal;
  out.r_drift = (st.r - base.objective.s).norm();
  out.solves_used = st.solves_used;
  out.diagnostics = st.diagnostics;
  if (st.terminal) {
    out.terminal_residuals = residuals(base, st.x_cur);
    out.terminal_bounds = lemma_feasibility_bounds(base, st.x_cur);
    bool ok = true;
    for (Eigen::Index j = 0; j < out.terminal_residuals.size(); ++j) {
      const double slack =
          1e-6 * (1.0 + std::abs(out.terminal_bounds(j)) + std::abs(out.terminal_residuals(j)));
      if (out.terminal_residuals(j) < -(out.terminal_bounds(j) + slack)) ok = false;
    }
    out.lemma_ok = ok;
    if (base.scattering.has_value()) {
      MaterialSet mat;
      mat.chi_max = 1.0 / base.scattering->Xbul_inv(0, 0);
      mat.admissible = Admissible::GreyScale;
      out.inferred = infer_structure(st.x_cur, *base.scattering, mat);
    }
  }
  out.state = std::move(st);
  return out;
}

}  // namespace scqp
