#include "scqp/sion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "scqp/simplex.hpp"

namespace scqp {

namespace {

struct CutCache {
  std::vector<RVec> rows;   // row . phi <= rhs
  std::vector<double> rhs;
};

// Converge the cutting-plane loop at box bound b. Returns the LP part
// min sum_j phi_j f_j(x) and the minimizing phi.
std::pair<RVec, double> cut_solve(const ExpandedProgram& ep, const RVec& cost, double b,
                                  CutCache& cache, const SionOptions& opts) {
  const Eigen::Index J = static_cast<Eigen::Index>(ep.rows.size());
  RVec phi = RVec::Zero(J);
  double lp_value = 0.0;
  for (int round = 0; round <= opts.cut_limit; ++round) {
    LinearProgram lp;
    lp.c = cost;
    const Eigen::Index mc = static_cast<Eigen::Index>(cache.rows.size());
    lp.A_ub.resize(mc, J);
    lp.b_ub.resize(mc);
    for (Eigen::Index r = 0; r < mc; ++r) {
      lp.A_ub.row(r) = cache.rows[static_cast<size_t>(r)].transpose();
      lp.b_ub(r) = cache.rhs[static_cast<size_t>(r)];
    }
    lp.A_eq.resize(0, J);
    lp.b_eq.resize(0);
    lp.lower = RVec::Zero(J);
    lp.upper = RVec::Constant(J, b);
    // Pivot budget sized to the tableau; degenerate cut sets can stall
    // Bland's rule far beyond any productive pivot count.
    const int lp_iters = 2000 + 30 * static_cast<int>(mc + J);
    const LpSolution sol = solve_lp(lp, lp_iters);
    if (sol.status != LpStatus::Optimal) {
      throw std::runtime_error("eval_sion_bounded: multiplier LP did not solve");
    }
    phi = sol.x;
    lp_value = sol.value;

    CMat M = ep.objective.A;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (phi(j) != 0.0) M += phi(j) * ep.rows[static_cast<size_t>(j)].A;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(M);
    const double scale = 1.0 + M.norm();
    const double cut_tol = opts.lp_tol * scale;
    if (es.eigenvalues()(0) >= -cut_tol) return {phi, lp_value};
    if (round == opts.cut_limit) break;
    const int add = std::min<int>(3, static_cast<int>(M.rows()));
    for (int i = 0; i < add; ++i) {
      if (es.eigenvalues()(i) >= -cut_tol) break;
      const CVec v = es.eigenvectors().col(i);
      RVec row(J);
      for (Eigen::Index j = 0; j < J; ++j) {
        row(j) = -std::real(v.dot(ep.rows[static_cast<size_t>(j)].A * v));
      }
      cache.rows.push_back(row);
      cache.rhs.push_back(std::real(v.dot(ep.objective.A * v)));
    }
  }
  return {phi, lp_value};  // cut budget exhausted; best available iterate
}

void check_cone_reachable(const ExpandedProgram& ep, double b) {
  Eigen::SelfAdjointEigenSolver<CMat> es(ep.objective.A);
  const double w0 = es.eigenvalues()(0);
  if (w0 >= -1e-12 * (1.0 + ep.objective.A.norm())) return;
  // Objective bilinear part indefinite: verify the kappa lift fits the box.
  const QuadraticForm fk = composite(ep.rows, ep.kappa);
  Eigen::SelfAdjointEigenSolver<CMat> ek(fk.A);
  const double lam = ek.eigenvalues()(0);
  if (lam <= 0.0) throw std::domain_error("eval_sion_bounded: kappa combination not PD");
  const double t = -w0 / lam;
  if (t * ep.kappa.maxCoeff() > b) {
    throw std::domain_error("eval_sion_bounded: bounded multiplier cone empty at this b");
  }
}

}  // namespace

SionEval eval_sion_bounded(const ExpandedProgram& ep, const CVec& x, double b,
                           const SionOptions& opts) {
  if (!(b > 0.0)) throw std::invalid_argument("eval_sion_bounded: b must be positive");
  if (!x.allFinite()) throw std::invalid_argument("eval_sion_bounded: x must be finite");
  check_cone_reachable(ep, b);

  const Eigen::Index J = static_cast<Eigen::Index>(ep.rows.size());
  RVec cost(J);
  for (Eigen::Index j = 0; j < J; ++j) cost(j) = eval(ep.rows[static_cast<size_t>(j)], x);
  const double f0 = eval(ep.objective, x);

  CutCache cache;
  auto [phi, lp_value] = cut_solve(ep, cost, b, cache, opts);

  SionEval out;
  out.value = f0 + lp_value;
  out.phi_min = phi;
  out.bound_b = b;
  out.divergence_rate = 0.0;
  if (J > 0 && phi.maxCoeff() >= b * (1.0 - 1e-8)) {
    const auto [phi_half, lp_half] = cut_solve(ep, cost, b / 2.0, cache, opts);
    (void)phi_half;
    out.divergence_rate = (out.value - (f0 + lp_half)) / (b - b / 2.0);
  }
  return out;
}

SionEval eval_sion_bounded(const SCQP& p, const CVec& x, double b, const SionOptions& opts) {
  return eval_sion_bounded(expand(p), x, b, opts);
}

SionSetReport sion_membership(const SCQP& p, const CVec& x,
                              const std::vector<double>& b_schedule,
                              const SionOptions& opts) {
  if (b_schedule.size() < 3) {
    throw std::invalid_argument("sion_membership: schedule needs at least 3 points");
  }
  for (size_t i = 1; i < b_schedule.size(); ++i) {
    if (!(b_schedule[i] > b_schedule[i - 1])) {
      throw std::invalid_argument("sion_membership: schedule must be increasing");
    }
  }
  const ExpandedProgram ep = expand(p);
  check_cone_reachable(ep, b_schedule.front());

  const Eigen::Index J = static_cast<Eigen::Index>(ep.rows.size());
  RVec cost(J);
  for (Eigen::Index j = 0; j < J; ++j) cost(j) = eval(ep.rows[static_cast<size_t>(j)], x);
  const double f0 = eval(ep.objective, x);

  SionSetReport rep;
  rep.b_schedule = b_schedule;
  CutCache cache;  // cuts are valid for every b; share them down the schedule
  for (const double b : b_schedule) {
    const auto [phi, lp_value] = cut_solve(ep, cost, b, cache, opts);
    (void)phi;
    rep.values.push_back(f0 + lp_value);
  }
  // Flatness is judged on the decrease rate per unit b against the cost
  // scale: finite-precision x carries tolerance-level ray costs that drag
  // S_b down linearly in b, so an absolute value comparison would reject
  // genuine members whenever the schedule reaches large b.
  const double cost_scale = (J > 0) ? cost.cwiseAbs().maxCoeff() : 0.0;
  const size_t k = rep.values.size();
  for (size_t i = 1; i < k; ++i) {
    const double rate =
        std::abs(rep.values[i] - rep.values[i - 1]) / (b_schedule[i] - b_schedule[i - 1]);
    if (rate <= opts.plateau_tol * (1.0 + cost_scale)) {
      rep.plateau_index = static_cast<int>(i);
      break;
    }
  }
  rep.member = rep.plateau_index >= 0;
  rep.plateau_value =
      rep.member ? rep.values[static_cast<size_t>(rep.plateau_index)] : rep.values[k - 1];
  rep.divergence_rate = (rep.values[k - 1] - rep.values[k - 2]) /
                        (b_schedule[k - 1] - b_schedule[k - 2]);
  return rep;
}

BScheduleReport default_b_schedule(const SCQP& p) {
  BScheduleReport rep;
  const ExpandedProgram ep = expand(p);
  const Eigen::Index n = p.objective.dim();
  const Eigen::Index J = static_cast<Eigen::Index>(ep.rows.size());

  double scale = 1.0;
  bool have_geometry = false;
  std::vector<CVec> pts;
  try {
    const QuadraticForm fk = composite(ep.rows, ep.kappa);
    const StationaryPoint sp = stationary_point(fk);
    const double fc = eval(fk, sp.x);
    Eigen::SelfAdjointEigenSolver<CMat> ek(fk.A);
    const double lam = ek.eigenvalues()(0);
    if (fc > 0.0 && lam > 0.0) {
      have_geometry = true;
      const double h = std::sqrt(fc / lam);
      pts.push_back(sp.x);
      auto push_if_inside = [&](CVec cand) {
        for (int halvings = 0; halvings < 4; ++halvings) {
          if (eval(fk, cand) >= 0.0) {
            pts.push_back(cand);
            return;
          }
          cand = sp.x + 0.5 * (cand - sp.x);
        }
      };
      for (Eigen::Index i = 0; i < n; ++i) {
        for (const cxd dir : {cxd(1.0, 0.0), cxd(-1.0, 0.0), cxd(0.0, 1.0), cxd(0.0, -1.0)}) {
          CVec cand = sp.x;
          cand(i) += dir * h;
          push_if_inside(cand);
        }
      }
      std::mt19937_64 rng(9001);
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (int k = 0; k < 128; ++k) {
        CVec dir(n);
        for (Eigen::Index i = 0; i < n; ++i) dir(i) = cxd(gauss(rng), gauss(rng));
        dir.normalize();
        push_if_inside(sp.x + (unif(rng) * h) * dir);
      }
      double u = -std::numeric_limits<double>::infinity();
      double l = std::numeric_limits<double>::infinity();
      for (const CVec& pt : pts) {
        const double v = eval(p.objective, pt);
        u = std::max(u, v);
        l = std::min(l, v);
      }
      std::normal_distribution<double> half_gauss(0.0, 1.0);
      double delta = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 1000; ++k) {
        RVec phi(J);
        for (Eigen::Index j = 0; j < J; ++j) phi(j) = std::abs(half_gauss(rng));
        const double nrm = phi.norm();
        if (nrm <= 0.0) continue;
        phi /= nrm;
        const QuadraticForm fphi = composite(ep.rows, phi);
        if (std::abs(fphi.c) <= 1e-12 && fphi.s.norm() <= 1e-12) rep.remark_ok = false;
        double best = -std::numeric_limits<double>::infinity();
        for (const CVec& pt : pts) best = std::max(best, eval(fphi, pt));
        delta = std::min(delta, best);
      }
      delta = std::max(delta, 1e-6);
      // Above ~1e3 the schedule tops out where b-proportional solver noise
      // swamps any plateau, so larger "adequate" estimates are not usable.
      scale = std::clamp((u - l) / delta, 1.0, 1e3);
    }
  } catch (const std::exception&) {
    have_geometry = false;
  }
  if (!have_geometry) scale = 1.0;

  // The smallest schedule point must admit a PSD lift of an indefinite
  // objective along kappa, or every evaluation at it is vacuous.
  Eigen::SelfAdjointEigenSolver<CMat> eo(ep.objective.A);
  const double w0 = eo.eigenvalues()(0);
  if (w0 < 0.0 && ep.kappa.size() > 0) {
    const QuadraticForm fk = composite(ep.rows, ep.kappa);
    Eigen::SelfAdjointEigenSolver<CMat> ek(fk.A);
    const double lam = ek.eigenvalues()(0);
    const double kmax = ep.kappa.maxCoeff();
    if (lam > 0.0 && kmax > 0.0) scale = std::max(scale, 1.5 * (-w0 / lam) * kmax);
  }

  rep.scale = scale;
  for (double m = 1.0; m <= 1024.0; m *= 2.0) rep.b.push_back(m * scale);
  return rep;
}

SionProgramResult solve_sion_program(const SCQP& p, const SolverOptions& opts) {
  SionProgramResult out;
  out.dual = minimize_dual(p, opts);
  out.x_tilde = out.dual.eval.x_star;
  out.value = out.dual.eval.value;

  out.kernel_basis = dual_kernel_basis(expand(p), out.dual.phi_star, opts);
  return out;
}

}  // namespace scqp
