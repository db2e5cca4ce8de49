#include "scqp/dual.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "scqp/sion.hpp"

namespace scqp {

namespace {

constexpr double kRankTol = 1e-10;
const double kInf = std::numeric_limits<double>::infinity();

struct CoreEval {
  double value = 0.0;
  CVec x;
  RVec grad;
  double min_eig = 0.0;
  bool in_range = true;
};

// Closed-form inner maximum of the Lagrangian: x = A_psi^+ s_psi with
// eigenvalues below kRankTol * max_eig treated as exact zeros. No cone check;
// callers enforce their own margin.
CoreEval core_eval(const ExpandedProgram& ep, const RVec& phi) {
  const QuadraticForm L = lagrangian(ep.objective, ep.rows, phi);
  const Eigen::Index n = L.dim();
  Eigen::SelfAdjointEigenSolver<CMat> es(L.A);
  const RVec& w = es.eigenvalues();
  const CMat& U = es.eigenvectors();

  CoreEval out;
  out.min_eig = (n > 0) ? w(0) : 0.0;
  const double wmax = (n > 0) ? std::max(w(n - 1), 0.0) : 0.0;
  const double cut = kRankTol * std::max(wmax, 1e-300);

  const CVec y = U.adjoint() * L.s;
  CVec coef = CVec::Zero(n);
  double kernel_mass = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w(i) > cut) {
      coef(i) = y(i) / w(i);
    } else {
      kernel_mass += std::norm(y(i));
    }
  }
  out.x = U * coef;
  out.in_range = std::sqrt(kernel_mass) <= kRankTol * L.s.norm() + 1e-300;
  out.value = out.in_range ? eval(L, out.x) : kInf;
  out.grad.resize(static_cast<Eigen::Index>(ep.rows.size()));
  for (Eigen::Index j = 0; j < out.grad.size(); ++j) {
    out.grad(j) = eval(ep.rows[static_cast<size_t>(j)], out.x);
  }
  return out;
}

struct KappaInfo {
  RVec dir;          // expanded kappa weights
  double lam_min = 0.0;  // smallest eigenvalue of A_kappa (positive)
  double norm = 1.0;     // ||A_kappa||_F, the margin reference scale
};

KappaInfo kappa_info(const ExpandedProgram& ep) {
  KappaInfo k;
  k.dir = ep.kappa;
  if (k.dir.size() != static_cast<Eigen::Index>(ep.rows.size()) || k.dir.maxCoeff() <= 0.0) {
    throw std::invalid_argument("dual: expanded program carries no kappa certificate");
  }
  const QuadraticForm fk = composite(ep.rows, k.dir);
  Eigen::SelfAdjointEigenSolver<CMat> es(fk.A);
  k.lam_min = es.eigenvalues()(0);
  if (!(k.lam_min > 0.0)) {
    throw std::invalid_argument("dual: kappa combination is not positive definite");
  }
  k.norm = std::max(fk.A.norm(), 1e-300);
  return k;
}

RVec lift_to_margin(const RVec& phi, double min_eig, double target, const KappaInfo& k) {
  if (min_eig >= target) return phi;
  return phi + ((target - min_eig) / k.lam_min) * k.dir;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Eigenvalues at or below the solver's final interior floor are kernel for
// reporting purposes: their inverse contributions to x are numerically
// meaningless once the floor, not the problem, pins them.
double kernel_cut(const RVec& w, double kernel_tol, double floor_abs) {
  const double wmax = std::max(w.size() > 0 ? w.maxCoeff() : 0.0, 0.0);
  return std::max(kernel_tol * std::max(wmax, 1e-300), 2.0 * floor_abs);
}

// Maximize the bounded Sion function over the kernel slice through x0; the
// dual value is constant there, so this only disambiguates the reported point.
CVec resolve_kernel_point(const ExpandedProgram& ep, const RVec& phi, const CVec& x_in,
                          const SolverOptions& opts, double floor_abs) {
  const QuadraticForm L = lagrangian(ep.objective, ep.rows, phi);
  Eigen::SelfAdjointEigenSolver<CMat> es(L.A);
  const RVec& w = es.eigenvalues();
  const double cut = kernel_cut(w, opts.kernel_tol, floor_abs);
  std::vector<CVec> dirs;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) <= cut) dirs.push_back(es.eigenvectors().col(i));
  }
  if (dirs.empty() || static_cast<int>(dirs.size()) > opts.kernel_max_dim) return x_in;
  CVec x_solid = x_in;
  for (const CVec& v : dirs) x_solid -= v * v.dot(x_solid);

  const QuadraticForm fk = composite(ep.rows, ep.kappa);
  const double b_box = 10.0 * (1.0 + phi.maxCoeff());
  // The slice search only ranks points, so a small cut budget suffices.
  SionOptions sopts;
  sopts.cut_limit = 60;
  CVec x0 = x_solid;
  for (int pass = 0; pass < 2; ++pass) {
    for (const CVec& v : dirs) {
      const double a2 = std::real(v.dot(fk.A * v));
      if (!(a2 > 0.0)) continue;
      const double b2 = std::real((fk.s - fk.A * x0).dot(v));
      const double c2 = eval(fk, x0);
      const double disc = b2 * b2 + a2 * c2;
      if (disc <= 0.0) continue;
      const double root = std::sqrt(disc);
      const double tlo = (b2 - root) / a2;
      const double thi = (b2 + root) / a2;
      if (!(thi > tlo)) continue;
      // A failed multiplier LP on a slice sample (cut exhaustion on nearly
      // degenerate programs) forfeits that sample rather than the resolution.
      auto slice = [&](double t) -> double {
        try {
          return eval_sion_bounded(ep, CVec(x0 + t * v), b_box, sopts).value;
        } catch (const std::exception&) {
          return -std::numeric_limits<double>::infinity();
        }
      };
      const double t_best = golden_max(slice, tlo, thi, 48);
      if (std::isfinite(slice(t_best))) x0 = x0 + t_best * v;
    }
    if (dirs.size() == 1) break;
  }
  return x0;
}

}  // namespace

DualEval eval_dual(const ExpandedProgram& ep, const RVec& phi, double psd_margin) {
  if (phi.size() != static_cast<Eigen::Index>(ep.rows.size())) {
    throw std::invalid_argument("eval_dual: multiplier size mismatch");
  }
  if (phi.size() > 0 && phi.minCoeff() < 0.0) {
    throw std::invalid_argument("eval_dual: multipliers must be nonnegative");
  }
  const CoreEval core = core_eval(ep, phi);
  const QuadraticForm L = lagrangian(ep.objective, ep.rows, phi);
  if (core.min_eig < -psd_margin * std::max(L.A.norm(), 1.0)) {
    throw std::domain_error("eval_dual: A_psi indefinite beyond margin (phi outside the cone)");
  }
  DualEval out;
  out.value = core.value;
  out.x_star = core.x;
  out.grad = core.grad;
  out.min_eig_Apsi = core.min_eig;
  out.in_range = core.in_range;
  return out;
}

DualEval eval_dual(const SCQP& p, const RVec& phi, double psd_margin) {
  return eval_dual(expand(p), phi, psd_margin);
}

DualResult minimize_dual(const ExpandedProgram& ep, const SolverOptions& opts,
                         const RVec* warm_start) {
  if (!(opts.grad_tol > 0.0) || !(opts.psd_margin > 0.0) || opts.max_iters <= 0 ||
      !(opts.step_init > 0.0) || !(opts.backtrack_ratio > 0.0) ||
      !(opts.backtrack_ratio < 1.0)) {
    throw std::invalid_argument("minimize_dual: solver options out of range");
  }
  const Eigen::Index J = static_cast<Eigen::Index>(ep.rows.size());
  const KappaInfo kappa = kappa_info(ep);
  std::vector<double> stages = opts.margin_stages;
  if (stages.empty()) stages.push_back(opts.psd_margin);

  DualResult res;

  // Starting point: warm start when usable, else t * kappa with t scanned
  // upward until the cone interior is reached.
  RVec phi;
  const double m0 = stages.front() * kappa.norm;
  bool started = false;
  if (warm_start != nullptr && warm_start->size() == J && warm_start->minCoeff() >= 0.0) {
    phi = *warm_start;
    CoreEval c = core_eval(ep, phi);
    phi = lift_to_margin(phi, c.min_eig, m0, kappa);
    c = core_eval(ep, phi);
    started = c.in_range && std::isfinite(c.value);
  }
  if (!started) {
    Eigen::SelfAdjointEigenSolver<CMat> eo(ep.objective.A);
    const double w_o = (ep.objective.dim() > 0) ? eo.eigenvalues()(0) : 0.0;
    double t = std::max((m0 - w_o) / kappa.lam_min, 1e-12);
    for (int k = 0; k < 80 && !started; ++k) {
      phi = t * kappa.dir;
      const CoreEval c = core_eval(ep, phi);
      if (c.min_eig >= m0 * (1.0 - 1e-9) && c.in_range && std::isfinite(c.value)) {
        started = true;
      } else {
        t *= 2.0;
      }
    }
    if (!started) {
      throw std::runtime_error("minimize_dual: no strictly interior start along kappa");
    }
  }

  CoreEval cur = core_eval(ep, phi);
  res.history.emplace_back(phi, cur.value);

  int iters = 0;
  bool final_stage_stalled = false;
  for (size_t si = 0; si < stages.size(); ++si) {
    const double m_abs = stages[si] * kappa.norm;
    const bool last_stage = (si + 1 == stages.size());
    const RVec lifted = lift_to_margin(phi, cur.min_eig, m_abs, kappa);
    if (lifted != phi) {
      phi = lifted;
      cur = core_eval(ep, phi);
      res.history.emplace_back(phi, cur.value);
    }
    double step = opts.step_init;
    while (iters < opts.max_iters) {
      ++iters;
      const RVec& g = cur.grad;
      RVec pg = g;
      for (Eigen::Index j = 0; j < J; ++j) {
        if (phi(j) <= 0.0 && g(j) > 0.0) pg(j) = 0.0;
      }
      if (pg.norm() <= opts.grad_tol * (1.0 + std::abs(cur.value))) break;

      bool accepted = false;
      double trial = step;
      while (trial > 1e-18 * opts.step_init) {
        RVec cand = (phi - trial * g).cwiseMax(0.0);
        CoreEval cc = core_eval(ep, cand);
        if (cc.min_eig < m_abs) {
          cand = lift_to_margin(cand, cc.min_eig, m_abs, kappa);
          cc = core_eval(ep, cand);
        }
        if (std::isfinite(cc.value) && cc.value < cur.value) {
          phi = cand;
          cur = cc;
          res.history.emplace_back(phi, cur.value);
          step = std::min(trial * 1.6, 1e8);
          accepted = true;
          break;
        }
        trial *= opts.backtrack_ratio;
      }
      if (!accepted) {
        // No descent direction survives at this interior floor: the iterate
        // is a fixed point of the projected/lifted step at this stage.
        if (last_stage) final_stage_stalled = true;
        break;
      }
    }
  }

  res.iterations = iters;
  res.phi_star = phi;
  {
    RVec pg = cur.grad;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (phi(j) <= 0.0 && cur.grad(j) > 0.0) pg(j) = 0.0;
    }
    const bool pg_ok = pg.norm() <= opts.grad_tol * (1.0 + std::abs(cur.value));
    // Optima on the cone boundary keep a nonzero gradient; the stall at the
    // tightest floor is the attainable optimality certificate there.
    res.converged = std::isfinite(cur.value) && (pg_ok || final_stage_stalled);
  }

  DualEval ev;
  ev.value = cur.value;
  ev.x_star = cur.x;
  ev.grad = cur.grad;
  ev.min_eig_Apsi = cur.min_eig;
  ev.in_range = cur.in_range;
  if (opts.resolve_kernel && ep.objective.dim() <= opts.resolve_nmax && cur.in_range &&
      std::isfinite(cur.value)) {
    const double floor_abs = stages.back() * kappa.norm;
    const CVec resolved = resolve_kernel_point(ep, phi, cur.x, opts, floor_abs);
    if ((resolved - cur.x).norm() > 0.0) {
      ev.x_star = resolved;
      for (Eigen::Index j = 0; j < J; ++j) {
        ev.grad(j) = eval(ep.rows[static_cast<size_t>(j)], resolved);
      }
    }
  }
  res.eval = ev;
  return res;
}

DualResult minimize_dual(const SCQP& p, const SolverOptions& opts, const RVec* warm_start) {
  return minimize_dual(expand(p), opts, warm_start);
}

double schur_dual_value(const ExpandedProgram& ep, const RVec& phi, double tol) {
  const QuadraticForm L = lagrangian(ep.objective, ep.rows, phi);
  const Eigen::Index n = L.dim();
  CMat base(n + 1, n + 1);
  base.topLeftCorner(n, n) = -L.A;
  base.topRightCorner(n, 1) = L.s;
  base.bottomLeftCorner(1, n) = L.s.adjoint();
  base(n, n) = L.c;
  const double nscale = 1.0 + base.norm();

  auto closes = [&](double alpha) {
    CMat M = -base;
    M(n, n) += alpha;  // -(c - alpha) = -c + alpha
    Eigen::SelfAdjointEigenSolver<CMat> es(M);
    return es.eigenvalues()(0) >= -1e-12 * nscale;
  };

  double hi = std::max(L.c, 0.0) + 1.0;
  bool bracketed = false;
  for (int k = 0; k < 200; ++k) {
    if (closes(hi)) {
      bracketed = true;
      break;
    }
    hi = 2.0 * std::abs(hi) + 1.0;
  }
  if (!bracketed) return kInf;
  double lo = hi - 1.0;
  for (int k = 0; k < 200 && closes(lo); ++k) {
    hi = lo;
    lo = 2.0 * lo - std::abs(lo) - 1.0;
  }
  for (int k = 0; k < 300 && (hi - lo) > tol * (1.0 + std::abs(hi) + std::abs(lo)); ++k) {
    const double mid = 0.5 * (lo + hi);
    if (closes(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double schur_dual_value(const SCQP& p, const RVec& phi, double tol) {
  return schur_dual_value(expand(p), phi, tol);
}

double boundary_proximity(const SCQP& p, const CVec& x, bool* outside) {
  const QuadraticForm fk = kappa_form(p);
  const StationaryPoint center = stationary_point(fk);
  const double fc = eval(fk, center.x);
  if (!(fc > 0.0)) {
    throw std::domain_error("boundary_proximity: kappa set has empty interior");
  }
  const double v = eval(fk, x);
  const double rho = 1.0 - v / fc;
  if (v < 0.0) {
    if (outside != nullptr) *outside = true;
    return rho;  // > 1 signals x outside the compact set
  }
  if (outside != nullptr) *outside = false;
  return std::clamp(rho, 0.0, 1.0);
}

CMat dual_kernel_basis(const ExpandedProgram& ep, const RVec& phi,
                       const SolverOptions& opts) {
  const QuadraticForm L = lagrangian(ep.objective, ep.rows, phi);
  Eigen::SelfAdjointEigenSolver<CMat> es(L.A);
  const KappaInfo kappa = kappa_info(ep);
  const double floor_abs =
      (opts.margin_stages.empty() ? opts.psd_margin : opts.margin_stages.back()) * kappa.norm;
  const double cut = kernel_cut(es.eigenvalues(), opts.kernel_tol, floor_abs);
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) <= cut) idx.push_back(i);
  }
  CMat basis(L.A.rows(), static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    basis.col(k) = es.eigenvectors().col(idx[static_cast<size_t>(k)]);
  }
  return basis;
}

RVec lemma_feasibility_bounds(const SCQP& p, const CVec& x) {
  const ExpandedProgram ep = expand(p);
  const QuadraticForm fk = composite(ep.rows, ep.kappa);
  Eigen::SelfAdjointEigenSolver<CMat> ek(fk.A);
  const double m = ek.eigenvalues()(0);
  if (!(m > 0.0)) {
    throw std::domain_error("lemma_feasibility_bounds: kappa combination not PD");
  }
  const double fkx = std::max(eval(fk, x), 0.0);
  RVec eps(static_cast<Eigen::Index>(ep.rows.size()));
  for (Eigen::Index j = 0; j < eps.size(); ++j) {
    Eigen::SelfAdjointEigenSolver<CMat> ej(ep.rows[static_cast<size_t>(j)].A);
    const double n_neg = std::min(ej.eigenvalues()(0), 0.0);
    eps(j) = (-n_neg / m) * fkx;
  }
  return eps;
}

}  // namespace scqp
