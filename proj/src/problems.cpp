#include "scqp/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "scqp/dual.hpp"
#include "scqp/infer.hpp"
#include "scqp/physics1d.hpp"

namespace scqp {

namespace {

void oracle_check(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("builtin oracle violated: " + what);
}

SCQP make_ball() {
  SCQP p;
  p.objective = make_form(CMat::Zero(2, 2), (CVec(2) << 1.0, 0.0).finished(), 0.0);
  p.constraints.push_back({make_form(CMat::Identity(2, 2), CVec::Zero(2), 1.0), Sense::GE});
  p.kappa = (RVec(1) << 1.0).finished();
  p.label = "ball";
  p.notes =
      "Maximize 2 Re[x_1] over the unit ball |x|^2 <= 1. Strong duality holds: "
      "value 2 at x = (1, 0), multiplier 1.";
  p.feasible_witnesses.push_back(CVec::Zero(2));
  validate(p);
  // Analytic oracle: D(phi) = phi + 1/phi has its minimum 2 at phi = 1.
  const DualEval e = eval_dual(p, (RVec(1) << 1.0).finished());
  oracle_check(std::abs(e.value - 2.0) <= 1e-12, "ball dual value at phi=1 must be 2");
  oracle_check((e.x_star - (CVec(2) << 1.0, 0.0).finished()).norm() <= 1e-12,
               "ball dual field at phi=1 must be (1,0)");
  return p;
}

SCQP make_fig2a() {
  SCQP p;
  p.objective = make_form(CMat::Zero(2, 2), (CVec(2) << 0.0, -0.5).finished(), 0.0);
  CMat A1 = CMat::Zero(2, 2);
  A1(1, 1) = -4.0;
  p.constraints.push_back({make_form(A1, (CVec(2) << -2.0, 1.5).finished(), -4.0), Sense::GE});
  p.constraints.push_back({make_form(CMat::Identity(2, 2), CVec::Zero(2), 1.0), Sense::GE});
  p.kappa = (RVec(2) << 0.0, 1.0).finished();
  p.label = "fig2a";
  p.notes =
      "Canonical 2-D gapped instance: maximize -Re[x_2] subject to "
      "f_1 = -4 Re[x_1] + 3 Re[x_2] + 4|x_2|^2 - 4 >= 0 and |x|^2 <= 1. "
      "The objective's stationary point (0, 0) is infeasible here (f_1(0,0) = -4); "
      "the feasible maximum 0 is attained at (-1, 0). The dual bound is 1/3 "
      "(multipliers (1/3, 4/3), attained in the limit onto the cone boundary), so "
      "the duality gap is exactly 1/3. The kernel-resolved dual field is "
      "(-1/2, -1/3) with |x| = sqrt(13)/6 < 1; no sign/sense variant of this "
      "encoding makes the dual field land on (0, -1/3) while keeping value and "
      "gap, so the resolved field is the pinned reference point.";
  p.feasible_witnesses.push_back((CVec(2) << -1.0, 0.0).finished());
  // Strict interior point required by barrier starts: f_1 = 0.36, f_2 = 0.15.
  p.feasible_witnesses.push_back((CVec(2) << -0.9, 0.2).finished());
  validate(p);
  // Brute-force oracle: the best feasible objective on the disk is 0 at (-1, 0).
  const PrimalResult pr = brute_force_primal_grid(p);
  oracle_check(pr.found, "fig2a grid search must find a feasible point");
  oracle_check(std::abs(pr.value - 0.0) <= 1e-6, "fig2a primal optimum must be 0");
  oracle_check((pr.argmax - (CVec(2) << -1.0, 0.0).finished()).norm() <= 1e-3,
               "fig2a primal argmax must be (-1,0)");
  for (const CVec& w : p.feasible_witnesses) {
    oracle_check(is_feasible(p, w), "fig2a witnesses must be feasible");
  }
  return p;
}

SCQP make_subset_sum(const std::vector<long>& set, long target) {
  if (set.empty() || set.size() > 20) {
    throw std::invalid_argument("subset-sum: set size must be in [1, 20]");
  }
  SCQP p = encode_subset_sum(set, target);
  // Enumerated oracle doubles as the witness list for barrier starts and
  // hull sampling (kept to enumerable sizes).
  if (set.size() <= 12) {
    const Eigen::Index n = p.objective.dim();
    std::vector<CVec> feasible;
    double best = 0.0;
    bool any = false;
    for (unsigned long mask = 1; mask < (1ul << set.size()); ++mask) {
      CVec x = CVec::Zero(n);
      long sum = 0;
      for (size_t k = 0; k < set.size(); ++k) {
        if (mask & (1ul << k)) {
          x(static_cast<Eigen::Index>(k)) = 1.0;
          sum += set[k];
        }
      }
      if (sum <= target) {
        feasible.push_back(x);
        oracle_check(is_feasible(p, x), "subset-sum indicator must satisfy the encoding");
        const double fo = eval(p.objective, x);
        oracle_check(std::abs(fo - static_cast<double>(sum)) <= 1e-9,
                     "subset-sum objective must equal the selected sum");
        if (!any || fo > best) best = fo;
        any = true;
      }
    }
    const PrimalResult pr = brute_force_primal_binary(p);
    oracle_check(pr.found == any, "subset-sum enumeration mismatch");
    if (any) {
      oracle_check(std::abs(pr.value - best) <= 1e-9, "subset-sum enumerated optimum mismatch");
      p.feasible_witnesses = std::move(feasible);
    }
  }
  return p;
}

SCQP make_helmholtz1d(Eigen::Index cells, double dipole_pos) {
  Grid1D grid;
  grid.n = cells;
  grid.design_span = {0, cells};
  MaterialSet mat;
  Dipole source;
  source.pos = dipole_pos;
  DesignProgram dp = build_design_scqp(grid, mat, source);
  SCQP p = std::move(dp.program);
  // Physical-identity oracle: the resimulated full-slab field satisfies every
  // scattering constraint with equality.
  oracle_check(p.feasible_witnesses.size() >= 2, "helmholtz1d must carry slab witnesses");
  const RVec res = residuals(p, p.feasible_witnesses.back());
  double scale = 1.0;
  for (const SensedConstraint& c : p.constraints) scale = std::max(scale, c.form.s.norm());
  oracle_check(res.cwiseAbs().maxCoeff() <= 1e-6 * scale,
               "helmholtz1d slab field must satisfy all rows with equality");
  return p;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"ball", "fig2a", "subset-sum", "helmholtz1d"};
}

SCQP load_builtin(const BuiltinRequest& req) {
  if (req.name == "ball") return make_ball();
  if (req.name == "fig2a") return make_fig2a();
  if (req.name == "subset-sum") return make_subset_sum(req.set, req.target);
  if (req.name == "helmholtz1d") return make_helmholtz1d(req.cells, req.dipole_pos);
  throw std::invalid_argument("unknown builtin problem: " + req.name);
}

SCQP load_builtin(const std::string& name) {
  BuiltinRequest req;
  req.name = name;
  return load_builtin(req);
}

SCQP random_scqp(std::mt19937_64& rng, Eigen::Index n_max, int j_max, double eq_prob) {
  std::uniform_int_distribution<Eigen::Index> ndist(1, n_max);
  std::uniform_int_distribution<int> jdist(1, j_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Index n = ndist(rng);
  const int J = jdist(rng);

  auto rand_cvec = [&](Eigen::Index m) {
    CVec v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = cxd(gauss(rng), gauss(rng));
    return v;
  };
  auto rand_cmat = [&](Eigen::Index m) {
    CMat M(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) M(r, c) = cxd(gauss(rng), gauss(rng));
    }
    return M;
  };

  const CVec x_c = (0.7 * rand_cvec(n)).eval();  // hidden strict witness
  SCQP p;
  p.objective = make_form(hermitian_part(rand_cmat(n)), rand_cvec(n), 0.0);
  p.label = "random";

  // Row 0: positive-definite compactness row through x_c with strict margin.
  {
    const CMat R = rand_cmat(n);
    const CMat A = ((R * R.adjoint()) / static_cast<double>(n) +
                    0.3 * CMat::Identity(n, n))
                       .eval();
    const CVec s = rand_cvec(n);
    const double margin = 0.5 + unit(rng);
    const double c =
        std::real(x_c.dot(A * x_c)) - 2.0 * std::real(s.dot(x_c)) + margin;
    p.constraints.push_back({make_form(A, s, c), Sense::GE});
  }
  for (int j = 1; j < J; ++j) {
    const CMat A = hermitian_part(rand_cmat(n));
    const CVec s = rand_cvec(n);
    const bool eq = unit(rng) < eq_prob;
    const double margin = eq ? 0.0 : 0.2 + unit(rng);
    const double c =
        std::real(x_c.dot(A * x_c)) - 2.0 * std::real(s.dot(x_c)) + margin;
    p.constraints.push_back({make_form(A, s, c), eq ? Sense::EQ : Sense::GE});
  }
  p.kappa = RVec::Zero(J);
  p.kappa(0) = 1.0;
  p.feasible_witnesses.push_back(x_c);
  validate(p);
  return p;
}

}  // namespace scqp
