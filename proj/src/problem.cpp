#include "scqp/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace scqp {

ExpandedProgram expand(const SCQP& p) {
  ExpandedProgram e;
  e.objective = p.objective;
  const Eigen::Index m = static_cast<Eigen::Index>(p.constraints.size());
  if (p.kappa.size() != m) throw std::invalid_argument("expand: kappa length mismatch");
  std::vector<double> kap;
  for (Eigen::Index j = 0; j < m; ++j) {
    const SensedConstraint& row = p.constraints[static_cast<size_t>(j)];
    e.rows.push_back(row.form);
    e.source_row.push_back(static_cast<int>(j));
    e.negated.push_back(false);
    kap.push_back(p.kappa(j));
    if (row.sense == Sense::EQ) {
      e.rows.push_back(negate(row.form));
      e.source_row.push_back(static_cast<int>(j));
      e.negated.push_back(true);
      kap.push_back(0.0);
    }
  }
  e.kappa = Eigen::Map<RVec>(kap.data(), static_cast<Eigen::Index>(kap.size()));
  return e;
}

RVec residuals(const SCQP& p, const CVec& x) {
  RVec r(static_cast<Eigen::Index>(p.constraints.size()));
  for (size_t j = 0; j < p.constraints.size(); ++j)
    r(static_cast<Eigen::Index>(j)) = eval(p.constraints[j].form, x);
  return r;
}

static double row_scale(const QuadraticForm& q) {
  return std::max(1.0, q.A.norm() + q.s.norm() + std::abs(q.c));
}

bool is_feasible(const SCQP& p, const CVec& x, double tol_scale) {
  const RVec r = residuals(p, x);
  for (size_t j = 0; j < p.constraints.size(); ++j) {
    const double tol = tol_scale * row_scale(p.constraints[j].form);
    const double v = r(static_cast<Eigen::Index>(j));
    if (p.constraints[j].sense == Sense::EQ) {
      if (std::abs(v) > tol) return false;
    } else if (v < -tol) {
      return false;
    }
  }
  return true;
}

QuadraticForm kappa_form(const SCQP& p) {
  std::vector<QuadraticForm> forms;
  forms.reserve(p.constraints.size());
  for (const SensedConstraint& row : p.constraints) forms.push_back(row.form);
  return composite(forms, p.kappa);
}

static bool combination_pd(const std::vector<SensedConstraint>& constraints, const RVec& w,
                           double margin) {
  std::vector<QuadraticForm> forms;
  forms.reserve(constraints.size());
  for (const SensedConstraint& row : constraints) forms.push_back(row.form);
  const QuadraticForm f = composite(forms, w);
  Eigen::SelfAdjointEigenSolver<CMat> es(f.A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > margin;
}

RVec find_kappa(const std::vector<SensedConstraint>& constraints,
                const std::optional<RVec>& candidate) {
  if (constraints.empty()) throw std::invalid_argument("find_kappa: no constraints");
  const Eigen::Index m = static_cast<Eigen::Index>(constraints.size());
  double scale = 0.0;
  for (const SensedConstraint& row : constraints) scale = std::max(scale, row.form.A.norm());
  const double margin = 1e-12 * std::max(1.0, scale);
  if (candidate && candidate->size() == m && candidate->minCoeff() >= 0.0 &&
      combination_pd(constraints, *candidate, margin))
    return *candidate;
  RVec ones = RVec::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j)
    if (constraints[static_cast<size_t>(j)].sense == Sense::GE) ones(j) = 1.0;
  if (ones.maxCoeff() > 0 && combination_pd(constraints, ones, margin)) return ones;
  for (Eigen::Index j = 0; j < m; ++j) {
    RVec one = RVec::Zero(m);
    one(j) = 1.0;
    if (combination_pd(constraints, one, margin)) return one;
  }
  throw std::runtime_error("find_kappa: no positive-definite combination among tried candidates");
}

void validate(const SCQP& p) {
  if (p.constraints.empty()) throw std::invalid_argument("SCQP: no constraints");
  if (p.kappa.size() != static_cast<Eigen::Index>(p.constraints.size()))
    throw std::invalid_argument("SCQP: kappa length mismatch");
  if (p.kappa.minCoeff() < 0) throw std::invalid_argument("SCQP: kappa must be nonnegative");
  for (const SensedConstraint& row : p.constraints)
    if (row.form.dim() != p.objective.dim())
      throw std::invalid_argument("SCQP: constraint dimension mismatch");
  const QuadraticForm fk = kappa_form(p);
  Eigen::SelfAdjointEigenSolver<CMat> es(fk.A, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("SCQP: kappa combination is not positive definite");
}

// ---- scattering models -----------------------------------------------------

std::vector<SensedConstraint> build_local_constraints(const ScatteringModel& model) {
  if (model.witnesses.size() != model.sense_rule.size())
    throw std::invalid_argument("build_local_constraints: sense_rule length mismatch");
  if (model.G0.rows() != model.n || model.Xbul_inv.rows() != model.n ||
      model.e_i.size() != model.n)
    throw std::invalid_argument("build_local_constraints: model dimension mismatch");
  const bool local = model.Xbul_inv.isDiagonal(1e-14);
  const CMat U = model.Xbul_inv - model.G0;
  std::vector<SensedConstraint> out;
  out.reserve(model.witnesses.size());
  for (size_t j = 0; j < model.witnesses.size(); ++j) {
    const CMat& Q = model.witnesses[j];
    if (Q.rows() != model.n || Q.cols() != model.n)
      throw std::invalid_argument("build_local_constraints: witness dimension mismatch");
    if (local && Q.isDiagonal(1e-14)) {
      const CMat D = model.Xbul_inv.diagonal().asDiagonal();
      if (((Q * D) - (D * Q)).norm() > 1e-12 * std::max(1.0, Q.norm() * D.norm()))
        throw std::runtime_error("build_local_constraints: witness does not commute with potential");
    }
    SensedConstraint row;
    row.form = make_form(0.5 * symmetrize(Q * U), 0.5 * (Q * model.e_i), 0.0);
    row.sense = model.sense_rule[j];
    out.push_back(std::move(row));
  }
  return out;
}

bool image_separable(const std::vector<CMat>& D, double tol) {
  if (D.empty()) return false;
  const Eigen::Index n = D.front().rows();
  for (size_t j = 0; j < D.size(); ++j) {
    if (D.size() == 1) return D[j].norm() > tol;
    CMat others(n, static_cast<Eigen::Index>(D.size() - 1) * D.front().cols());
    Eigen::Index col = 0;
    for (size_t k = 0; k < D.size(); ++k) {
      if (k == j) continue;
      others.middleCols(col, D[k].cols()) = D[k];
      col += D[k].cols();
    }
    // l must annihilate every other component: l in the left null space.
    Eigen::JacobiSVD<CMat> svd(others, Eigen::ComputeFullU);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > tol * std::max(1.0, smax)) ++rank;
    if (rank >= n) return false;
    const CMat null_basis = svd.matrixU().rightCols(n - rank);
    if ((null_basis.adjoint() * D[j]).norm() <= tol * std::max(1.0, D[j].norm())) return false;
  }
  return true;
}

std::vector<SensedConstraint> build_nonlocal_constraints(const NonlocalDesign& design,
                                                         const CMat& Xbul) {
  if (!image_separable(design.D)) throw std::runtime_error("build_nonlocal_constraints: potential components are not image separable");
  CMat sum = CMat::Zero(Xbul.rows(), Xbul.cols());
  for (const CMat& Dj : design.D) sum += Dj;
  if ((sum - Xbul).norm() > 1e-9 * std::max(1.0, Xbul.norm()))
    throw std::invalid_argument("build_nonlocal_constraints: Xbul is not the component sum");
  const Eigen::Index n = Xbul.rows();
  const CMat scatter = CMat::Identity(n, n) - Xbul * design.G0;
  std::vector<SensedConstraint> out;
  for (const CMat& Q : design.Q) {
    const CMat B = Q.adjoint() * design.P * Q;
    SensedConstraint row;
    row.form = make_form(0.5 * symmetrize(B * scatter), 0.5 * (B * Xbul * design.G0 * design.j_i),
                         0.0);
    row.sense = Sense::EQ;
    out.push_back(std::move(row));
  }
  return out;
}

// ---- discrete encodings ----------------------------------------------------

SCQP encode_subset_sum(const std::vector<long>& S, long t) {
  if (S.empty()) throw std::invalid_argument("encode_subset_sum: empty set");
  const Eigen::Index n = static_cast<Eigen::Index>(S.size());
  CVec z(n);
  for (Eigen::Index k = 0; k < n; ++k) z(k) = cxd(static_cast<double>(S[static_cast<size_t>(k)]), 0.0);

  SCQP p;
  p.label = "subset-sum";
  p.objective = make_form(CMat::Zero(n, n), 0.5 * z, 0.0);

  std::vector<double> kap;
  for (Eigen::Index k = 0; k < n; ++k) {  // indicator rows: 2 Re[x_k] - 2|x_k|^2 = 0
    CMat A = CMat::Zero(n, n);
    A(k, k) = 2.0;
    CVec s = CVec::Zero(n);
    s(k) = 1.0;
    p.constraints.push_back({make_form(A, s, 0.0), Sense::EQ});
    kap.push_back(1.0);
  }
  for (Eigen::Index k = 0; k < n; ++k) {  // realness rows: 2 Im[x_k] = 0
    CVec s = CVec::Zero(n);
    s(k) = cxd(0.0, 1.0);
    p.constraints.push_back({make_form(CMat::Zero(n, n), s, 0.0), Sense::EQ});
    kap.push_back(0.0);
  }
  p.constraints.push_back({make_form(CMat::Zero(n, n), CVec::Constant(n, 0.5), -1.0), Sense::GE});
  kap.push_back(0.0);
  p.constraints.push_back(
      {make_form(CMat::Zero(n, n), -0.5 * z, static_cast<double>(t)), Sense::GE});
  kap.push_back(0.0);
  p.kappa = Eigen::Map<RVec>(kap.data(), static_cast<Eigen::Index>(kap.size()));
  validate(p);
  return p;
}

// ---- brute-force oracles ---------------------------------------------------

PrimalResult brute_force_primal_grid(const SCQP& p, const GridSearch& spec) {
  const Eigen::Index n = p.objective.dim();
  if (n > 3) throw std::invalid_argument("brute_force_primal_grid: n too large for grid search");
  const QuadraticForm fk = kappa_form(p);
  const StationaryPoint center = stationary_point(fk);
  const double fc = eval(fk, center.x);
  Eigen::SelfAdjointEigenSolver<CMat> es(fk.A, Eigen::EigenvaluesOnly);
  const double radius = std::sqrt(std::max(fc, 0.0) / es.eigenvalues().minCoeff());

  RVec lo(n), hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lo(i) = center.x(i).real() - radius;
    hi(i) = center.x(i).real() + radius;
  }
  PrimalResult best;
  const int pts = spec.points_per_dim;
  for (int round = 0; round <= spec.refine_rounds; ++round) {
    RVec step = (hi - lo) / static_cast<double>(pts - 1);
    std::vector<int> idx(static_cast<size_t>(n), 0);
    while (true) {
      CVec x(n);
      for (Eigen::Index i = 0; i < n; ++i)
        x(i) = cxd(lo(i) + step(i) * idx[static_cast<size_t>(i)], 0.0);
      if (is_feasible(p, x, spec.residual_tol)) {
        const double v = eval(p.objective, x);
        if (!best.found || v > best.value) {
          best.found = true;
          best.value = v;
          best.argmax = x;
        }
      }
      Eigen::Index carry = 0;
      while (carry < n) {
        if (++idx[static_cast<size_t>(carry)] < pts) break;
        idx[static_cast<size_t>(carry)] = 0;
        ++carry;
      }
      if (carry == n) break;
    }
    if (!best.found) break;
    for (Eigen::Index i = 0; i < n; ++i) {  // refine around the incumbent
      const double pad = 2.0 * step(i);
      lo(i) = best.argmax(i).real() - pad;
      hi(i) = best.argmax(i).real() + pad;
    }
  }
  if (!best.found) throw std::runtime_error("brute_force_primal_grid: no feasible grid point");
  return best;
}

PrimalResult brute_force_primal_binary(const SCQP& p) {
  const Eigen::Index n = p.objective.dim();
  if (n > 20) throw std::invalid_argument("brute_force_primal_binary: n too large");
  PrimalResult best;
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    CVec x = CVec::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k)
      if (mask & (1ul << k)) x(k) = 1.0;
    if (!is_feasible(p, x)) continue;
    const double v = eval(p.objective, x);
    if (!best.found || v > best.value) {
      best.found = true;
      best.value = v;
      best.argmax = x;
    }
  }
  if (!best.found) throw std::runtime_error("brute_force_primal_binary: no feasible indicator");
  return best;
}

}  // namespace scqp
