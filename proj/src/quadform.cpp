#include "scqp/quadform.hpp"

#include <stdexcept>

namespace scqp {

CMat symmetrize(const CMat& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("symmetrize: matrix must be square");
  return M + M.adjoint();
}

bool is_hermitian(const CMat& M, double tol) {
  if (M.rows() != M.cols()) return false;
  double scale = std::max(1.0, M.norm());
  return (M - M.adjoint()).norm() <= tol * scale;
}

CMat hermitian_part(const CMat& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("hermitian_part: matrix must be square");
  return 0.5 * (M + M.adjoint());
}

QuadraticForm make_form(CMat A, CVec s, double c) {
  if (A.rows() != A.cols()) throw std::invalid_argument("make_form: A must be square");
  if (A.rows() != s.size()) throw std::invalid_argument("make_form: A and s dimensions differ");
  if (!A.allFinite() || !s.allFinite() || !std::isfinite(c))
    throw std::invalid_argument("make_form: non-finite entries");
  QuadraticForm q;
  q.A = hermitian_part(A);
  q.s = std::move(s);
  q.c = c;
  return q;
}

double eval(const QuadraticForm& q, const CVec& x) {
  if (x.size() != q.dim()) throw std::invalid_argument("eval: dimension mismatch");
  const double lin = 2.0 * q.s.dot(x).real();
  const double quad = x.dot(q.A * x).real();
  return lin - quad + q.c;
}

QuadraticForm negate(const QuadraticForm& q) {
  QuadraticForm r;
  r.A = -q.A;
  r.s = -q.s;
  r.c = -q.c;
  return r;
}

QuadraticForm composite(const std::vector<QuadraticForm>& constraints, const RVec& phi) {
  if (static_cast<Eigen::Index>(constraints.size()) != phi.size())
    throw std::invalid_argument("composite: multiplier count differs from constraint count");
  if (constraints.empty()) throw std::invalid_argument("composite: empty constraint list");
  const Eigen::Index n = constraints.front().dim();
  QuadraticForm out;
  out.A = CMat::Zero(n, n);
  out.s = CVec::Zero(n);
  out.c = 0.0;
  for (size_t j = 0; j < constraints.size(); ++j) {
    const QuadraticForm& q = constraints[j];
    if (q.dim() != n) throw std::invalid_argument("composite: mixed dimensions");
    const double w = phi(static_cast<Eigen::Index>(j));
    out.A += w * q.A;
    out.s += w * q.s;
    out.c += w * q.c;
  }
  return out;
}

QuadraticForm lagrangian(const QuadraticForm& objective,
                         const std::vector<QuadraticForm>& constraints, const RVec& phi) {
  QuadraticForm out = composite(constraints, phi);
  if (objective.dim() != out.dim()) throw std::invalid_argument("lagrangian: dimension mismatch");
  out.A += objective.A;
  out.s += objective.s;
  out.c += objective.c;
  return out;
}

PsdReport psd_check(const CMat& M, double tol) {
  if (tol < 0) throw std::invalid_argument("psd_check: negative tolerance");
  if (!M.allFinite()) throw std::invalid_argument("psd_check: non-finite entries");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(M), Eigen::EigenvaluesOnly);
  PsdReport rep;
  rep.min_eig = es.eigenvalues().minCoeff();
  rep.tol = tol;
  rep.is_psd = rep.min_eig >= -tol;
  return rep;
}

StationaryPoint stationary_point(const QuadraticForm& q, double rank_tol) {
  Eigen::SelfAdjointEigenSolver<CMat> es(q.A);
  const RVec& w = es.eigenvalues();
  const double wmax = w.size() ? std::max(0.0, w.maxCoeff()) : 0.0;
  const double cut = rank_tol * std::max(wmax, 1e-300);
  if (w.minCoeff() < -cut * 10 - 1e-14 * std::max(1.0, wmax))
    throw std::runtime_error("stationary_point: bilinear part is not positive semidefinite");
  const CVec y = es.eigenvectors().adjoint() * q.s;
  const double snorm = q.s.norm();
  CVec z = CVec::Zero(w.size());
  bool in_range = true;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > cut) {
      z(i) = y(i) / w(i);
    } else if (std::abs(y(i)) > rank_tol * snorm) {
      in_range = false;
    }
  }
  StationaryPoint sp;
  sp.x = es.eigenvectors() * z;
  sp.in_range = in_range;
  return sp;
}

}  // namespace scqp
