#include "scqp/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "scqp/dual.hpp"

namespace scqp {

namespace {

// Real parametrization of a Hermitian N x N matrix: each coordinate is a basis
// matrix with at most two elementary entries.
struct BasisEntry {
  cxd coeff;
  Eigen::Index r;
  Eigen::Index c;
};
using BasisMatrix = std::vector<BasisEntry>;

std::vector<BasisMatrix> hermitian_basis(Eigen::Index N) {
  std::vector<BasisMatrix> basis;
  for (Eigen::Index i = 0; i < N; ++i) {
    basis.push_back({{cxd(1.0, 0.0), i, i}});
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = i + 1; j < N; ++j) {
      basis.push_back({{cxd(1.0, 0.0), i, j}, {cxd(1.0, 0.0), j, i}});
      basis.push_back({{cxd(0.0, 1.0), i, j}, {cxd(0.0, -1.0), j, i}});
    }
  }
  return basis;
}

CMat assemble(const std::vector<BasisMatrix>& basis, const Eigen::VectorXd& theta,
              Eigen::Index N) {
  CMat B = CMat::Zero(N, N);
  for (size_t k = 0; k < basis.size(); ++k) {
    for (const BasisEntry& e : basis[k]) B(e.r, e.c) += theta(static_cast<Eigen::Index>(k)) * e.coeff;
  }
  return B;
}

Eigen::VectorXd coordinates(const std::vector<BasisMatrix>& basis, const CMat& B) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(basis.size()));
  for (size_t k = 0; k < basis.size(); ++k) {
    const BasisEntry& e = basis[k].front();
    const cxd v = B(e.r, e.c);
    theta(static_cast<Eigen::Index>(k)) =
        (std::abs(e.coeff.imag()) > 0.5) ? v.imag() : v.real();
  }
  return theta;
}

// tr(H E_k) for Hermitian H.
double trace_with(const CMat& H, const BasisMatrix& E) {
  cxd t(0.0, 0.0);
  for (const BasisEntry& e : E) t += e.coeff * H(e.c, e.r);
  return t.real();
}

// tr(P E_k P E_l) for Hermitian P.
double trace_pair(const CMat& P, const BasisMatrix& Ek, const BasisMatrix& El) {
  cxd t(0.0, 0.0);
  for (const BasisEntry& a : Ek) {
    for (const BasisEntry& b : El) {
      t += a.coeff * b.coeff * P(a.c, b.r) * P(b.c, a.r);
    }
  }
  return t.real();
}

}  // namespace

HomogenizedProgram homogenize(const SCQP& p) {
  const Eigen::Index n = p.objective.dim();
  HomogenizedProgram h;
  h.n_plus_1 = n + 1;
  auto block = [n](const QuadraticForm& q) {
    CMat H(n + 1, n + 1);
    H.topLeftCorner(n, n) = -q.A;
    H.topRightCorner(n, 1) = q.s;
    H.bottomLeftCorner(1, n) = q.s.adjoint();
    H(n, n) = q.c;
    return H;
  };
  h.H_o = block(p.objective);
  for (const SensedConstraint& c : p.constraints) {
    h.H.push_back(block(c.form));
    h.senses.push_back(c.sense);
  }
  return h;
}

SchurReport schur_psd_test(const CMat& A, const CMat& B, const CMat& C, const CMat& D,
                           double tol) {
  const Eigen::Index na = A.rows(), nd = D.rows();
  CMat M(na + nd, na + nd);
  M.topLeftCorner(na, na) = A;
  M.topRightCorner(na, nd) = B;
  M.bottomLeftCorner(nd, na) = C;
  M.bottomRightCorner(nd, nd) = D;
  if ((M - M.adjoint()).norm() > 1e-10 * (1.0 + M.norm())) {
    throw std::invalid_argument("schur_psd_test: assembled block matrix not Hermitian");
  }
  const double scale = 1.0 + M.norm();

  SchurReport rep;
  Eigen::SelfAdjointEigenSolver<CMat> em((M + M.adjoint()) / 2.0);
  rep.min_eig_direct = em.eigenvalues()(0);

  Eigen::SelfAdjointEigenSolver<CMat> ea((A + A.adjoint()) / 2.0);
  Eigen::SelfAdjointEigenSolver<CMat> ed((D + D.adjoint()) / 2.0);
  const bool a_invertible =
      na > 0 && ea.eigenvalues().cwiseAbs().minCoeff() > tol * (1.0 + A.norm());
  const bool d_invertible =
      nd > 0 && ed.eigenvalues().cwiseAbs().minCoeff() > tol * (1.0 + D.norm());

  if (a_invertible) {
    const CMat S = D - C * A.inverse() * B;
    Eigen::SelfAdjointEigenSolver<CMat> es((S + S.adjoint()) / 2.0);
    rep.min_eig_complement = es.eigenvalues()(0);
    rep.psd = ea.eigenvalues()(0) > 0.0 && rep.min_eig_complement >= -tol * scale;
  } else if (d_invertible) {
    const CMat S = A - B * D.inverse() * C;
    Eigen::SelfAdjointEigenSolver<CMat> es((S + S.adjoint()) / 2.0);
    rep.min_eig_complement = es.eigenvalues()(0);
    rep.psd = ed.eigenvalues()(0) > 0.0 && rep.min_eig_complement >= -tol * scale;
  } else {
    rep.used_fallback = true;
    rep.min_eig_complement = rep.min_eig_direct;
    rep.psd = rep.min_eig_direct >= -tol * scale;
  }
  return rep;
}

SdpSolution solve_sdp_relaxation_tiny(const SCQP& p) {
  const Eigen::Index n = p.objective.dim();
  if (n > 12) {
    throw std::invalid_argument("solve_sdp_relaxation_tiny: dense oracle limited to n <= 12");
  }
  const HomogenizedProgram h = homogenize(p);
  const Eigen::Index N = h.n_plus_1;
  const std::vector<BasisMatrix> basis = hermitian_basis(N);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());

  std::vector<const CMat*> ge_rows;
  std::vector<const CMat*> eq_rows;
  for (size_t j = 0; j < h.H.size(); ++j) {
    (h.senses[j] == Sense::GE ? ge_rows : eq_rows).push_back(&h.H[j]);
  }

  // Constant per-coordinate traces.
  Eigen::VectorXd c_obj(m);
  for (Eigen::Index k = 0; k < m; ++k) c_obj(k) = trace_with(h.H_o, basis[static_cast<size_t>(k)]);
  std::vector<Eigen::VectorXd> g_rows;
  for (const CMat* H : ge_rows) {
    Eigen::VectorXd v(m);
    for (Eigen::Index k = 0; k < m; ++k) v(k) = trace_with(*H, basis[static_cast<size_t>(k)]);
    g_rows.push_back(v);
  }
  const Eigen::Index p_eq = static_cast<Eigen::Index>(eq_rows.size()) + 1;
  Eigen::MatrixXd Aeq(p_eq, m);
  Eigen::VectorXd beq(p_eq);
  for (Eigen::Index r = 0; r + 1 < p_eq; ++r) {
    for (Eigen::Index k = 0; k < m; ++k) {
      Aeq(r, k) = trace_with(*eq_rows[static_cast<size_t>(r)], basis[static_cast<size_t>(k)]);
    }
    beq(r) = 0.0;
  }
  // Corner normalization B_{N,N} = 1: the diagonal coordinate with index N-1.
  Aeq.row(p_eq - 1).setZero();
  Aeq(p_eq - 1, N - 1) = 1.0;
  beq(p_eq - 1) = 1.0;

  // Interior starting point from the feasible witnesses.
  auto build_start = [&](double eps) {
    CMat B0 = CMat::Zero(N, N);
    const size_t K = p.feasible_witnesses.size();
    if (K == 0) {
      B0.setZero();
      B0(N - 1, N - 1) = 1.0;
    } else {
      for (const CVec& y : p.feasible_witnesses) {
        CVec yt(N);
        yt.head(N - 1) = y;
        yt(N - 1) = 1.0;
        B0 += (yt * yt.adjoint()) / static_cast<double>(K);
      }
    }
    for (Eigen::Index i = 0; i + 1 < N; ++i) B0(i, i) += eps;
    return B0;
  };
  double diag_scale = 1.0;
  for (const CVec& y : p.feasible_witnesses) diag_scale = std::max(diag_scale, y.squaredNorm());
  CMat B0;
  bool interior = false;
  for (double eps = 1e-2 * diag_scale; eps >= 1e-10 * diag_scale; eps *= 0.1) {
    B0 = build_start(eps);
    Eigen::SelfAdjointEigenSolver<CMat> eb(B0);
    if (eb.eigenvalues()(0) <= 0.0) continue;
    interior = true;
    for (const CMat* H : ge_rows) {
      if (std::real((H->adjoint() * B0).trace()) <= 0.0) {
        interior = false;
        break;
      }
    }
    if (interior) break;
  }
  SdpSolution out;
  if (!interior) {
    out.converged = false;
    out.value = -std::numeric_limits<double>::infinity();
    out.B = build_start(0.0);
    return out;
  }

  Eigen::VectorXd theta = coordinates(basis, B0);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(p_eq);
  const double vscale = 1.0 + std::abs(c_obj.dot(theta));
  double mu = vscale;
  double mu_last = mu;

  auto interior_ok = [&](const Eigen::VectorXd& th, CMat& B, Eigen::VectorXd& tg) {
    B = assemble(basis, th, N);
    Eigen::SelfAdjointEigenSolver<CMat> eb(B);
    if (eb.eigenvalues()(0) <= 0.0) return false;
    tg.resize(static_cast<Eigen::Index>(g_rows.size()));
    for (size_t g = 0; g < g_rows.size(); ++g) {
      tg(static_cast<Eigen::Index>(g)) = g_rows[g].dot(th);
      if (tg(static_cast<Eigen::Index>(g)) <= 0.0) return false;
    }
    return true;
  };

  for (int stage = 0; stage < 14 && mu > 1e-10 * vscale; ++stage, mu /= 10.0) {
    mu_last = mu;
    for (int newton = 0; newton < 50; ++newton) {
      const CMat B = assemble(basis, theta, N);
      const CMat P = B.inverse();
      Eigen::VectorXd tg(static_cast<Eigen::Index>(g_rows.size()));
      for (size_t g = 0; g < g_rows.size(); ++g) {
        tg(static_cast<Eigen::Index>(g)) = g_rows[g].dot(theta);
      }

      Eigen::VectorXd grad = -c_obj;
      for (Eigen::Index k = 0; k < m; ++k) {
        grad(k) -= mu * trace_with(P, basis[static_cast<size_t>(k)]);
      }
      for (size_t g = 0; g < g_rows.size(); ++g) {
        grad -= (mu / tg(static_cast<Eigen::Index>(g))) * g_rows[g];
      }
      Eigen::MatrixXd Hs(m, m);
      for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = k; l < m; ++l) {
          double v = mu * trace_pair(P, basis[static_cast<size_t>(k)], basis[static_cast<size_t>(l)]);
          for (size_t g = 0; g < g_rows.size(); ++g) {
            const double t = tg(static_cast<Eigen::Index>(g));
            v += mu * g_rows[g](k) * g_rows[g](l) / (t * t);
          }
          Hs(k, l) = v;
          Hs(l, k) = v;
        }
      }

      const Eigen::VectorXd r_pri = Aeq * theta - beq;
      const Eigen::VectorXd r_dual = grad + Aeq.transpose() * nu;
      const double rnorm = std::sqrt(r_dual.squaredNorm() + r_pri.squaredNorm());
      if (rnorm <= 1e-9 * vscale * (1.0 + mu / vscale)) break;

      Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(m + p_eq, m + p_eq);
      KKT.topLeftCorner(m, m) = Hs;
      KKT.topRightCorner(m, p_eq) = Aeq.transpose();
      KKT.bottomLeftCorner(p_eq, m) = Aeq;
      Eigen::VectorXd rhs(m + p_eq);
      rhs.head(m) = -grad;
      rhs.tail(p_eq) = beq - Aeq * theta;
      const Eigen::VectorXd sol = KKT.fullPivLu().solve(rhs);
      const Eigen::VectorXd dtheta = sol.head(m);
      const Eigen::VectorXd nu_plus = sol.tail(p_eq);

      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Eigen::VectorXd th_try = theta + t * dtheta;
        CMat B_try;
        Eigen::VectorXd tg_try;
        if (interior_ok(th_try, B_try, tg_try)) {
          const CMat P_try = B_try.inverse();
          Eigen::VectorXd grad_try = -c_obj;
          for (Eigen::Index k = 0; k < m; ++k) {
            grad_try(k) -= mu * trace_with(P_try, basis[static_cast<size_t>(k)]);
          }
          for (size_t g = 0; g < g_rows.size(); ++g) {
            grad_try -= (mu / tg_try(static_cast<Eigen::Index>(g))) * g_rows[g];
          }
          const Eigen::VectorXd nu_try = nu + t * (nu_plus - nu);
          const double rn_try = std::sqrt((grad_try + Aeq.transpose() * nu_try).squaredNorm() +
                                          (Aeq * th_try - beq).squaredNorm());
          if (rn_try <= (1.0 - 0.25 * t) * rnorm) {
            theta = th_try;
            nu = nu_try;
            moved = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!moved) break;  // no further progress at this centering
    }
  }

  // Convergence is judged at the final iterate: equalities must hold tightly
  // and the centering residual must sit at or below the attainable noise floor
  // (the Hessian scale grows like 1/mu as B approaches the low-rank optimum).
  {
    const CMat B = assemble(basis, theta, N);
    const CMat P = B.inverse();
    Eigen::VectorXd grad = -c_obj;
    for (Eigen::Index k = 0; k < m; ++k) {
      grad(k) -= mu_last * trace_with(P, basis[static_cast<size_t>(k)]);
    }
    for (size_t g = 0; g < g_rows.size(); ++g) {
      grad -= (mu_last / g_rows[g].dot(theta)) * g_rows[g];
    }
    const double r_dual = (grad + Aeq.transpose() * nu).norm();
    const double r_pri = (Aeq * theta - beq).norm();
    out.converged = r_dual <= 1e-6 * vscale && r_pri <= 1e-8 * (1.0 + beq.norm());
  }

  out.B = assemble(basis, theta, N);
  out.value = c_obj.dot(theta);
  out.barrier_gap = mu_last * static_cast<double>(N + static_cast<Eigen::Index>(g_rows.size()));
  Eigen::SelfAdjointEigenSolver<CMat> eb(out.B);
  const double wmax = std::max(eb.eigenvalues()(N - 1), 0.0);
  out.rank_eps = 0;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (eb.eigenvalues()(i) > 1e-6 * std::max(wmax, 1e-300)) ++out.rank_eps;
  }
  out.extracted_x = extract_rank1(out.B, 1e-6);
  return out;
}

std::optional<CVec> extract_rank1(const CMat& B, double tol) {
  const Eigen::Index N = B.rows();
  Eigen::SelfAdjointEigenSolver<CMat> es((B + B.adjoint()) / 2.0);
  const double l1 = es.eigenvalues()(N - 1);
  const double l2 = (N > 1) ? es.eigenvalues()(N - 2) : 0.0;
  if (!(l1 > 0.0) || l2 > tol * l1) return std::nullopt;
  const CVec v = std::sqrt(l1) * es.eigenvectors().col(N - 1);
  if (std::abs(v(N - 1)) < tol * v.norm()) return std::nullopt;  // corner unusable
  return CVec((v.head(N - 1) / v(N - 1)).eval());
}

EquivalenceReport check_equivalence(const SCQP& p, double tol) {
  EquivalenceReport rep;
  const DualResult dr = minimize_dual(p);
  const SdpSolution sdp = solve_sdp_relaxation_tiny(p);
  rep.dual_value = dr.eval.value;
  rep.sdp_value = sdp.value;
  rep.schur_value = schur_dual_value(p, dr.phi_star);
  rep.gap = std::abs(rep.dual_value - rep.sdp_value);
  const double s = 1.0 + std::abs(rep.dual_value);
  rep.pass = rep.gap <= tol * s && std::abs(rep.schur_value - rep.dual_value) <= tol * s;
  rep.rank = sdp.rank_eps;
  rep.extracted_x = sdp.extracted_x;
  return rep;
}

}  // namespace scqp
