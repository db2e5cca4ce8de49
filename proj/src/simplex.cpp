#include "scqp/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace scqp {

namespace {
constexpr double kPivotTol = 1e-11;
}

LpSolution solve_lp(const LinearProgram& lp, int max_iters) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  const Index nv = lp.c.size();
  if (lp.lower.size() != nv || lp.upper.size() != nv) {
    throw std::invalid_argument("solve_lp: bound vectors must match variable count");
  }
  for (Index i = 0; i < nv; ++i) {
    if (!std::isfinite(lp.lower(i))) {
      throw std::invalid_argument("solve_lp: lower bounds must be finite");
    }
    if (lp.upper(i) < lp.lower(i)) {
      LpSolution bad;
      bad.status = LpStatus::Infeasible;
      return bad;
    }
  }
  if ((lp.A_ub.rows() > 0 && lp.A_ub.cols() != nv) ||
      (lp.A_eq.rows() > 0 && lp.A_eq.cols() != nv)) {
    throw std::invalid_argument("solve_lp: constraint matrix width mismatch");
  }

  // Shift to y = x - lower >= 0 and fold finite upper bounds into <=-rows.
  std::vector<VectorXd> urows;
  std::vector<double> urhs;
  for (Index r = 0; r < lp.A_ub.rows(); ++r) {
    urows.push_back(lp.A_ub.row(r).transpose());
    urhs.push_back(lp.b_ub(r) - lp.A_ub.row(r).dot(lp.lower));
  }
  for (Index i = 0; i < nv; ++i) {
    if (std::isfinite(lp.upper(i))) {
      VectorXd e = VectorXd::Zero(nv);
      e(i) = 1.0;
      urows.push_back(e);
      urhs.push_back(lp.upper(i) - lp.lower(i));
    }
  }
  std::vector<VectorXd> erows;
  std::vector<double> erhs;
  for (Index r = 0; r < lp.A_eq.rows(); ++r) {
    erows.push_back(lp.A_eq.row(r).transpose());
    erhs.push_back(lp.b_eq(r) - lp.A_eq.row(r).dot(lp.lower));
  }

  Index mu = static_cast<Index>(urows.size());
  Index m = mu + static_cast<Index>(erows.size());
  const Index nslack = mu;
  const Index nstruct = nv + nslack;
  const Index ncol = nstruct + m;  // artificial columns allocated worst-case

  MatrixXd T = MatrixXd::Zero(m, ncol + 1);
  std::vector<int> basis(static_cast<size_t>(m), -1);
  for (Index r = 0; r < mu; ++r) {
    T.block(r, 0, 1, nv) = urows[static_cast<size_t>(r)].transpose();
    T(r, nv + r) = 1.0;
    T(r, ncol) = urhs[static_cast<size_t>(r)];
  }
  for (Index r = 0; r < m - mu; ++r) {
    T.block(mu + r, 0, 1, nv) = erows[static_cast<size_t>(r)].transpose();
    T(mu + r, ncol) = erhs[static_cast<size_t>(r)];
  }
  double bscale = 1.0;
  for (Index r = 0; r < m; ++r) {
    if (T(r, ncol) < 0.0) T.row(r) *= -1.0;
    bscale = std::max(bscale, T(r, ncol));
  }
  for (Index r = 0; r < mu; ++r) {
    if (T(r, nv + r) > 0.5) basis[static_cast<size_t>(r)] = static_cast<int>(nv + r);
  }
  Index nart = 0;
  for (Index r = 0; r < m; ++r) {
    if (basis[static_cast<size_t>(r)] < 0) {
      T(r, nstruct + nart) = 1.0;
      basis[static_cast<size_t>(r)] = static_cast<int>(nstruct + nart);
      ++nart;
    }
  }

  LpSolution out;
  int iters = 0;

  auto pivot = [&](VectorXd& rc, Index row, Index col) {
    T.row(row) /= T(row, col);
    for (Index r = 0; r < m; ++r) {
      if (r != row && std::abs(T(r, col)) > 0.0) {
        T.row(r) -= T(r, col) * T.row(row);
      }
    }
    if (std::abs(rc(col)) > 0.0) rc -= rc(col) * T.row(row).transpose();
    basis[static_cast<size_t>(row)] = static_cast<int>(col);
  };

  // Returns 0 optimal, 2 unbounded, 3 iteration limit.
  auto run = [&](VectorXd& rc, double enter_tol, bool art_may_enter) -> int {
    while (iters < max_iters) {
      Index je = -1;
      const Index jmax = art_may_enter ? ncol : nstruct;
      for (Index j = 0; j < jmax; ++j) {
        if (rc(j) < -enter_tol) {
          je = j;
          break;
        }
      }
      if (je < 0) return 0;
      Index rl = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m; ++r) {
        if (T(r, je) > kPivotTol) {
          const double ratio = T(r, ncol) / T(r, je);
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 &&
               (rl < 0 || basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(rl)]))) {
            best = ratio;
            rl = r;
          }
        }
      }
      if (rl < 0) return 2;
      pivot(rc, rl, je);
      ++iters;
    }
    return 3;
  };

  auto reduced_costs = [&](const VectorXd& cost) {
    VectorXd rc = VectorXd::Zero(ncol + 1);
    rc.head(ncol) = cost;
    for (Index r = 0; r < m; ++r) {
      const double cb = cost(basis[static_cast<size_t>(r)]);
      if (cb != 0.0) rc -= cb * T.row(r).transpose();
    }
    return rc;
  };

  // Phase 1: drive artificial variables to zero.
  if (nart > 0) {
    VectorXd c1 = VectorXd::Zero(ncol);
    c1.segment(nstruct, nart).setOnes();
    VectorXd rc = reduced_costs(c1);
    const int st = run(rc, 1e-9, true);
    out.iterations = iters;
    if (st == 3) {
      out.status = LpStatus::IterLimit;
      return out;
    }
    const double z1 = -rc(ncol);
    if (z1 > 1e-8 * bscale) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Pivot residual artificials out of the basis; drop rows that turn out
    // to be linearly dependent.
    std::vector<Index> keep;
    for (Index r = 0; r < m; ++r) {
      if (basis[static_cast<size_t>(r)] >= static_cast<int>(nstruct)) {
        Index jj = -1;
        for (Index j = 0; j < nstruct; ++j) {
          if (std::abs(T(r, j)) > 1e-9) {
            jj = j;
            break;
          }
        }
        if (jj >= 0) {
          pivot(rc, r, jj);
          keep.push_back(r);
        }
        // else: redundant row, excluded below
      } else {
        keep.push_back(r);
      }
    }
    if (static_cast<Index>(keep.size()) < m) {
      MatrixXd T2(static_cast<Index>(keep.size()), ncol + 1);
      std::vector<int> b2;
      for (Index k = 0; k < static_cast<Index>(keep.size()); ++k) {
        T2.row(k) = T.row(keep[static_cast<size_t>(k)]);
        b2.push_back(basis[static_cast<size_t>(keep[static_cast<size_t>(k)])]);
      }
      T = std::move(T2);
      basis = std::move(b2);
      m = static_cast<Index>(basis.size());
    }
  }

  // Phase 2 on the real objective.
  VectorXd c2 = VectorXd::Zero(ncol);
  c2.head(nv) = lp.c;
  double cscale = 1.0;
  for (Index i = 0; i < nv; ++i) cscale = std::max(cscale, std::abs(lp.c(i)));
  VectorXd rc = reduced_costs(c2);
  const int st = run(rc, 1e-9 * cscale, false);
  out.iterations = iters;
  if (st == 3) {
    out.status = LpStatus::IterLimit;
    return out;
  }
  if (st == 2) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  VectorXd y = VectorXd::Zero(nv);
  for (Index r = 0; r < m; ++r) {
    const int b = basis[static_cast<size_t>(r)];
    if (b >= 0 && b < static_cast<int>(nv)) y(b) = T(r, ncol);
  }
  out.x = y + lp.lower;
  out.value = lp.c.dot(out.x);
  out.status = LpStatus::Optimal;
  return out;
}

}  // namespace scqp
