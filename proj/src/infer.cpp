#include "scqp/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scqp {

InferredPotential infer_potential(const CVec& x, const ScatteringModel& model,
                                  cxd chi_max_for_singular) {
  if (x.size() != model.n) throw std::invalid_argument("infer_potential: size mismatch");
  const CVec den = model.G0 * x + model.e_i;
  const double dtol =
      1e-12 * (model.e_i.lpNorm<Eigen::Infinity>() + (model.G0 * x).lpNorm<Eigen::Infinity>());
  InferredPotential out;
  out.chi_raw = CVec::Zero(model.n);
  for (Eigen::Index k = 0; k < model.n; ++k) {
    if (std::abs(den(k)) < dtol) {
      if (std::abs(x(k)) < dtol) {
        out.chi_raw(k) = cxd(0.0, 0.0);  // vacuum cell
      } else {
        out.chi_raw(k) = chi_max_for_singular;
        out.singular_cells.push_back(k);
      }
    } else {
      out.chi_raw(k) = x(k) / den(k);
    }
  }
  return out;
}

CVec project_potential(const CVec& chi_raw, const MaterialSet& mat) {
  if (mat.chi_max == cxd(0.0, 0.0)) {
    throw std::invalid_argument("project_potential: chi_max must be nonzero");
  }
  const double m2 = std::norm(mat.chi_max);
  CVec out(chi_raw.size());
  for (Eigen::Index k = 0; k < chi_raw.size(); ++k) {
    // Parameter of the orthogonal projection onto the line through chi_max.
    const double t = std::real(chi_raw(k) * std::conj(mat.chi_max)) / m2;
    if (mat.admissible == Admissible::GreyScale) {
      out(k) = std::clamp(t, 0.0, 1.0) * mat.chi_max;
    } else {
      // Nearer of {0, chi_max}; equidistant resolves to vacuum.
      out(k) = (std::abs(chi_raw(k) - mat.chi_max) < std::abs(chi_raw(k)))
                   ? mat.chi_max
                   : cxd(0.0, 0.0);
    }
  }
  return out;
}

namespace {

RVec delta_residuals_impl(const CVec& x, const CVec& chi_probe, const ScatteringModel& model,
                          bool strict) {
  if (x.size() != model.n || chi_probe.size() != model.n) {
    throw std::invalid_argument("delta_residuals: size mismatch");
  }
  const double stol = 1e-12 * std::max(x.lpNorm<Eigen::Infinity>(), 1e-300);
  const InferredPotential implied = infer_potential(x, model, cxd(0.0, 0.0));
  CVec d = CVec::Zero(model.n);
  for (Eigen::Index k = 0; k < model.n; ++k) {
    if (std::abs(x(k)) < stol) continue;  // off the support of x
    if (chi_probe(k) == cxd(0.0, 0.0) || implied.chi_raw(k) == cxd(0.0, 0.0)) {
      if (strict) {
        throw std::invalid_argument(
            "delta_residuals: potential undefined on the support of x");
      }
      continue;  // diagnostic mode: skip cells without a defined inverse
    }
    d(k) = 1.0 / chi_probe(k) - 1.0 / implied.chi_raw(k);
  }
  RVec r(static_cast<Eigen::Index>(model.witnesses.size()));
  const CVec Ddx = d.cwiseProduct(x);
  for (size_t j = 0; j < model.witnesses.size(); ++j) {
    // x^dag [Q D]^s x = 2 Re[x^dag Q D x] with D diagonal on supp(x).
    r(static_cast<Eigen::Index>(j)) = 2.0 * std::real(x.dot(model.witnesses[j] * Ddx));
  }
  return r;
}

}  // namespace

RVec delta_residuals(const CVec& x, const CVec& chi_probe, const ScatteringModel& model) {
  return delta_residuals_impl(x, chi_probe, model, true);
}

Resimulated resimulate(const CVec& chi, const ScatteringModel& model) {
  if (chi.size() != model.n) throw std::invalid_argument("resimulate: size mismatch");
  const CMat X = chi.asDiagonal();
  const CMat M = CMat::Identity(model.n, model.n) - model.G0 * X;
  Eigen::FullPivLU<CMat> lu(M);
  Resimulated out;
  // Reciprocal condition estimate from the pivot extremes of the LU factor.
  const auto& U = lu.matrixLU();
  double pmax = 0.0, pmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const double a = std::abs(U(i, i));
    pmax = std::max(pmax, a);
    pmin = std::min(pmin, a);
  }
  out.rcond = (pmax > 0.0) ? pmin / pmax : 0.0;
  if (!lu.isInvertible() || out.rcond < 1e-14) {
    throw std::runtime_error("resimulate: scattering system singular (rcond ~ " +
                             std::to_string(out.rcond) + ")");
  }
  const CVec e_t = lu.solve(model.e_i);
  out.x_phys = X * e_t;
  out.objective = 0.5 * std::imag(model.e_i.dot(out.x_phys));
  return out;
}

InferredStructure infer_structure(const CVec& x, const ScatteringModel& model,
                                  const MaterialSet& mat) {
  InferredStructure s;
  const InferredPotential ip = infer_potential(x, model, mat.chi_max);
  s.chi_raw = ip.chi_raw;
  s.singular_cells = ip.singular_cells;
  s.chi_proj = project_potential(s.chi_raw, mat);
  s.residuals = delta_residuals_impl(x, s.chi_proj, model, false);
  s.objective_resim = resimulate(s.chi_proj, model).objective;
  return s;
}

}  // namespace scqp
