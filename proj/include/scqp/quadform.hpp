#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace scqp {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// f(x) = 2 Re[s^dag x] - x^dag A x + c with A Hermitian.
struct QuadraticForm {
  CMat A;
  CVec s;
  double c = 0.0;

  Eigen::Index dim() const { return s.size(); }
};

struct PsdReport {
  double min_eig = 0.0;
  bool is_psd = false;
  double tol = 0.0;
};

struct StationaryPoint {
  CVec x;
  bool in_range = true;
};

// M + M^dag.
CMat symmetrize(const CMat& M);

bool is_hermitian(const CMat& M, double tol = 1e-12);

// Force exact Hermitian storage: (M + M^dag)/2.
CMat hermitian_part(const CMat& M);

QuadraticForm make_form(CMat A, CVec s, double c);

double eval(const QuadraticForm& q, const CVec& x);

QuadraticForm negate(const QuadraticForm& q);

// (sum_j phi_j A_j, sum_j phi_j s_j, sum_j phi_j c_j).
QuadraticForm composite(const std::vector<QuadraticForm>& constraints, const RVec& phi);

// objective + composite(constraints, phi); offset includes the objective's c.
QuadraticForm lagrangian(const QuadraticForm& objective,
                         const std::vector<QuadraticForm>& constraints, const RVec& phi);

PsdReport psd_check(const CMat& M, double tol);

// Maximizer A^+ s of a PSD form via eigendecomposition; eigenvalues below
// rank_tol * max_eig are treated as exact zeros. in_range is false when s has
// a kernel component exceeding rank_tol * ||s|| (the form is then unbounded
// above along that direction).
StationaryPoint stationary_point(const QuadraticForm& q, double rank_tol = 1e-10);

}  // namespace scqp
