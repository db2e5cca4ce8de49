#pragma once

#include <Eigen/Dense>

namespace scqp {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

// minimize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper.
// Lower bounds must be finite; upper bounds may be +infinity.
struct LinearProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LpSolution {
  Eigen::VectorXd x;
  double value = 0.0;
  LpStatus status = LpStatus::IterLimit;
  int iterations = 0;
};

// Dense two-phase primal simplex with Bland's rule (deterministic, no cycling).
LpSolution solve_lp(const LinearProgram& lp, int max_iters = 50000);

}  // namespace scqp
