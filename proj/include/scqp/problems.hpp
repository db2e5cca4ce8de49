#pragma once

#include <random>
#include <string>
#include <vector>

#include "scqp/problem.hpp"

namespace scqp {

// Parameter bundle for the builtin problem registry; unrelated fields are
// ignored by problems that do not use them.
struct BuiltinRequest {
  std::string name;                // "ball" | "fig2a" | "subset-sum" | "helmholtz1d"
  std::vector<long> set = {1, 2};  // subset-sum element list
  long target = 3;                 // subset-sum target
  Eigen::Index cells = 32;         // helmholtz1d grid cells
  double dipole_pos = -0.5;        // helmholtz1d source position
};

std::vector<std::string> builtin_names();

// Every builtin ships with an embedded oracle (analytic value or brute-force
// enumeration) re-checked on load; a violation throws logic_error.
SCQP load_builtin(const BuiltinRequest& req);
SCQP load_builtin(const std::string& name);

// Seeded random instance for property suites: row 0 is a positive-definite
// compactness row, the rest are indefinite GE rows (EQ with probability
// eq_prob), all strictly satisfied at a hidden witness point that is kept in
// feasible_witnesses.
SCQP random_scqp(std::mt19937_64& rng, Eigen::Index n_max = 4, int j_max = 6,
                 double eq_prob = 0.0);

}  // namespace scqp
