#pragma once

#include <Eigen/Dense>

namespace d2d {

// min c'x  subject to  A_eq x = b_eq,  A_le x <= b_le,  0 <= x <= upper.
// upper entries may be +infinity.
struct LpProblem {
  Eigen::VectorXd cost;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_le;
  Eigen::VectorXd b_le;
  Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;  // structural variables only
  double objective = 0.0;
  long iterations = 0;
};

struct SimplexOptions {
  double tol = 1e-9;
  long max_iterations = 0;  // 0: scale with problem size
};

// Dense bounded-variable two-phase simplex. Dantzig pricing, switching to
// Bland's rule after a degenerate stretch so cycling terminates. Throws
// SolverError on numerical failure (distinct from an Infeasible verdict).
LpSolution solve_lp(const LpProblem& lp, const SimplexOptions& options = {});

}  // namespace d2d
