#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

namespace gprel {

// Objective to be maximized. Returns std::nullopt when the point is
// infeasible (e.g. the covariance does not factorize); the line search then
// backtracks.
struct ValueAndGradient {
  double value = 0.0;
  Eigen::VectorXd grad;
};
using Objective = std::function<std::optional<ValueAndGradient>(const Eigen::VectorXd&)>;

struct BfgsOptions {
  double grad_tol = 1e-5;      // stop when ||grad||_inf falls below
  int max_iter = 500;
  // Also stop after `stall_iters` consecutive iterations that each improve
  // the objective by less than value_tol * max(1, |value|).
  double value_tol = 1e-12;
  int stall_iters = 3;
  double max_step = 2.0;       // cap on ||step||_inf per iteration
  double armijo = 1e-4;
  double min_step_fraction = 1e-10;
  double max_abs_coordinate = 25.0;  // coordinates beyond are treated as infeasible
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
};

// Quasi-Newton ascent with an inverse-Hessian BFGS update and backtracking
// Armijo line search. Returns std::nullopt if the starting point is
// infeasible.
std::optional<BfgsResult> bfgs_maximize(const Objective& objective, const Eigen::VectorXd& start,
                                        const BfgsOptions& options = {});

}  // namespace gprel
