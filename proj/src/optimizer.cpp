#include "gprel/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace gprel {

namespace {

std::optional<ValueAndGradient> evaluate(const Objective& objective, const Eigen::VectorXd& x,
                                         const BfgsOptions& options) {
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.max_abs_coordinate) return std::nullopt;
  auto r = objective(x);
  if (!r || !std::isfinite(r->value) || !r->grad.allFinite()) return std::nullopt;
  return r;
}

}  // namespace

std::optional<BfgsResult> bfgs_maximize(const Objective& objective, const Eigen::VectorXd& start,
                                        const BfgsOptions& options) {
  // Internally minimizes -objective.
  auto first = evaluate(objective, start, options);
  if (!first) return std::nullopt;

  const Eigen::Index dim = start.size();
  Eigen::VectorXd x = start;
  double f = -first->value;
  Eigen::VectorXd g = -first->grad;
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(dim, dim);
  bool fresh_hessian = true;

  BfgsResult result;
  int iter = 0;
  int stalled = 0;
  for (; iter < options.max_iter; ++iter) {
    if (g.cwiseAbs().maxCoeff() < options.grad_tol) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd direction = -inv_hessian * g;
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      fresh_hessian = true;
      direction = -g;
      slope = g.dot(direction);
    }
    const double longest = direction.cwiseAbs().maxCoeff();
    if (longest > options.max_step) {
      direction *= options.max_step / longest;
      slope = g.dot(direction);
    }

    double t = 1.0;
    std::optional<ValueAndGradient> trial;
    Eigen::VectorXd x_new;
    while (t >= options.min_step_fraction) {
      x_new = x + t * direction;
      trial = evaluate(objective, x_new, options);
      if (trial && -trial->value <= f + options.armijo * t * slope) break;
      trial.reset();
      t *= 0.5;
    }

    if (!trial) {
      if (fresh_hessian) break;  // steepest descent could not make progress
      inv_hessian.setIdentity();
      fresh_hessian = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd g_new = -trial->grad;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (fresh_hessian) {
        inv_hessian *= sy / y.squaredNorm();
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd i_rsy =
          Eigen::MatrixXd::Identity(dim, dim) - rho * s * y.transpose();
      inv_hessian = i_rsy * inv_hessian * i_rsy.transpose() + rho * s * s.transpose();
      fresh_hessian = false;
    }

    const double improvement = f - (-trial->value);
    x = x_new;
    f = -trial->value;
    g = g_new;
    if (improvement < options.value_tol * std::max(1.0, std::abs(f))) {
      if (++stalled >= options.stall_iters) {
        result.converged = true;
        ++iter;
        break;
      }
    } else {
      stalled = 0;
    }
  }

  result.x = x;
  result.value = -f;
  result.grad = -g;
  result.iterations = iter;
  return result;
}

}  // namespace gprel
