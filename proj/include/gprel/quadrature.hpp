#pragma once

#include <Eigen/Dense>

namespace gprel {

// Gauss-Hermite rule for integrals against exp(-k^2): nodes are the roots
// of the physicists' Hermite polynomial H_order.
struct GaussHermiteRule {
  int order = 0;
  Eigen::VectorXd nodes;    // ascending
  Eigen::VectorXd weights;  // sum to sqrt(pi)
};

// 1 <= order <= 100, otherwise UnsupportedOrder.
GaussHermiteRule gauss_hermite(int order);

}  // namespace gprel
