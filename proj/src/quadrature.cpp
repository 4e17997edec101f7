#include "gprel/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gprel/errors.hpp"

namespace gprel {

namespace {

// Orthonormal Hermite polynomials h_k = H_k / sqrt(2^k k! sqrt(pi)) at x;
// returns {h_n, h_{n-1}}.
std::pair<double, double> orthonormal_hermite(int n, double x) {
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25);
  for (int k = 0; k < n; ++k) {
    const double next =
        x * std::sqrt(2.0 / (k + 1.0)) * cur - std::sqrt(static_cast<double>(k) / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

}  // namespace

GaussHermiteRule gauss_hermite(int order) {
  if (order < 1 || order > 100) {
    throw UnsupportedOrder("gauss_hermite: order " + std::to_string(order) +
                           " outside [1, 100]");
  }
  const Eigen::Index n = order;

  // Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
  // three-term recurrence, with off-diagonal sqrt(k/2).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 1; k < n; ++k) sub(k - 1) = std::sqrt(0.5 * static_cast<double>(k));
  Eigen::VectorXd nodes = diag;
  if (n > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    nodes = eig.eigenvalues();
  }

  // Newton polish on h_n, with h_n' = sqrt(2n) h_{n-1}.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int it = 0; it < 3; ++it) {
      const auto [hn, hn1] = orthonormal_hermite(order, nodes(i));
      if (hn1 == 0.0) break;
      nodes(i) -= hn / (std::sqrt(2.0 * order) * hn1);
    }
  }

  // w_i = 2^{n-1} n! sqrt(pi) / (n^2 H_{n-1}(k_i)^2), which in orthonormal
  // form is 1 / (n h_{n-1}(k_i)^2).
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = orthonormal_hermite(order - 1, nodes(i)).first;
    weights(i) = 1.0 / (static_cast<double>(order) * h * h);
  }

  // Exact symmetry about zero.
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Index m = n - 1 - i;
    const double x = 0.5 * (nodes(m) - nodes(i));
    const double w = 0.5 * (weights(m) + weights(i));
    nodes(i) = -x;
    nodes(m) = x;
    weights(i) = weights(m) = w;
  }
  if (n % 2 == 1) nodes(n / 2) = 0.0;

  return {order, std::move(nodes), std::move(weights)};
}

}  // namespace gprel
