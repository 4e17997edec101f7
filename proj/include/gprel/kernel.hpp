#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gprel {

// Hyperparameters of the covariance
//   k(x, x') = c^2 + sigma_f^2 exp(-1/2 sum_i (x_i - x'_i)^2 / l_i^2)
// plus the Gaussian noise s.d. sigma_n. Everything is stored on the log scale.
//
// Packed vector layout (used by gradients and the optimizer):
//   [log sigma_f, log l_1, ..., log l_p, log c, log sigma_n]
struct KernelHypers {
  double log_sigma_f = 0.0;
  Eigen::VectorXd log_lengthscales;
  double log_const = 0.0;
  double log_sigma_n = 0.0;

  static KernelHypers from_natural(double sigma_f, const Eigen::VectorXd& lengthscales,
                                   double constant, double sigma_n);
  static KernelHypers unpack(const Eigen::VectorXd& packed);

  Eigen::Index dim() const { return log_lengthscales.size(); }
  Eigen::Index packed_size() const { return dim() + 3; }
  Eigen::VectorXd pack() const;

  double sigma_f() const;
  double constant() const;
  double sigma_n() const;
  Eigen::VectorXd lengthscales() const;

  // Hypers restricted to a subset of input dimensions.
  KernelHypers select(const std::vector<int>& dims) const;
};

// Throws InvalidArgument unless every exponentiated value is positive and finite.
void validate(const KernelHypers& h);

double kernel_eval(const KernelHypers& h, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

// Cross covariance between the rows of x (n x p) and x2 (m x p).
Eigen::MatrixXd kernel_matrix(const KernelHypers& h, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& x2);

// Covariance of x with itself; exactly symmetric.
Eigen::MatrixXd kernel_matrix(const KernelHypers& h, const Eigen::MatrixXd& x);

// dK/d(log theta) for theta in [sigma_f, l_1..l_p, c]; log sigma_n is
// handled by the GP since it does not enter K.
std::vector<Eigen::MatrixXd> kernel_matrix_grads(const KernelHypers& h, const Eigen::MatrixXd& x);

}  // namespace gprel
