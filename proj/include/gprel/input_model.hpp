#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gprel/linalg.hpp"

namespace gprel {

// Univariate Gaussian N(mean, sd^2) of one input given the others.
struct Conditional1D {
  double mean = 0.0;
  double sd = 0.0;
};

// Multivariate Gaussian fitted to the inputs by sample moments, with the
// Cholesky factor of every leave-one-out covariance precomputed.
class InputGaussian {
 public:
  const Eigen::VectorXd& mean() const { return mu_; }
  const Eigen::MatrixXd& covariance() const { return sigma_; }
  const SpdFactor& factor() const { return factor_; }
  // deleted_factors()[j] factors the covariance with row/column j removed.
  const std::vector<SpdFactor>& deleted_factors() const { return deleted_; }
  Eigen::Index dim() const { return mu_.size(); }

  friend InputGaussian estimate(const Eigen::MatrixXd& x, const JitterPolicy& policy);
  friend Conditional1D conditional_1d(const InputGaussian& im, Eigen::Index j,
                                      const Eigen::Ref<const Eigen::VectorXd>& x);

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  SpdFactor factor_;
  std::vector<SpdFactor> deleted_;
  // cross_[j] = L_{-j}^{-1} sigma_{-j,j}; cond_var_[j] is the Schur complement.
  std::vector<Eigen::VectorXd> cross_;
  std::vector<double> cond_var_;
};

// Sample mean and unbiased sample covariance of the rows of x. Requires
// n >= 2 and n >= p; throws DegenerateInputs for constant columns or a
// covariance that does not factorize.
InputGaussian estimate(const Eigen::MatrixXd& x, const JitterPolicy& policy = {});

// Distribution of x_j given the remaining coordinates of x.
Conditional1D conditional_1d(const InputGaussian& im, Eigen::Index j,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace gprel
