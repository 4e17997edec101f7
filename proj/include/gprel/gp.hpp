#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gprel/kernel.hpp"
#include "gprel/linalg.hpp"
#include "gprel/optimizer.hpp"

namespace gprel {

// Half-t priors on sigma_f, c and sigma_n; inverse-gamma priors on each
// length-scale. Densities are on the natural scale.
struct HyperPriors {
  double half_t_df = 4.0;
  double half_t_scale = 1.0;
  double invgamma_shape = 2.0;
  double invgamma_scale = 1.0;
};

void validate(const HyperPriors& priors);

struct OptimizerConfig {
  int restarts = 5;              // random starts drawn uniformly in [init_low, init_high]
  double init_low = -1.0;
  double init_high = 1.0;
  std::uint64_t seed = 0;
  // Explicit starting points (packed log-hypers), tried before the random ones.
  std::vector<Eigen::VectorXd> initial_points;
  BfgsOptions bfgs;
};

// Value of a scalar objective and its gradient over the packed log-hypers.
struct LogDensity {
  double value = 0.0;
  Eigen::VectorXd grad;
};

LogDensity log_marginal_likelihood(const KernelHypers& h, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y);

// Sum of the log prior densities of the natural-scale hypers, including the
// log-scale Jacobian, with gradient over the packed log-hypers.
LogDensity log_prior(const KernelHypers& h, const HyperPriors& priors);

LogDensity log_posterior(const KernelHypers& h, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, const HyperPriors& priors);

enum class PredictiveFlavor { latent, observation };

struct GaussianPredictive {
  double mean = 0.0;
  double variance = 0.0;
  PredictiveFlavor flavor = PredictiveFlavor::latent;
};

// A GP conditioned on training data at fixed hyperparameters. Holds the
// Cholesky factor of K + sigma_n^2 I and the weights (K + sigma_n^2 I)^-1 y,
// so every prediction reuses one factorization.
class FittedGP {
 public:
  // Conditions on (x, y) at the given hypers without optimizing.
  static FittedGP condition(Eigen::MatrixXd x, Eigen::VectorXd y, KernelHypers hypers,
                            HyperPriors priors = {});

  const Eigen::MatrixXd& inputs() const { return x_; }
  const Eigen::VectorXd& targets() const { return y_; }
  const KernelHypers& hypers() const { return hypers_; }
  const HyperPriors& priors() const { return priors_; }
  const SpdFactor& factor() const { return factor_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double log_posterior_at_map() const { return log_posterior_; }
  Eigen::Index size() const { return x_.rows(); }
  Eigen::Index dim() const { return x_.cols(); }

  // k(x_star, X) for every training row.
  Eigen::VectorXd cross_covariance(const Eigen::Ref<const Eigen::VectorXd>& x_star) const;
  // Latent predictive mean only; O(n p).
  double predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x_star) const;

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd x_scaled_;  // inputs divided by length-scales
  Eigen::VectorXd y_;
  KernelHypers hypers_;
  HyperPriors priors_;
  SpdFactor factor_;
  Eigen::VectorXd alpha_;
  double log_posterior_ = 0.0;
};

// Maximizes log_posterior from several starting points and returns the
// best. Throws OptimizationFailed if no start is feasible.
FittedGP fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HyperPriors& priors = {},
             const OptimizerConfig& config = {});

GaussianPredictive predict(const FittedGP& g, const Eigen::Ref<const Eigen::VectorXd>& x_star,
                           PredictiveFlavor flavor);

std::vector<GaussianPredictive> predict_batch(const FittedGP& g, const Eigen::MatrixXd& x_star,
                                              PredictiveFlavor flavor);

}  // namespace gprel
