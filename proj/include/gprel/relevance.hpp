#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gprel/gp.hpp"
#include "gprel/input_model.hpp"
#include "gprel/quadrature.hpp"

namespace gprel {

enum class RelevanceMethod { ard, kl, var };

std::string to_string(RelevanceMethod m);
// Accepts "ard", "kl", "var"; throws InvalidArgument otherwise.
RelevanceMethod parse_method(const std::string& name);

struct RelevanceConfig {
  double delta = 1e-4;  // KL perturbation, in standardized input units
  int quad_order = 32;  // Gauss-Hermite order for VAR
};

struct RelevanceReport {
  RelevanceMethod method = RelevanceMethod::ard;
  Eigen::VectorXd aggregate;               // one entry per variable, >= 0
  std::optional<Eigen::MatrixXd> pointwise;  // n x p; absent for ARD
  std::vector<int> ranking;                // variable indices, most relevant first
  RelevanceConfig config;
  // "observation" for KL, "latent" for VAR, "none" for ARD.
  std::string predictive;

  // aggregate / max(aggregate); all zeros when the maximum is zero.
  Eigen::VectorXd scaled() const;
};

// Indices sorted by descending value, ties by ascending index.
std::vector<int> rank_descending(const Eigen::VectorXd& values);

// KL(p || q) for univariate Gaussians. Throws NonPositiveVariance.
double kl_gaussian(const GaussianPredictive& p, const GaussianPredictive& q);

// KL between Bernoulli(pi) and Bernoulli(pi2), both clamped to
// [1e-12, 1 - 1e-12].
double kl_bernoulli(double pi, double pi2);

// sqrt(2 KL(p(y*|x) || p(y*|x + delta e_j))) / delta.
double kl_relevance_point(const FittedGP& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                          Eigen::Index j, double delta);

RelevanceReport kl_relevance(const FittedGP& g, const Eigen::MatrixXd& x_eval, double delta);
RelevanceReport kl_relevance(const FittedGP& g, double delta = 1e-4);

// Variance of f(x') where x' equals x except x'_j ~ N(cond.mean, cond.sd^2),
// by Gauss-Hermite quadrature.
double conditional_variance(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index j,
                            const Conditional1D& cond, const GaussHermiteRule& rule);

// Variance of the latent predictive mean as x_j moves along its Gaussian
// conditional given the other coordinates of x.
double var_relevance_point(const FittedGP& g, const InputGaussian& im,
                           const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index j,
                           const GaussHermiteRule& rule);

RelevanceReport var_relevance(const FittedGP& g, const InputGaussian& im,
                              const Eigen::MatrixXd& x_eval, const GaussHermiteRule& rule);
// Evaluates at the training inputs with an input model fitted to them.
RelevanceReport var_relevance(const FittedGP& g, int quad_order = 32);

RelevanceReport ard_relevance(const FittedGP& g);

// Dispatches on the method; KL and VAR are evaluated at the training inputs.
RelevanceReport compute_relevance(const FittedGP& g, RelevanceMethod method,
                                  const RelevanceConfig& config = {});

}  // namespace gprel
