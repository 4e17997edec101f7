#include "gprel/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include "gprel/errors.hpp"
#include "gprel/log.hpp"
#include "gprel/parallel.hpp"

namespace gprel {

void validate(const HyperPriors& priors) {
  const bool ok = priors.half_t_df > 0.0 && priors.half_t_scale > 0.0 &&
                  priors.invgamma_shape > 0.0 && priors.invgamma_scale > 0.0 &&
                  std::isfinite(priors.half_t_df) && std::isfinite(priors.half_t_scale) &&
                  std::isfinite(priors.invgamma_shape) && std::isfinite(priors.invgamma_scale);
  if (!ok) throw InvalidArgument("hyperprior parameters must be positive and finite");
}

namespace {

void check_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("GP data: " + std::to_string(x.rows()) + " input rows but " +
                            std::to_string(y.size()) + " targets");
  }
}

SpdFactor factor_covariance(const KernelHypers& h, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd k = kernel_matrix(h, x);
  k.diagonal().array() += std::exp(2.0 * h.log_sigma_n);
  return cholesky(k);
}

double log_marginal_value(const SpdFactor& f, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - 0.5 * log_det(f) - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

// log density of a half-t(df, scale) variable sigma = exp(theta), plus the
// Jacobian theta, and its derivative in theta.
std::pair<double, double> half_t_log(double theta, double df, double scale) {
  const double s2 = std::exp(2.0 * theta);
  const double u = s2 / (df * scale * scale);
  const double norm = std::log(2.0) + std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                      0.5 * std::log(df * std::numbers::pi) - std::log(scale);
  const double value = norm - 0.5 * (df + 1.0) * std::log1p(u) + theta;
  const double grad = 1.0 - (df + 1.0) * u / (1.0 + u);
  return {value, grad};
}

// Inverse-gamma(shape, scale) on l = exp(theta), plus the Jacobian.
std::pair<double, double> inv_gamma_log(double theta, double shape, double scale) {
  const double inv_l = std::exp(-theta);
  const double value = shape * std::log(scale) - std::lgamma(shape) - shape * theta - scale * inv_l;
  const double grad = -shape + scale * inv_l;
  return {value, grad};
}

}  // namespace

LogDensity log_marginal_likelihood(const KernelHypers& h, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y) {
  check_data(x, y);
  validate(h);
  if (x.cols() != h.dim()) {
    throw DimensionMismatch("log_marginal_likelihood: inputs have " + std::to_string(x.cols()) +
                            " columns, hypers have " + std::to_string(h.dim()));
  }
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const SpdFactor f = factor_covariance(h, x);
  const Eigen::VectorXd alpha = solve_spd(f, y);

  LogDensity out;
  out.value = log_marginal_value(f, y, alpha);

  // d/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta), accumulated over the
  // lower triangle of the kernel matrix in one pass.
  const Eigen::MatrixXd l_inv =
      f.lower().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd k_inv = Eigen::MatrixXd::Zero(n, n);
  k_inv.selfadjointView<Eigen::Lower>().rankUpdate(l_inv.transpose());

  const double sf2 = std::exp(2.0 * h.log_sigma_f);
  const double c2 = std::exp(2.0 * h.log_const);
  const Eigen::RowVectorXd inv_l = (-h.log_lengthscales.array()).exp().matrix().transpose();
  const Eigen::MatrixXd xs = x.array().rowwise() * inv_l.array();

  double w_se_sum = 0.0;
  double w_sum = 0.0;
  double w_trace = 0.0;
  Eigen::VectorXd len_sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd d2(p);
  for (Eigen::Index b = 0; b < n; ++b) {
    const double wbb = alpha(b) * alpha(b) - k_inv(b, b);
    w_trace += wbb;
    w_sum += wbb;
    w_se_sum += wbb * sf2;
    for (Eigen::Index a = b + 1; a < n; ++a) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < p; ++d) {
        const double diff = xs(a, d) - xs(b, d);
        d2(d) = diff * diff;
        r2 += d2(d);
      }
      const double w = 2.0 * (alpha(a) * alpha(b) - k_inv(a, b));
      const double wse = w * sf2 * std::exp(-0.5 * r2);
      w_sum += w;
      w_se_sum += wse;
      len_sum += wse * d2;
    }
  }

  out.grad.resize(p + 3);
  out.grad(0) = w_se_sum;
  out.grad.segment(1, p) = 0.5 * len_sum;
  out.grad(p + 1) = c2 * w_sum;
  out.grad(p + 2) = std::exp(2.0 * h.log_sigma_n) * w_trace;
  return out;
}

LogDensity log_prior(const KernelHypers& h, const HyperPriors& priors) {
  const Eigen::Index p = h.dim();
  LogDensity out;
  out.grad.resize(p + 3);

  auto add_half_t = [&](Eigen::Index slot, double theta) {
    const auto [v, g] = half_t_log(theta, priors.half_t_df, priors.half_t_scale);
    out.value += v;
    out.grad(slot) = g;
  };
  add_half_t(0, h.log_sigma_f);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto [v, g] =
        inv_gamma_log(h.log_lengthscales(i), priors.invgamma_shape, priors.invgamma_scale);
    out.value += v;
    out.grad(i + 1) = g;
  }
  add_half_t(p + 1, h.log_const);
  add_half_t(p + 2, h.log_sigma_n);
  return out;
}

LogDensity log_posterior(const KernelHypers& h, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, const HyperPriors& priors) {
  LogDensity lml = log_marginal_likelihood(h, x, y);
  const LogDensity prior = log_prior(h, priors);
  lml.value += prior.value;
  lml.grad += prior.grad;
  return lml;
}

FittedGP FittedGP::condition(Eigen::MatrixXd x, Eigen::VectorXd y, KernelHypers hypers,
                             HyperPriors priors) {
  check_data(x, y);
  if (x.cols() != hypers.dim()) {
    throw DimensionMismatch("FittedGP: inputs have " + std::to_string(x.cols()) +
                            " columns, hypers have " + std::to_string(hypers.dim()));
  }
  FittedGP g;
  g.factor_ = factor_covariance(hypers, x);
  g.alpha_ = solve_spd(g.factor_, y);
  g.log_posterior_ =
      log_marginal_value(g.factor_, y, g.alpha_) + log_prior(hypers, priors).value;
  const Eigen::RowVectorXd inv_l = (-hypers.log_lengthscales.array()).exp().matrix().transpose();
  g.x_scaled_ = x.array().rowwise() * inv_l.array();
  g.x_ = std::move(x);
  g.y_ = std::move(y);
  g.hypers_ = std::move(hypers);
  g.priors_ = priors;
  return g;
}

Eigen::VectorXd FittedGP::cross_covariance(const Eigen::Ref<const Eigen::VectorXd>& x_star) const {
  if (x_star.size() != dim()) {
    throw DimensionMismatch("predict: query has dimension " + std::to_string(x_star.size()) +
                            ", model has " + std::to_string(dim()));
  }
  const Eigen::VectorXd q = (x_star.array() * (-hypers_.log_lengthscales.array()).exp()).matrix();
  const double sf2 = std::exp(2.0 * hypers_.log_sigma_f);
  const double c2 = std::exp(2.0 * hypers_.log_const);
  Eigen::VectorXd k(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    double r2 = 0.0;
    for (Eigen::Index d = 0; d < dim(); ++d) {
      const double diff = x_scaled_(i, d) - q(d);
      r2 += diff * diff;
    }
    k(i) = c2 + sf2 * std::exp(-0.5 * r2);
  }
  return k;
}

double FittedGP::predict_mean(const Eigen::Ref<const Eigen::VectorXd>& x_star) const {
  return cross_covariance(x_star).dot(alpha_);
}

GaussianPredictive predict(const FittedGP& g, const Eigen::Ref<const Eigen::VectorXd>& x_star,
                           PredictiveFlavor flavor) {
  const Eigen::VectorXd k = g.cross_covariance(x_star);
  const KernelHypers& h = g.hypers();
  const double prior_var = std::exp(2.0 * h.log_const) + std::exp(2.0 * h.log_sigma_f);
  const Eigen::VectorXd v = solve_lower(g.factor(), k);

  GaussianPredictive out;
  out.flavor = flavor;
  out.mean = k.dot(g.alpha());
  double var = prior_var - v.squaredNorm();
  if (var < 0.0) {
    if (var < -1e-10 * std::max(1.0, prior_var)) {
      throw NegativeVariance("predict: latent variance " + std::to_string(var) +
                             " is negative beyond rounding");
    }
    var = 0.0;
  }
  if (flavor == PredictiveFlavor::observation) var += std::exp(2.0 * h.log_sigma_n);
  out.variance = var;
  return out;
}

std::vector<GaussianPredictive> predict_batch(const FittedGP& g, const Eigen::MatrixXd& x_star,
                                              PredictiveFlavor flavor) {
  std::vector<GaussianPredictive> out(static_cast<std::size_t>(x_star.rows()));
  parallel_for(out.size(), [&](std::size_t i) {
    out[i] = predict(g, x_star.row(static_cast<Eigen::Index>(i)).transpose(), flavor);
  });
  return out;
}

FittedGP fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const HyperPriors& priors,
             const OptimizerConfig& config) {
  check_data(x, y);
  validate(priors);
  if (x.rows() < 2) throw InvalidArgument("fit: need at least two training points");
  if (!x.allFinite() || !y.allFinite()) throw InvalidArgument("fit: data contain non-finite values");
  if (x.rows() <= x.cols()) {
    log::warn("fit: n = " + std::to_string(x.rows()) + " is not larger than p = " +
              std::to_string(x.cols()));
  }

  const Eigen::Index packed = x.cols() + 3;
  std::vector<Eigen::VectorXd> starts;
  for (const auto& s : config.initial_points) {
    if (s.size() != packed) {
      throw DimensionMismatch("fit: initial point has " + std::to_string(s.size()) +
                              " entries, expected " + std::to_string(packed));
    }
    starts.push_back(s);
  }
  for (int r = 0; r < config.restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(config.init_low, config.init_high);
    Eigen::VectorXd s(packed);
    for (Eigen::Index k = 0; k < packed; ++k) s(k) = unif(rng);
    starts.push_back(std::move(s));
  }
  if (starts.empty()) throw InvalidArgument("fit: no starting points configured");

  const Objective objective = [&](const Eigen::VectorXd& theta) -> std::optional<ValueAndGradient> {
    try {
      const LogDensity d = log_posterior(KernelHypers::unpack(theta), x, y, priors);
      return ValueAndGradient{d.value, d.grad};
    } catch (const NotPositiveDefinite&) {
      return std::nullopt;
    }
  };

  std::vector<std::optional<BfgsResult>> results(starts.size());
  parallel_for(starts.size(),
               [&](std::size_t i) { results[i] = bfgs_maximize(objective, starts[i], config.bfgs); });

  const BfgsResult* best = nullptr;
  for (const auto& r : results) {
    if (r && std::isfinite(r->value) && (!best || r->value > best->value)) best = &*r;
  }
  if (!best) {
    throw OptimizationFailed("fit: all " + std::to_string(starts.size()) +
                             " starting points were infeasible");
  }
  return FittedGP::condition(x, y, KernelHypers::unpack(best->x), priors);
}

}  // namespace gprel
