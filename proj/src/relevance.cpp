#include "gprel/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gprel/errors.hpp"
#include "gprel/log.hpp"
#include "gprel/parallel.hpp"

namespace gprel {

std::string to_string(RelevanceMethod m) {
  switch (m) {
    case RelevanceMethod::ard: return "ard";
    case RelevanceMethod::kl: return "kl";
    case RelevanceMethod::var: return "var";
  }
  return "unknown";
}

RelevanceMethod parse_method(const std::string& name) {
  if (name == "ard") return RelevanceMethod::ard;
  if (name == "kl") return RelevanceMethod::kl;
  if (name == "var") return RelevanceMethod::var;
  throw InvalidArgument("unknown relevance method '" + name + "' (expected ard, kl or var)");
}

Eigen::VectorXd RelevanceReport::scaled() const {
  const double top = aggregate.size() > 0 ? aggregate.maxCoeff() : 0.0;
  if (!(top > 0.0)) return Eigen::VectorXd::Zero(aggregate.size());
  return aggregate / top;
}

std::vector<int> rank_descending(const Eigen::VectorXd& values) {
  std::vector<int> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return values(a) > values(b); });
  return idx;
}

double kl_gaussian(const GaussianPredictive& p, const GaussianPredictive& q) {
  if (!(p.variance > 0.0) || !(q.variance > 0.0)) {
    throw NonPositiveVariance("kl_gaussian: variances must be positive");
  }
  // log(sq/sp) + (sp^2 + dmu^2) / (2 sq^2) - 1/2, written as
  // 1/2 (t - log1p(t)) + dmu^2 / (2 sq^2) with t = sp^2/sq^2 - 1 to avoid
  // cancellation when the two distributions are close.
  const double t = (p.variance - q.variance) / q.variance;
  const double dmu = p.mean - q.mean;
  const double kl = 0.5 * (t - std::log1p(t)) + dmu * dmu / (2.0 * q.variance);
  return std::max(kl, 0.0);
}

double kl_bernoulli(double pi, double pi2) {
  constexpr double lo = 1e-12;
  constexpr double hi = 1.0 - 1e-12;
  pi = std::clamp(pi, lo, hi);
  pi2 = std::clamp(pi2, lo, hi);
  const double kl = pi * std::log(pi / pi2) + (1.0 - pi) * std::log((1.0 - pi) / (1.0 - pi2));
  return std::max(kl, 0.0);
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("KL relevance: delta must be positive and finite");
  }
}

void warn_delta_range(double delta) {
  if (delta < 1e-7 || delta > 1e-2) {
    std::ostringstream msg;
    msg << "KL relevance: delta = " << delta
        << " is outside [1e-7, 1e-2]; results may be dominated by rounding or curvature";
    log::warn(msg.str());
  }
}

double kl_distance_over_delta(const FittedGP& g, const GaussianPredictive& base,
                              const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index j,
                              double delta) {
  Eigen::VectorXd moved = x;
  moved(j) += delta;
  const GaussianPredictive shifted = predict(g, moved, PredictiveFlavor::observation);
  return std::sqrt(2.0 * kl_gaussian(base, shifted)) / delta;
}

void check_index(const FittedGP& g, Eigen::Index j) {
  if (j < 0 || j >= g.dim()) {
    throw IndexOutOfRange("relevance: variable index " + std::to_string(j) + " outside [0, " +
                          std::to_string(g.dim()) + ")");
  }
}

RelevanceReport finish(RelevanceMethod method, Eigen::MatrixXd pointwise,
                       const RelevanceConfig& config, std::string predictive) {
  RelevanceReport r;
  r.method = method;
  r.aggregate = pointwise.colwise().mean().transpose();
  r.pointwise = std::move(pointwise);
  r.ranking = rank_descending(r.aggregate);
  r.config = config;
  r.predictive = std::move(predictive);
  return r;
}

}  // namespace

double kl_relevance_point(const FittedGP& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                          Eigen::Index j, double delta) {
  check_delta(delta);
  check_index(g, j);
  const GaussianPredictive base = predict(g, x, PredictiveFlavor::observation);
  return kl_distance_over_delta(g, base, x, j, delta);
}

RelevanceReport kl_relevance(const FittedGP& g, const Eigen::MatrixXd& x_eval, double delta) {
  check_delta(delta);
  warn_delta_range(delta);
  if (x_eval.cols() != g.dim()) throw DimensionMismatch("kl_relevance: evaluation points");
  const Eigen::Index n = x_eval.rows();
  const Eigen::Index p = g.dim();
  Eigen::MatrixXd pointwise(n, p);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    const Eigen::VectorXd x = x_eval.row(i).transpose();
    const GaussianPredictive base = predict(g, x, PredictiveFlavor::observation);
    for (Eigen::Index j = 0; j < p; ++j) pointwise(i, j) = kl_distance_over_delta(g, base, x, j, delta);
  });
  RelevanceConfig config;
  config.delta = delta;
  return finish(RelevanceMethod::kl, std::move(pointwise), config, "observation");
}

RelevanceReport kl_relevance(const FittedGP& g, double delta) {
  return kl_relevance(g, g.inputs(), delta);
}

double conditional_variance(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index j,
                            const Conditional1D& cond, const GaussHermiteRule& rule) {
  if (j < 0 || j >= x.size()) {
    throw IndexOutOfRange("conditional_variance: index " + std::to_string(j));
  }
  Eigen::VectorXd query = x;
  Eigen::VectorXd values(rule.order);
  for (Eigen::Index k = 0; k < rule.order; ++k) {
    query(j) = std::numbers::sqrt2 * cond.sd * rule.nodes(k) + cond.mean;
    values(k) = f(query);
  }

  // Second moment minus squared first moment, both taken about a reference
  // value (variance is shift invariant; this limits cancellation).
  const double ref = values(rule.order / 2);
  const Eigen::ArrayXd shifted = values.array() - ref;
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const double m1 = inv_sqrt_pi * (rule.weights.array() * shifted).sum();
  const double m2 = inv_sqrt_pi * (rule.weights.array() * shifted.square()).sum();
  const double var = m2 - m1 * m1;
  if (var < 0.0) {
    if (var < -1e-12) {
      throw NegativeVariance("conditional_variance: quadrature variance " + std::to_string(var));
    }
    return 0.0;
  }
  return var;
}

double var_relevance_point(const FittedGP& g, const InputGaussian& im,
                           const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index j,
                           const GaussHermiteRule& rule) {
  check_index(g, j);
  if (im.dim() != g.dim()) throw DimensionMismatch("var_relevance: input model dimension");
  const Conditional1D cond = conditional_1d(im, j, x);
  return conditional_variance([&g](const Eigen::VectorXd& q) { return g.predict_mean(q); }, x, j,
                              cond, rule);
}

RelevanceReport var_relevance(const FittedGP& g, const InputGaussian& im,
                              const Eigen::MatrixXd& x_eval, const GaussHermiteRule& rule) {
  if (x_eval.cols() != g.dim()) throw DimensionMismatch("var_relevance: evaluation points");
  const Eigen::Index n = x_eval.rows();
  const Eigen::Index p = g.dim();
  Eigen::MatrixXd pointwise(n, p);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
    const auto i = static_cast<Eigen::Index>(iu);
    const Eigen::VectorXd x = x_eval.row(i).transpose();
    for (Eigen::Index j = 0; j < p; ++j) pointwise(i, j) = var_relevance_point(g, im, x, j, rule);
  });
  RelevanceConfig config;
  config.quad_order = rule.order;
  return finish(RelevanceMethod::var, std::move(pointwise), config, "latent");
}

RelevanceReport var_relevance(const FittedGP& g, int quad_order) {
  const InputGaussian im = estimate(g.inputs());
  return var_relevance(g, im, g.inputs(), gauss_hermite(quad_order));
}

RelevanceReport ard_relevance(const FittedGP& g) {
  RelevanceReport r;
  r.method = RelevanceMethod::ard;
  r.aggregate = (-g.hypers().log_lengthscales.array()).exp().matrix();
  r.ranking = rank_descending(r.aggregate);
  r.predictive = "none";
  return r;
}

RelevanceReport compute_relevance(const FittedGP& g, RelevanceMethod method,
                                  const RelevanceConfig& config) {
  switch (method) {
    case RelevanceMethod::ard: return ard_relevance(g);
    case RelevanceMethod::kl: return kl_relevance(g, config.delta);
    case RelevanceMethod::var: return var_relevance(g, config.quad_order);
  }
  throw InvalidArgument("compute_relevance: unknown method");
}

}  // namespace gprel
