#include "gprel/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "gprel/errors.hpp"
#include "gprel/log.hpp"
#include "gprel/parallel.hpp"

namespace gprel {

std::string to_string(InputDistribution d) {
  return d == InputDistribution::uniform ? "uniform" : "normal";
}

InputDistribution parse_distribution(const std::string& name) {
  if (name == "uniform") return InputDistribution::uniform;
  if (name == "normal") return InputDistribution::normal;
  throw InvalidArgument("unknown input distribution '" + name + "' (expected uniform or normal)");
}

namespace {
constexpr double kUniformHalfWidth = 1.0;
constexpr double kNormalSd = 0.4;
}  // namespace

double sine_variance(double phi, InputDistribution dist) {
  if (dist == InputDistribution::uniform) {
    // E[sin(phi x)] = 0 on a symmetric interval, so Var = E[sin^2].
    const double a = phi * kUniformHalfWidth;
    return 0.5 - std::sin(2.0 * a) / (4.0 * a);
  }
  // E[cos(2 phi x)] = exp(-2 phi^2 tau^2) for x ~ N(0, tau^2).
  return 0.5 * (1.0 - std::exp(-2.0 * phi * phi * kNormalSd * kNormalSd));
}

double ToyModel::component(int j, double x) const {
  return amplitudes(j) * std::sin(frequencies(j) * x);
}

ToyModel toy_model(int p_relevant, InputDistribution dist) {
  if (p_relevant < 1) throw InvalidArgument("toy_model: need at least one relevant variable");
  ToyModel m;
  m.frequencies.resize(p_relevant);
  m.amplitudes.resize(p_relevant);
  const double lo = std::numbers::pi / 10.0;
  const double hi = std::numbers::pi;
  for (int j = 0; j < p_relevant; ++j) {
    const double phi = p_relevant == 1 ? lo : lo + j * (hi - lo) / (p_relevant - 1);
    m.frequencies(j) = phi;
    m.amplitudes(j) = 1.0 / std::sqrt(sine_variance(phi, dist));
  }
  return m;
}

Dataset generate_toy(const ToyConfig& cfg) {
  if (cfg.n < 1) throw InvalidArgument("generate_toy: n must be positive");
  if (cfg.p_irrelevant < 0) throw InvalidArgument("generate_toy: p_irrelevant must be >= 0");
  if (cfg.noise_sd < 0.0) throw InvalidArgument("generate_toy: noise_sd must be >= 0");
  const ToyModel model = toy_model(cfg.p_relevant, cfg.dist);
  const int p = cfg.p_relevant + cfg.p_irrelevant;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-kUniformHalfWidth, kUniformHalfWidth);
  std::normal_distribution<double> gauss(0.0, kNormalSd);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.x.resize(cfg.n, p);
  data.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < p; ++j) {
      data.x(i, j) = cfg.dist == InputDistribution::uniform ? unif(rng) : gauss(rng);
    }
    double y = 0.0;
    for (int j = 0; j < cfg.p_relevant; ++j) y += model.component(j, data.x(i, j));
    const double eps = noise(rng);
    data.y(i) = y + cfg.noise_sd * eps;
  }
  for (int j = 0; j < p; ++j) data.column_names.push_back("x" + std::to_string(j + 1));
  data.target_name = "y";
  return data;
}

namespace {

void check_test(const FittedGP& g, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0) throw EmptyTestSet("utility: test set is empty");
  if (x.rows() != y.size()) throw DimensionMismatch("utility: test inputs and targets differ in size");
  if (x.cols() != g.dim()) throw DimensionMismatch("utility: test inputs have wrong dimension");
}

}  // namespace

double mlpd(const FittedGP& g, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test,
            TargetScale target) {
  check_test(g, x_test, y_test);
  const std::vector<GaussianPredictive> pred = predict_batch(g, x_test, PredictiveFlavor::observation);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x_test.rows(); ++i) {
    const auto& pi = pred[static_cast<std::size_t>(i)];
    const double mean = pi.mean * target.scale + target.mean;
    const double var = pi.variance * target.scale * target.scale;
    const double r = y_test(i) - mean;
    total += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * r * r / var;
  }
  return total / static_cast<double>(x_test.rows());
}

double mlpd(const FittedGP& g, const Dataset& test, TargetScale target) {
  return mlpd(g, test.x, test.y, target);
}

double mse(const FittedGP& g, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test,
           TargetScale target) {
  check_test(g, x_test, y_test);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x_test.rows(); ++i) {
    const double mean = g.predict_mean(x_test.row(i).transpose()) * target.scale + target.mean;
    const double r = y_test(i) - mean;
    total += r * r;
  }
  return total / static_cast<double>(x_test.rows());
}

double mse(const FittedGP& g, const Dataset& test, TargetScale target) {
  return mse(g, test.x, test.y, target);
}

EntropyProfile ranking_entropy(const std::vector<std::vector<int>>& rankings) {
  if (rankings.size() < 2) {
    throw InsufficientResamples("ranking_entropy: need at least two rankings, got " +
                                std::to_string(rankings.size()));
  }
  const std::size_t p = rankings.front().size();
  for (const auto& r : rankings) {
    if (r.size() != p) throw DimensionMismatch("ranking_entropy: rankings differ in length");
    for (int v : r) {
      if (v < 0 || static_cast<std::size_t>(v) >= p) {
        throw IndexOutOfRange("ranking_entropy: variable index out of range");
      }
    }
  }

  EntropyProfile out;
  out.normalized_entropy.assign(p, 0.0);
  if (p < 2) return out;
  const double max_entropy = std::log(static_cast<double>(p));
  const double total = static_cast<double>(rankings.size());
  for (std::size_t step = 0; step < p; ++step) {
    std::vector<int> counts(p, 0);
    for (const auto& r : rankings) ++counts[static_cast<std::size_t>(r[step])];
    double h = 0.0;
    for (int c : counts) {
      if (c == 0) continue;
      const double q = c / total;
      h -= q * std::log(q);
    }
    out.normalized_entropy[step] = std::clamp(h / max_entropy, 0.0, 1.0);
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ b);
}

namespace {

struct Utility {
  double mlpd = 0.0;
  double mse = 0.0;
};

struct MethodResample {
  bool ok = false;
  std::string failure;
  std::vector<int> ranking;
  std::vector<Utility> by_size;
};

struct ResampleOutcome {
  bool ok = false;
  std::string failure;
  std::vector<MethodResample> methods;
};

std::uint64_t subset_key(const std::vector<int>& sorted_subset) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int v : sorted_subset) {
    h ^= static_cast<std::uint64_t>(v) + 1;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ResampleOutcome run_resample(const Dataset& data, const BenchmarkConfig& cfg, int resample) {
  ResampleOutcome out;
  const auto n_total = static_cast<int>(data.size());
  const auto p = static_cast<int>(data.dim());

  std::vector<int> order(static_cast<std::size_t>(n_total));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(resample), 0x5eed));
  std::shuffle(order.begin(), order.end(), rng);
  const std::vector<int> train_idx(order.begin(), order.begin() + cfg.n_train);
  const std::vector<int> test_idx(order.begin() + cfg.n_train, order.end());

  const Dataset train_raw = data.rows(train_idx);
  const Dataset test_raw = data.rows(test_idx);
  const Standardizer scaler = Standardizer::fit(train_raw);
  const Dataset train = scaler.apply(train_raw);
  const Eigen::MatrixXd test_x = scaler.apply_x(test_raw.x);
  const TargetScale target{scaler.y_mean, scaler.y_scale};

  auto score = [&](const FittedGP& g, const std::vector<int>& cols) {
    Eigen::MatrixXd tx(test_x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) tx.col(static_cast<Eigen::Index>(k)) = test_x.col(cols[k]);
    return Utility{mlpd(g, tx, test_raw.y, target), mse(g, tx, test_raw.y, target)};
  };

  std::vector<int> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), 0);

  std::optional<FittedGP> full;
  Utility full_utility;
  try {
    OptimizerConfig opt = cfg.opt;
    opt.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(resample), subset_key(all));
    full = fit(train.x, train.y, cfg.priors, opt);
    full_utility = score(*full, all);
  } catch (const Error& e) {
    out.failure = "resample " + std::to_string(resample) + ": full model failed: " + e.what();
    return out;
  }
  out.ok = true;

  std::map<std::vector<int>, std::optional<Utility>> cache;
  auto submodel = [&](std::vector<int> cols) -> std::optional<Utility> {
    std::sort(cols.begin(), cols.end());
    if (auto it = cache.find(cols); it != cache.end()) return it->second;
    std::optional<Utility> u;
    try {
      Eigen::MatrixXd sx(train.x.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) sx.col(static_cast<Eigen::Index>(k)) = train.x.col(cols[k]);
      OptimizerConfig opt = cfg.opt;
      opt.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(resample), subset_key(cols));
      opt.initial_points.insert(opt.initial_points.begin(), full->hypers().select(cols).pack());
      const FittedGP g = fit(sx, train.y, cfg.priors, opt);
      u = score(g, cols);
    } catch (const Error& e) {
      log::warn("resample " + std::to_string(resample) + ": submodel of size " +
                std::to_string(cols.size()) + " failed: " + e.what());
    }
    cache.emplace(cols, u);
    return u;
  };

  for (RelevanceMethod method : cfg.methods) {
    MethodResample mr;
    try {
      const RelevanceReport report = compute_relevance(*full, method, cfg.relevance);
      mr.ranking = report.ranking;
      mr.ok = true;
      for (int k = 1; k <= p; ++k) {
        if (k == p) {
          mr.by_size.push_back(full_utility);
          continue;
        }
        const std::vector<int> top(report.ranking.begin(), report.ranking.begin() + k);
        const std::optional<Utility> u = submodel(top);
        if (!u) {
          mr.ok = false;
          mr.failure = "resample " + std::to_string(resample) + ": submodel of size " +
                       std::to_string(k) + " failed";
          break;
        }
        mr.by_size.push_back(*u);
      }
    } catch (const Error& e) {
      mr.ok = false;
      mr.failure = "resample " + std::to_string(resample) + ": " + to_string(method) +
                   " relevance failed: " + e.what();
    }
    out.methods.push_back(std::move(mr));
  }
  return out;
}

UtilitySummary summarize(const Eigen::MatrixXd& values) {
  UtilitySummary s;
  const Eigen::Index r = values.rows();
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (r == 0) {
      s.mean.push_back(nan);
      s.ci_half_width.push_back(nan);
      continue;
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) sum += values(i, k);
    const double mean = sum / static_cast<double>(r);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) ss += (values(i, k) - mean) * (values(i, k) - mean);
    s.mean.push_back(mean);
    s.ci_half_width.push_back(r < 2 ? nan
                                    : 1.96 * std::sqrt(ss / static_cast<double>(r - 1)) /
                                          std::sqrt(static_cast<double>(r)));
  }
  return s;
}

}  // namespace

BenchmarkResult run_benchmark(const Dataset& data, const BenchmarkConfig& cfg) {
  if (cfg.n_train < 2 || cfg.n_train >= data.size()) {
    throw InvalidArgument("benchmark: n_train must be in [2, n_total) (n_total = " +
                          std::to_string(data.size()) + ")");
  }
  if (cfg.n_resamples < 1) throw InvalidArgument("benchmark: need at least one resample");
  if (cfg.methods.empty()) throw InvalidArgument("benchmark: no methods requested");

  std::vector<ResampleOutcome> outcomes(static_cast<std::size_t>(cfg.n_resamples));
  parallel_for(outcomes.size(), [&](std::size_t r) {
    outcomes[r] = run_resample(data, cfg, static_cast<int>(r));
  });

  const auto p = static_cast<int>(data.dim());
  BenchmarkResult result;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      log::warn(o.failure);
      result.failures.push_back(o.failure);
    }
  }

  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    MethodOutcome mo;
    mo.curve.method = cfg.methods[m];
    for (int k = 1; k <= p; ++k) mo.curve.sizes.push_back(k);

    std::vector<const MethodResample*> used;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
      const ResampleOutcome& o = outcomes[r];
      if (!o.ok) {
        ++mo.curve.resamples_dropped;
        continue;
      }
      const MethodResample& mr = o.methods[m];
      if (!mr.ok) {
        log::warn(mr.failure);
        mo.failures.push_back(mr.failure);
        ++mo.curve.resamples_dropped;
        continue;
      }
      used.push_back(&mr);
      mo.rankings.push_back(mr.ranking);
      mo.used_resamples.push_back(static_cast<int>(r));
    }

    mo.curve.resamples_used = static_cast<int>(used.size());
    mo.curve.mlpd_values.resize(static_cast<Eigen::Index>(used.size()), p);
    mo.curve.mse_values.resize(static_cast<Eigen::Index>(used.size()), p);
    for (std::size_t i = 0; i < used.size(); ++i) {
      for (int k = 0; k < p; ++k) {
        mo.curve.mlpd_values(static_cast<Eigen::Index>(i), k) = used[i]->by_size[static_cast<std::size_t>(k)].mlpd;
        mo.curve.mse_values(static_cast<Eigen::Index>(i), k) = used[i]->by_size[static_cast<std::size_t>(k)].mse;
      }
    }
    mo.curve.mlpd = summarize(mo.curve.mlpd_values);
    mo.curve.mse = summarize(mo.curve.mse_values);

    if (mo.rankings.size() >= 2) {
      mo.entropy = ranking_entropy(mo.rankings);
      mo.entropy->method = cfg.methods[m];
    }
    result.methods.push_back(std::move(mo));
  }
  return result;
}

SelectionCurve forward_selection_curve(const Dataset& data, RelevanceMethod method, int n_train,
                                       int n_resamples, const HyperPriors& priors,
                                       const OptimizerConfig& opt, const RelevanceConfig& method_cfg,
                                       std::uint64_t seed) {
  BenchmarkConfig cfg;
  cfg.methods = {method};
  cfg.n_train = n_train;
  cfg.n_resamples = n_resamples;
  cfg.priors = priors;
  cfg.opt = opt;
  cfg.relevance = method_cfg;
  cfg.seed = seed;
  return run_benchmark(data, cfg).methods.front().curve;
}

}  // namespace gprel
