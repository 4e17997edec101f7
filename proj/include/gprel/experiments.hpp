#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gprel/dataset.hpp"
#include "gprel/gp.hpp"
#include "gprel/relevance.hpp"

namespace gprel {

// ---------------------------------------------------------------------------
// Additive sine toy problem
//
//   y = sum_j A_j sin(phi_j x_j) + eps,   eps ~ N(0, noise_sd^2)
//
// with phi_j equally spaced on [pi/10, pi] and A_j chosen so each term has
// unit variance under the input distribution. Irrelevant columns are drawn
// from the same distribution and never enter y.
// ---------------------------------------------------------------------------

enum class InputDistribution { uniform, normal };  // U(-1, 1) or N(0, 0.4^2)

std::string to_string(InputDistribution d);
InputDistribution parse_distribution(const std::string& name);

struct ToyConfig {
  int n = 300;
  int p_relevant = 8;
  int p_irrelevant = 0;
  InputDistribution dist = InputDistribution::uniform;
  double noise_sd = 0.3;
  std::uint64_t seed = 0;
};

// Var[sin(phi x)] for x drawn from `dist`, in closed form.
double sine_variance(double phi, InputDistribution dist);

struct ToyModel {
  Eigen::VectorXd frequencies;
  Eigen::VectorXd amplitudes;

  // A_j sin(phi_j x) for relevant variable j (0-based).
  double component(int j, double x) const;
};

ToyModel toy_model(int p_relevant, InputDistribution dist);

// Columns x1..xp (relevant first), target y.
Dataset generate_toy(const ToyConfig& cfg);

// ---------------------------------------------------------------------------
// Predictive utilities. The model works in standardized target units;
// `target` maps them back so utilities are reported in original units.
// ---------------------------------------------------------------------------

struct TargetScale {
  double mean = 0.0;
  double scale = 1.0;
};

// Mean log N(y_i | mean_i, var_i) over the test points using the
// observation predictive. x_test in model units, y_test in original units.
double mlpd(const FittedGP& g, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test,
            TargetScale target = {});
double mlpd(const FittedGP& g, const Dataset& test, TargetScale target = {});

double mse(const FittedGP& g, const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test,
           TargetScale target = {});
double mse(const FittedGP& g, const Dataset& test, TargetScale target = {});

// ---------------------------------------------------------------------------
// Forward selection and ranking variability
// ---------------------------------------------------------------------------

struct UtilitySummary {
  std::vector<double> mean;           // indexed by size - 1
  std::vector<double> ci_half_width;  // 1.96 standard errors; NaN with < 2 resamples
};

struct SelectionCurve {
  RelevanceMethod method = RelevanceMethod::ard;
  std::vector<int> sizes;  // 1..p
  UtilitySummary mlpd;
  UtilitySummary mse;
  // Per-resample values (resamples used x sizes).
  Eigen::MatrixXd mlpd_values;
  Eigen::MatrixXd mse_values;
  int resamples_used = 0;
  int resamples_dropped = 0;
};

struct EntropyProfile {
  RelevanceMethod method = RelevanceMethod::ard;
  std::vector<double> normalized_entropy;  // one entry per selection step, in [0, 1]
};

// Entropy of which variable is chosen at each step across resamples,
// divided by log p. Throws InsufficientResamples with fewer than two.
EntropyProfile ranking_entropy(const std::vector<std::vector<int>>& rankings);

struct BenchmarkConfig {
  std::vector<RelevanceMethod> methods{RelevanceMethod::ard, RelevanceMethod::kl,
                                       RelevanceMethod::var};
  int n_train = 0;
  int n_resamples = 20;
  HyperPriors priors;
  // Used for the full model. Submodels use the same settings, warm-started
  // from the full model's hypers restricted to the selected variables.
  OptimizerConfig opt;
  RelevanceConfig relevance;
  std::uint64_t seed = 0;
};

struct MethodOutcome {
  SelectionCurve curve;
  std::optional<EntropyProfile> entropy;
  std::vector<std::vector<int>> rankings;  // per used resample
  std::vector<int> used_resamples;         // resample indices behind `rankings`
  std::vector<std::string> failures;
};

struct BenchmarkResult {
  std::vector<MethodOutcome> methods;
  std::vector<std::string> failures;  // resample-level failures shared by all methods
};

// For each resample: split train/test uniformly without replacement,
// standardize with training statistics, fit the full model, rank variables
// once per method, then refit on the top-k variables for every k and score
// on the test set. Submodels with the same variable set are shared between
// methods. Failed resamples are dropped and reported, never imputed.
BenchmarkResult run_benchmark(const Dataset& data, const BenchmarkConfig& cfg);

SelectionCurve forward_selection_curve(const Dataset& data, RelevanceMethod method, int n_train,
                                       int n_resamples, const HyperPriors& priors,
                                       const OptimizerConfig& opt, const RelevanceConfig& method_cfg,
                                       std::uint64_t seed);

// Stable 64-bit seed derivation (splitmix64 over the inputs).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace gprel
