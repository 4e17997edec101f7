#include "gprel/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gprel/dataset.hpp"
#include "gprel/errors.hpp"
#include "gprel/experiments.hpp"
#include "gprel/log.hpp"
#include "gprel/manifest.hpp"
#include "gprel/serialization.hpp"

namespace gprel::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct PriorFlags {
  HyperPriors priors;
  void add(CLI::App* app) {
    app->add_option("--half-t-df", priors.half_t_df, "Half-t degrees of freedom (sigma_f, c, sigma_n)")
        ->capture_default_str();
    app->add_option("--half-t-scale", priors.half_t_scale, "Half-t scale")->capture_default_str();
    app->add_option("--invgamma-shape", priors.invgamma_shape, "Inverse-gamma shape (length-scales)")
        ->capture_default_str();
    app->add_option("--invgamma-scale", priors.invgamma_scale, "Inverse-gamma scale")
        ->capture_default_str();
  }
  json to_json() const {
    return {{"half_t_df", priors.half_t_df},
            {"half_t_scale", priors.half_t_scale},
            {"invgamma_shape", priors.invgamma_shape},
            {"invgamma_scale", priors.invgamma_scale}};
  }
};

struct Manifest {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
  std::uint64_t seed = 0;
  json inputs = json::array();
  json outputs = json::array();
  Clock::time_point start = Clock::now();

  void input(const std::string& path) { inputs.push_back({{"path", path}, {"sha256", sha256_file(path)}}); }
  void output(const std::string& path) { outputs.push_back({{"path", path}, {"sha256", sha256_file(path)}}); }

  void write(const std::string& path) const {
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const json j = {{"command", command},
                    {"arguments", args},
                    {"config", config},
                    {"seed", seed},
                    {"inputs", inputs},
                    {"outputs", outputs},
                    {"tool_version", library_version()},
                    {"timings", {{"wall_seconds", seconds}}}};
    write_file_atomic(path, dump_json(j));
  }
};

// Bad flag values detected after parsing.
struct FlagError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ------------------------------------------------------------------- fit

struct FitArgs {
  std::string data;
  std::string target;
  std::string out;
  int restarts = 5;
  std::uint64_t seed = 0;
  PriorFlags priors;
};

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv) {
  if (a.restarts < 1) throw FlagError("--restarts must be >= 1");
  Manifest manifest{"fit", argv};
  const Dataset raw = read_csv(a.data, a.target);
  manifest.input(a.data);
  if (raw.size() < 2) throw DataError("fit: need at least two rows");

  const Standardizer scaler = Standardizer::fit(raw);
  const Dataset data = scaler.apply(raw);
  OptimizerConfig opt;
  opt.restarts = a.restarts;
  opt.seed = a.seed;
  ModelDocument doc{fit(data.x, data.y, a.priors.priors, opt), raw.column_names, raw.target_name,
                    scaler};

  write_file_atomic(a.out, dump_json(to_json(doc)));
  manifest.output(a.out);
  manifest.seed = a.seed;
  manifest.config = {{"target", a.target}, {"restarts", a.restarts}, {"priors", a.priors.to_json()}};
  manifest.write(a.out + ".manifest.json");
  return kOk;
}

// ------------------------------------------------------------------ rank

struct RankArgs {
  std::string model;
  std::string method;
  double delta = 1e-4;
  int quad_order = 32;
  std::string out;
  std::string json_out;
  std::string pointwise;
};

int cmd_rank(const RankArgs& a, const std::vector<std::string>& argv) {
  RelevanceMethod method;
  try {
    method = parse_method(a.method);
  } catch (const InvalidArgument& e) {
    throw FlagError(e.what());
  }
  if (!(a.delta > 0.0)) throw FlagError("--delta must be positive");
  if (a.quad_order < 1 || a.quad_order > 100) throw FlagError("--quad-order must be in [1, 100]");

  Manifest manifest{"rank", argv};
  std::ifstream in(a.model);
  if (!in) throw DataError("cannot open model '" + a.model + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model '" + a.model + "' is not valid JSON: " + e.what());
  }
  const ModelDocument doc = model_from_json(j);
  manifest.input(a.model);

  RelevanceConfig cfg;
  cfg.delta = a.delta;
  cfg.quad_order = a.quad_order;
  RelevanceReport report;
  try {
    report = compute_relevance(doc.model, method, cfg);
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    std::cerr << "error: relevance computation failed: " << e.what() << '\n';
    return kFitOrMethodError;
  }

  const std::string csv = report_csv(report, doc.column_names);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(a.out, csv);
    manifest.output(a.out);
  }
  if (!a.json_out.empty()) {
    write_file_atomic(a.json_out, dump_json(to_json(report, doc.column_names)));
    manifest.output(a.json_out);
  }
  if (!a.pointwise.empty()) {
    if (report.pointwise) {
      write_file_atomic(a.pointwise, pointwise_csv(report, doc.column_names));
      manifest.output(a.pointwise);
    } else {
      log::warn("--pointwise ignored: " + to_string(method) + " has no pointwise relevances");
    }
  }

  manifest.config = {{"method", to_string(method)}, {"delta", a.delta}, {"quad_order", a.quad_order}};
  std::string manifest_path = !a.out.empty() ? a.out : !a.json_out.empty() ? a.json_out : "";
  if (!manifest_path.empty()) manifest.write(manifest_path + ".manifest.json");
  return kOk;
}

// ---------------------------------------------------------------- toygen

struct ToygenArgs {
  ToyConfig cfg;
  std::string dist;
  std::string out;
};

int cmd_toygen(ToygenArgs a, const std::vector<std::string>& argv) {
  try {
    a.cfg.dist = parse_distribution(a.dist);
  } catch (const InvalidArgument& e) {
    throw FlagError(e.what());
  }
  if (a.cfg.n < 1) throw FlagError("--n must be positive");
  if (a.cfg.p_irrelevant < 0) throw FlagError("--irrelevant must be >= 0");
  if (a.cfg.p_relevant < 1) throw FlagError("--relevant must be >= 1");
  if (a.cfg.noise_sd < 0.0) throw FlagError("--noise-sd must be >= 0");

  Manifest manifest{"toygen", argv};
  write_file_atomic(a.out, to_csv(generate_toy(a.cfg)));
  manifest.output(a.out);
  manifest.seed = a.cfg.seed;
  manifest.config = {{"n", a.cfg.n},
                     {"dist", a.dist},
                     {"relevant", a.cfg.p_relevant},
                     {"irrelevant", a.cfg.p_irrelevant},
                     {"noise_sd", a.cfg.noise_sd}};
  manifest.write(a.out + ".manifest.json");
  return kOk;
}

// ------------------------------------------------------------- benchmark

struct BenchmarkArgs {
  std::string data;
  std::string target;
  std::string methods = "ard,kl,var";
  int n_train = 0;
  int resamples = 20;
  std::uint64_t seed = 0;
  std::string out_dir;
  int restarts = 5;
  double delta = 1e-4;
  int quad_order = 32;
  PriorFlags priors;
};

std::string curves_csv(const BenchmarkResult& r) {
  std::string out = "method,size,utility,mean,ci_half_width,resamples_used\n";
  for (const auto& m : r.methods) {
    const SelectionCurve& c = m.curve;
    for (std::size_t k = 0; k < c.sizes.size(); ++k) {
      const std::string prefix = to_string(c.method) + "," + std::to_string(c.sizes[k]) + ",";
      const std::string used = std::to_string(c.resamples_used);
      out += prefix + "mlpd," + format_double(c.mlpd.mean[k]) + "," +
             format_double(c.mlpd.ci_half_width[k]) + "," + used + "\n";
      out += prefix + "mse," + format_double(c.mse.mean[k]) + "," +
             format_double(c.mse.ci_half_width[k]) + "," + used + "\n";
    }
  }
  return out;
}

std::string entropy_csv(const BenchmarkResult& r) {
  std::string out = "method,step,normalized_entropy\n";
  for (const auto& m : r.methods) {
    if (!m.entropy) continue;
    for (std::size_t k = 0; k < m.entropy->normalized_entropy.size(); ++k) {
      out += to_string(m.curve.method) + "," + std::to_string(k + 1) + "," +
             format_double(m.entropy->normalized_entropy[k]) + "\n";
    }
  }
  return out;
}

int cmd_benchmark(const BenchmarkArgs& a, const std::vector<std::string>& argv) {
  BenchmarkConfig cfg;
  cfg.methods.clear();
  try {
    for (const auto& name : split_commas(a.methods)) cfg.methods.push_back(parse_method(name));
  } catch (const InvalidArgument& e) {
    throw FlagError(e.what());
  }
  if (cfg.methods.empty()) throw FlagError("--methods lists no methods");
  if (a.resamples < 1) throw FlagError("--resamples must be >= 1");
  if (a.restarts < 1) throw FlagError("--restarts must be >= 1");

  Manifest manifest{"benchmark", argv};
  const Dataset data = read_csv(a.data, a.target);
  manifest.input(a.data);
  if (a.n_train < 2 || a.n_train >= data.size()) {
    throw FlagError("--n-train must be in [2, " + std::to_string(data.size()) + ")");
  }

  cfg.n_train = a.n_train;
  cfg.n_resamples = a.resamples;
  cfg.priors = a.priors.priors;
  cfg.opt.restarts = a.restarts;
  cfg.relevance.delta = a.delta;
  cfg.relevance.quad_order = a.quad_order;
  cfg.seed = a.seed;

  const BenchmarkResult result = run_benchmark(data, cfg);

  std::filesystem::create_directories(a.out_dir);
  const std::string curves = (std::filesystem::path(a.out_dir) / "curves.csv").string();
  const std::string entropy = (std::filesystem::path(a.out_dir) / "entropy.csv").string();
  write_file_atomic(curves, curves_csv(result));
  write_file_atomic(entropy, entropy_csv(result));
  manifest.output(curves);
  manifest.output(entropy);

  bool any_completed = false;
  json per_method = json::object();
  for (const auto& m : result.methods) {
    any_completed = any_completed || m.curve.resamples_used > 0;
    per_method[to_string(m.curve.method)] = {{"rankings", m.rankings},
                                             {"resamples", m.used_resamples},
                                             {"resamples_dropped", m.curve.resamples_dropped},
                                             {"failures", m.failures}};
  }
  manifest.seed = a.seed;
  manifest.config = {{"target", a.target},
                     {"methods", a.methods},
                     {"n_train", a.n_train},
                     {"n_total", data.size()},
                     {"resamples", a.resamples},
                     {"restarts", a.restarts},
                     {"delta", a.delta},
                     {"quad_order", a.quad_order},
                     {"priors", a.priors.to_json()},
                     {"resample_failures", result.failures},
                     {"per_method", per_method}};
  manifest.write((std::filesystem::path(a.out_dir) / "manifest.json").string());
  if (!any_completed) {
    std::cerr << "error: no method completed any resample\n";
    return kAllMethodsFailed;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Gaussian-process regression with input relevance estimation", "gprel"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a GP to a CSV dataset and write the model as JSON");
  fit_cmd->add_option("--data", fit_args.data, "Input CSV with header")->required();
  fit_cmd->add_option("--target", fit_args.target, "Name of the target column")->required();
  fit_cmd->add_option("--out", fit_args.out, "Model JSON output path")->required();
  fit_cmd->add_option("--restarts", fit_args.restarts, "Random optimizer restarts")->capture_default_str();
  fit_cmd->add_option("--seed", fit_args.seed, "Random seed")->capture_default_str();
  fit_args.priors.add(fit_cmd);

  RankArgs rank_args;
  auto* rank_cmd = app.add_subcommand("rank", "Rank the inputs of a fitted model by relevance");
  rank_cmd->add_option("--model", rank_args.model, "Model JSON written by 'fit'")->required();
  rank_cmd->add_option("--method", rank_args.method, "ard, kl or var")->required();
  rank_cmd->add_option("--delta", rank_args.delta, "KL perturbation size")->capture_default_str();
  rank_cmd->add_option("--quad-order", rank_args.quad_order, "Gauss-Hermite order for VAR")
      ->capture_default_str();
  rank_cmd->add_option("--out", rank_args.out, "Relevance CSV (default: standard output)");
  rank_cmd->add_option("--json", rank_args.json_out, "Relevance report as JSON");
  rank_cmd->add_option("--pointwise", rank_args.pointwise, "Pointwise relevance CSV");

  ToygenArgs toy_args;
  auto* toy_cmd = app.add_subcommand("toygen", "Generate the additive sine toy dataset");
  toy_cmd->add_option("--n", toy_args.cfg.n, "Number of rows")->capture_default_str();
  toy_cmd->add_option("--dist", toy_args.dist, "Input distribution: uniform or normal")->required();
  toy_cmd->add_option("--relevant", toy_args.cfg.p_relevant, "Relevant inputs")->capture_default_str();
  toy_cmd->add_option("--irrelevant", toy_args.cfg.p_irrelevant, "Irrelevant inputs")
      ->capture_default_str();
  toy_cmd->add_option("--noise-sd", toy_args.cfg.noise_sd, "Noise standard deviation")
      ->capture_default_str();
  toy_cmd->add_option("--seed", toy_args.cfg.seed, "Random seed")->required();
  toy_cmd->add_option("--out", toy_args.out, "Output CSV path")->required();

  BenchmarkArgs bench_args;
  auto* bench_cmd =
      app.add_subcommand("benchmark", "Forward-selection curves and ranking entropy over resamples");
  bench_cmd->add_option("--data", bench_args.data, "Input CSV with header")->required();
  bench_cmd->add_option("--target", bench_args.target, "Name of the target column")->required();
  bench_cmd->add_option("--methods", bench_args.methods, "Comma-separated subset of ard,kl,var")
      ->capture_default_str();
  bench_cmd->add_option("--n-train", bench_args.n_train, "Training points per resample")->required();
  bench_cmd->add_option("--resamples", bench_args.resamples, "Number of train/test splits")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Random seed")->required();
  bench_cmd->add_option("--out-dir", bench_args.out_dir, "Output directory")->required();
  bench_cmd->add_option("--restarts", bench_args.restarts, "Random optimizer restarts per fit")
      ->capture_default_str();
  bench_cmd->add_option("--delta", bench_args.delta, "KL perturbation size")->capture_default_str();
  bench_cmd->add_option("--quad-order", bench_args.quad_order, "Gauss-Hermite order for VAR")
      ->capture_default_str();
  bench_args.priors.add(bench_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return kBadFlags;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_args, args);
    if (rank_cmd->parsed()) return cmd_rank(rank_args, args);
    if (toy_cmd->parsed()) return cmd_toygen(toy_args, args);
    if (bench_cmd->parsed()) return cmd_benchmark(bench_args, args);
  } catch (const FlagError& e) {
    const CLI::App* sub = app.get_subcommands().front();
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return kBadFlags;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const OptimizationFailed& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFitOrMethodError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kBadFlags;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

}  // namespace gprel::cli
