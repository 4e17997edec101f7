#include "gprel/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gprel/errors.hpp"

namespace gprel {

const char* library_version() { return "0.1.0"; }

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json priors_json(const HyperPriors& p) {
  return {{"half_t_df", p.half_t_df},
          {"half_t_scale", p.half_t_scale},
          {"invgamma_shape", p.invgamma_shape},
          {"invgamma_scale", p.invgamma_scale}};
}

}  // namespace

json to_json(const ModelDocument& doc) {
  const FittedGP& g = doc.model;
  const KernelHypers& h = g.hypers();
  json x = json::array();
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    x.push_back(vector_json(g.inputs().row(i).transpose()));
  }
  json out = {
      {"library_version", library_version()},
      {"n", g.size()},
      {"p", g.dim()},
      {"column_names", doc.column_names},
      {"target_name", doc.target_name},
      {"hypers",
       {{"sigma_f", h.sigma_f()},
        {"lengthscales", vector_json(h.lengthscales())},
        {"constant", h.constant()},
        {"sigma_n", h.sigma_n()}}},
      {"X", std::move(x)},
      {"y", vector_json(g.targets())},
      {"log_posterior_at_map", g.log_posterior_at_map()},
      {"prior_config", priors_json(g.priors())},
  };
  if (doc.standardization) {
    const Standardizer& s = *doc.standardization;
    out["standardization"] = {{"x_mean", vector_json(s.x_mean)},
                              {"x_scale", vector_json(s.x_scale)},
                              {"y_mean", s.y_mean},
                              {"y_scale", s.y_scale}};
  }
  return out;
}

ModelDocument model_from_json(const json& j) {
  try {
    const auto n = j.at("n").get<Eigen::Index>();
    const auto p = j.at("p").get<Eigen::Index>();
    const json& rows = j.at("X");
    if (static_cast<Eigen::Index>(rows.size()) != n) throw DataError("model: X has wrong row count");
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd r = vector_from(rows.at(static_cast<std::size_t>(i)));
      if (r.size() != p) throw DataError("model: X row has wrong length");
      x.row(i) = r.transpose();
    }
    Eigen::VectorXd y = vector_from(j.at("y"));
    if (y.size() != n) throw DataError("model: y has wrong length");

    const json& hj = j.at("hypers");
    const Eigen::VectorXd ls = vector_from(hj.at("lengthscales"));
    if (ls.size() != p) throw DataError("model: lengthscales have wrong length");
    const KernelHypers h = KernelHypers::from_natural(
        hj.at("sigma_f").get<double>(), ls, hj.at("constant").get<double>(),
        hj.at("sigma_n").get<double>());
    validate(h);

    HyperPriors priors;
    const json& pj = j.at("prior_config");
    priors.half_t_df = pj.at("half_t_df").get<double>();
    priors.half_t_scale = pj.at("half_t_scale").get<double>();
    priors.invgamma_shape = pj.at("invgamma_shape").get<double>();
    priors.invgamma_scale = pj.at("invgamma_scale").get<double>();
    validate(priors);

    ModelDocument doc{FittedGP::condition(std::move(x), std::move(y), h, priors), {}, "y", {}};
    doc.column_names = j.at("column_names").get<std::vector<std::string>>();
    if (static_cast<Eigen::Index>(doc.column_names.size()) != p) {
      throw DataError("model: column_names has wrong length");
    }
    if (j.contains("target_name")) doc.target_name = j.at("target_name").get<std::string>();
    if (j.contains("standardization")) {
      const json& sj = j.at("standardization");
      Standardizer s;
      s.x_mean = vector_from(sj.at("x_mean"));
      s.x_scale = vector_from(sj.at("x_scale"));
      s.y_mean = sj.at("y_mean").get<double>();
      s.y_scale = sj.at("y_scale").get<double>();
      if (s.x_mean.size() != p || s.x_scale.size() != p) {
        throw DataError("model: standardization has wrong length");
      }
      doc.standardization = s;
    }

    // Invariants of the rebuilt factor and weights.
    const FittedGP& g = doc.model;
    Eigen::MatrixXd ky = kernel_matrix(g.hypers(), g.inputs());
    ky.diagonal().array() += g.hypers().sigma_n() * g.hypers().sigma_n();
    Eigen::MatrixXd target = ky;
    target.diagonal().array() += g.factor().jitter_applied();
    const double rel = (g.factor().reconstruct() - target).norm() / target.norm();
    if (!(rel <= 1e-8)) throw DataError("model: rebuilt factor fails reconstruction check");
    const double ynorm = std::max(g.targets().cwiseAbs().maxCoeff(), 1e-300);
    const double resid = (target * g.alpha() - g.targets()).cwiseAbs().maxCoeff();
    if (!(resid <= 1e-6 * ynorm)) throw DataError("model: rebuilt weights fail residual check");
    const double stored = j.at("log_posterior_at_map").get<double>();
    const double rebuilt = g.log_posterior_at_map();
    const auto ldiag = g.factor().lower().diagonal().array();
    const double cond = std::pow(ldiag.maxCoeff() / ldiag.minCoeff(), 2);
    const double fit_term = std::abs(g.targets().dot(g.alpha())) + static_cast<double>(n);
    const double tol = 1e-6 * std::max(1.0, std::abs(rebuilt)) +
                       cond * std::numeric_limits<double>::epsilon() * fit_term;
    if (!(std::abs(stored - rebuilt) <= tol)) {
      throw DataError("model: stored log_posterior_at_map does not match the data and hypers");
    }
    return doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const NotPositiveDefinite& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

json to_json(const RelevanceReport& report, const std::vector<std::string>& names) {
  const Eigen::VectorXd scaled = report.scaled();
  json vars = json::array();
  std::vector<int> rank_of(report.ranking.size());
  for (std::size_t r = 0; r < report.ranking.size(); ++r) {
    rank_of[static_cast<std::size_t>(report.ranking[r])] = static_cast<int>(r) + 1;
  }
  for (Eigen::Index j = 0; j < report.aggregate.size(); ++j) {
    vars.push_back({{"name", names.at(static_cast<std::size_t>(j))},
                    {"aggregate", report.aggregate(j)},
                    {"scaled", scaled(j)},
                    {"rank", rank_of[static_cast<std::size_t>(j)]}});
  }
  json config = {{"predictive", report.predictive}};
  if (report.method == RelevanceMethod::kl) config["delta"] = report.config.delta;
  if (report.method == RelevanceMethod::var) config["quad_order"] = report.config.quad_order;
  return {{"method", to_string(report.method)},
          {"variables", std::move(vars)},
          {"ranking", report.ranking},
          {"config", std::move(config)},
          {"library_version", library_version()}};
}

std::string report_csv(const RelevanceReport& report, const std::vector<std::string>& names) {
  const Eigen::VectorXd scaled = report.scaled();
  std::vector<int> rank_of(report.ranking.size());
  for (std::size_t r = 0; r < report.ranking.size(); ++r) {
    rank_of[static_cast<std::size_t>(report.ranking[r])] = static_cast<int>(r) + 1;
  }
  std::string out = "variable,aggregate,scaled,rank\n";
  for (Eigen::Index j = 0; j < report.aggregate.size(); ++j) {
    out += names.at(static_cast<std::size_t>(j)) + "," + format_double(report.aggregate(j)) + "," +
           format_double(scaled(j)) + "," + std::to_string(rank_of[static_cast<std::size_t>(j)]) +
           "\n";
  }
  return out;
}

std::string pointwise_csv(const RelevanceReport& report, const std::vector<std::string>& names) {
  if (!report.pointwise) throw InvalidArgument("pointwise_csv: report has no pointwise values");
  const Eigen::MatrixXd& m = *report.pointwise;
  std::string out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    out += (j ? "," : "") + names.at(static_cast<std::size_t>(j));
  }
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_double(m(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace gprel
