#pragma once

#include "json.hpp"
#include <optional>
#include <string>
#include <vector>

#include "gprel/dataset.hpp"
#include "gprel/gp.hpp"
#include "gprel/relevance.hpp"

namespace gprel {

const char* library_version();

// A fitted model plus the metadata needed to use it on raw data.
struct ModelDocument {
  FittedGP model;
  std::vector<std::string> column_names;
  std::string target_name = "y";
  std::optional<Standardizer> standardization;
};

nlohmann::json to_json(const ModelDocument& doc);

// Rebuilds the factor and weights from the stored data and hypers, then
// checks them: reconstruction to 1e-8 relative Frobenius and solve residual
// to 1e-6 ||y||_inf. Throws DataError on malformed or inconsistent input.
ModelDocument model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RelevanceReport& report, const std::vector<std::string>& names);

// One row per variable: name, aggregate, scaled aggregate, 1-based rank.
std::string report_csv(const RelevanceReport& report, const std::vector<std::string>& names);

// Header of variable names, one row per evaluation point.
std::string pointwise_csv(const RelevanceReport& report, const std::vector<std::string>& names);

}  // namespace gprel
