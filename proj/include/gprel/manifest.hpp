#pragma once

#include "json.hpp"
#include <string>

namespace gprel {

// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

// Writes to "<path>.tmp" and renames over `path` once the write succeeded.
void write_file_atomic(const std::string& path, const std::string& contents);

// Pretty-printed with two-space indent; keys are sorted.
std::string dump_json(const nlohmann::json& j);

}  // namespace gprel
