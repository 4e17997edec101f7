#include "gprel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gprel/errors.hpp"

namespace gprel {

Dataset Dataset::rows(const std::vector<int>& idx) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(idx[k]);
    out.y(static_cast<Eigen::Index>(k)) = y(idx[k]);
  }
  out.column_names = column_names;
  out.target_name = target_name;
  return out;
}

Dataset Dataset::columns(const std::vector<int>& idx) const {
  Dataset out;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.x.col(static_cast<Eigen::Index>(k)) = x.col(idx[k]);
    out.column_names.push_back(column_names.at(static_cast<std::size_t>(idx[k])));
  }
  out.y = y;
  out.target_name = target_name;
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, long row, const std::string& column) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw DataError("non-numeric value '" + cell + "' at row " + std::to_string(row) +
                        ", column '" + column + "'",
                    row, column);
  }
  return value;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& target) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: missing header row");
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  int target_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == target) target_col = static_cast<int>(c);
  }
  if (target_col < 0) throw DataError("target column '" + target + "' not found in header");

  Dataset data;
  data.target_name = target;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) != target_col) data.column_names.push_back(header[c]);
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  long row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                          " cells, header has " + std::to_string(header.size()),
                      row);
    }
    std::vector<double> values;
    values.reserve(header.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], row, header[c]);
      if (static_cast<int>(c) == target_col) {
        ys.push_back(v);
      } else {
        values.push_back(v);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("CSV has a header but no data rows");

  data.x.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(data.column_names.size()));
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    data.y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return data;
}

Dataset read_csv(const std::string& path, const std::string& target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), target);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& name : data.column_names) out += name + ",";
  out += data.target_name + "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index c = 0; c < data.dim(); ++c) out += format_double(data.x(i, c)) + ",";
    out += format_double(data.y(i)) + "\n";
  }
  return out;
}

Standardizer Standardizer::fit(const Dataset& train) {
  Standardizer s;
  const double n = static_cast<double>(train.size());
  s.x_mean = train.x.colwise().mean().transpose();
  s.x_scale.resize(train.dim());
  for (Eigen::Index c = 0; c < train.dim(); ++c) {
    const double ss = (train.x.col(c).array() - s.x_mean(c)).square().sum();
    const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.x_scale(c) = sd > 0.0 ? sd : 1.0;
  }
  s.y_mean = train.y.mean();
  const double yss = (train.y.array() - s.y_mean).square().sum();
  const double ysd = n > 1 ? std::sqrt(yss / (n - 1.0)) : 0.0;
  s.y_scale = ysd > 0.0 ? ysd : 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply_x(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - x_mean.transpose()).array().rowwise() / x_scale.transpose().array();
}

Eigen::VectorXd Standardizer::apply_y(const Eigen::VectorXd& y) const {
  return (y.array() - y_mean) / y_scale;
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out = data;
  out.x = apply_x(data.x);
  out.y = apply_y(data.y);
  return out;
}

Standardizer Standardizer::columns(const std::vector<int>& idx) const {
  Standardizer s = *this;
  s.x_mean.resize(static_cast<Eigen::Index>(idx.size()));
  s.x_scale.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    s.x_mean(static_cast<Eigen::Index>(k)) = x_mean(idx[k]);
    s.x_scale(static_cast<Eigen::Index>(k)) = x_scale(idx[k]);
  }
  return s;
}

}  // namespace gprel
