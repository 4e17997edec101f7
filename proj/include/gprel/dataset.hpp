#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gprel {

struct Dataset {
  Eigen::MatrixXd x;  // n x p
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  std::string target_name = "y";

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }

  Dataset rows(const std::vector<int>& idx) const;
  Dataset columns(const std::vector<int>& idx) const;
};

// Reads a comma-separated file with a header row. The column named
// `target` becomes y, all other columns become inputs in file order.
// Throws DataError naming the row and column of the first bad cell.
Dataset read_csv(const std::string& path, const std::string& target);
Dataset parse_csv(const std::string& text, const std::string& target);

// Header row then one line per observation: inputs in order, target last.
std::string to_csv(const Dataset& data);

// Shortest decimal representation that round-trips.
std::string format_double(double v);

// Column means and standard deviations of the training inputs, plus the
// target mean and standard deviation. Constant columns get scale 1.
struct Standardizer {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;
  double y_mean = 0.0;
  double y_scale = 1.0;

  static Standardizer fit(const Dataset& train);
  Eigen::MatrixXd apply_x(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply_y(const Eigen::VectorXd& y) const;
  Dataset apply(const Dataset& data) const;
  Standardizer columns(const std::vector<int>& idx) const;
};

}  // namespace gprel
