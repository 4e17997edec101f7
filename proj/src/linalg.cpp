#include "gprel/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gprel/errors.hpp"

namespace gprel {

SpdFactor::SpdFactor(Eigen::MatrixXd lower, double jitter_applied)
    : lower_(std::move(lower)), jitter_(jitter_applied) {}

Eigen::MatrixXd SpdFactor::reconstruct() const {
  return lower_.triangularView<Eigen::Lower>() * lower_.transpose();
}

SpdFactor cholesky(const Eigen::MatrixXd& a, const JitterPolicy& policy) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("cholesky: matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  if (a.rows() == 0) throw DimensionMismatch("cholesky: empty matrix");
  if (!a.allFinite()) throw NotPositiveDefinite("cholesky: matrix has non-finite entries");

  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const double mean_diag = sym.diagonal().mean();
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;

  for (double step : policy.ladder) {
    const double jitter = step * scale;
    Eigen::MatrixXd shifted = sym;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    const auto diag = lower.diagonal().array();
    if (!(diag > 0.0).all() || !diag.isFinite().all()) continue;
    const double floor = static_cast<double>(shifted.rows()) *
                         std::numeric_limits<double>::epsilon() *
                         shifted.diagonal().cwiseAbs().maxCoeff();
    if ((diag.square() < floor).any()) continue;
    return SpdFactor(std::move(lower), jitter);
  }
  throw NotPositiveDefinite("cholesky: matrix of dimension " + std::to_string(a.rows()) +
                            " is not positive definite after jitter escalation");
}

namespace {
void check_rows(const SpdFactor& f, Eigen::Index rows) {
  if (rows != f.dim()) {
    throw DimensionMismatch("solve: factor has dimension " + std::to_string(f.dim()) +
                            ", right-hand side has " + std::to_string(rows) + " rows");
  }
}
}  // namespace

Eigen::VectorXd solve_spd(const SpdFactor& f, const Eigen::VectorXd& b) {
  check_rows(f, b.size());
  Eigen::VectorXd x = b;
  const auto l = f.lower().triangularView<Eigen::Lower>();
  l.solveInPlace(x);
  l.transpose().solveInPlace(x);
  return x;
}

Eigen::MatrixXd solve_spd(const SpdFactor& f, const Eigen::MatrixXd& b) {
  check_rows(f, b.rows());
  Eigen::MatrixXd x = b;
  const auto l = f.lower().triangularView<Eigen::Lower>();
  l.solveInPlace(x);
  l.transpose().solveInPlace(x);
  return x;
}

Eigen::VectorXd solve_lower(const SpdFactor& f, const Eigen::VectorXd& b) {
  check_rows(f, b.size());
  Eigen::VectorXd x = b;
  f.lower().triangularView<Eigen::Lower>().solveInPlace(x);
  return x;
}

double log_det(const SpdFactor& f) {
  return 2.0 * f.lower().diagonal().array().log().sum();
}

void rank_one_update(Eigen::Ref<Eigen::MatrixXd> lower, Eigen::VectorXd v) {
  const Eigen::Index n = lower.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double diag = lower(k, k);
    const double r = std::hypot(diag, v(k));
    const double c = r / diag;
    const double s = v(k) / diag;
    lower(k, k) = r;
    const Eigen::Index tail = n - k - 1;
    if (tail == 0) break;
    auto col = lower.col(k).tail(tail);
    auto rest = v.tail(tail);
    col = (col + s * rest) / c;
    rest = c * rest - s * col;
  }
}

SpdFactor delete_index_factor(const SpdFactor& f, Eigen::Index j) {
  const Eigen::Index n = f.dim();
  if (j < 0 || j >= n) {
    throw IndexOutOfRange("delete_index_factor: index " + std::to_string(j) +
                          " outside [0, " + std::to_string(n) + ")");
  }
  if (n < 2) throw IndexOutOfRange("delete_index_factor: needs dimension >= 2");

  const Eigen::MatrixXd& l = f.lower();
  const Eigen::Index tail = n - j - 1;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n - 1, n - 1);
  out.topLeftCorner(j, j) = l.topLeftCorner(j, j);
  if (tail > 0) {
    out.bottomLeftCorner(tail, j) = l.bottomLeftCorner(tail, j);
    out.bottomRightCorner(tail, tail) = l.bottomRightCorner(tail, tail);
    rank_one_update(out.bottomRightCorner(tail, tail), l.col(j).tail(tail));
  }
  return SpdFactor(std::move(out), f.jitter_applied());
}

}  // namespace gprel
