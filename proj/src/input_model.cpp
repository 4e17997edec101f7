#include "gprel/input_model.hpp"

#include <cmath>
#include <string>

#include "gprel/errors.hpp"

namespace gprel {

namespace {

Eigen::VectorXd without(const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::Index j) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd out(n - 1);
  out.head(j) = v.head(j);
  out.tail(n - j - 1) = v.tail(n - j - 1);
  return out;
}

}  // namespace

InputGaussian estimate(const Eigen::MatrixXd& x, const JitterPolicy& policy) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 2) throw InvalidArgument("estimate: need at least two rows");
  if (p < 1) throw InvalidArgument("estimate: need at least one column");
  if (n < p) {
    throw InvalidArgument("estimate: n = " + std::to_string(n) + " < p = " + std::to_string(p) +
                          "; covariance shrinkage is not supported");
  }
  if (!x.allFinite()) throw InvalidArgument("estimate: non-finite input values");

  InputGaussian im;
  im.mu_ = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - im.mu_.transpose();
  im.sigma_ = (centered.transpose() * centered) / static_cast<double>(n - 1);
  im.sigma_ = 0.5 * (im.sigma_ + im.sigma_.transpose());

  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(im.sigma_(j, j) > 0.0)) {
      throw DegenerateInputs("estimate: column " + std::to_string(j) + " has zero variance");
    }
  }
  try {
    im.factor_ = cholesky(im.sigma_, policy);
  } catch (const NotPositiveDefinite& e) {
    throw DegenerateInputs(std::string("estimate: ") + e.what());
  }

  const double jitter = im.factor_.jitter_applied();
  if (p == 1) {
    im.cond_var_.push_back(im.sigma_(0, 0) + jitter);
    im.cross_.emplace_back();
    return im;
  }

  im.deleted_.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    im.deleted_.push_back(delete_index_factor(im.factor_, j));
    const Eigen::VectorXd col = without(im.sigma_.col(j), j);
    Eigen::VectorXd u = solve_lower(im.deleted_.back(), col);
    im.cond_var_.push_back(im.sigma_(j, j) + jitter - u.squaredNorm());
    im.cross_.push_back(std::move(u));
  }
  return im;
}

Conditional1D conditional_1d(const InputGaussian& im, Eigen::Index j,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index p = im.dim();
  if (j < 0 || j >= p) {
    throw IndexOutOfRange("conditional_1d: index " + std::to_string(j) + " outside [0, " +
                          std::to_string(p) + ")");
  }
  if (x.size() != p) throw DimensionMismatch("conditional_1d: point has wrong dimension");

  const auto ju = static_cast<std::size_t>(j);
  // Guard against a Schur complement that rounds to <= 0 for nearly
  // collinear inputs.
  const double var = std::max(im.cond_var_[ju], 1e-12 * im.sigma_(j, j));
  if (p == 1) return {im.mu_(0), std::sqrt(var)};

  const Eigen::VectorXd z = solve_lower(im.deleted_[ju], without(x - im.mu_, j));
  return {im.mu_(j) + im.cross_[ju].dot(z), std::sqrt(var)};
}

}  // namespace gprel
