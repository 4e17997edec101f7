#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gprel {

// Diagonal offsets tried in order when a matrix does not factorize. Each
// entry is a multiple of mean(diag(A)); the first entry is normally 0.
struct JitterPolicy {
  std::vector<double> ladder{0.0, 1e-10, 1e-8, 1e-6, 1e-4};
};

// Lower Cholesky factor L of a symmetric positive definite matrix A + jI,
// where j = jitter_applied(). Immutable once built.
class SpdFactor {
 public:
  SpdFactor() = default;
  SpdFactor(Eigen::MatrixXd lower, double jitter_applied);

  const Eigen::MatrixXd& lower() const { return lower_; }
  Eigen::Index dim() const { return lower_.rows(); }
  double jitter_applied() const { return jitter_; }

  // L * L^T
  Eigen::MatrixXd reconstruct() const;

 private:
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

// Factorizes (A + A^T)/2, escalating along the jitter ladder on failure.
// Throws NotPositiveDefinite once the ladder is exhausted.
SpdFactor cholesky(const Eigen::MatrixXd& a, const JitterPolicy& policy = {});

// Solves (L L^T) x = b.
Eigen::VectorXd solve_spd(const SpdFactor& f, const Eigen::VectorXd& b);
Eigen::MatrixXd solve_spd(const SpdFactor& f, const Eigen::MatrixXd& b);

// Solves L x = b (forward substitution only).
Eigen::VectorXd solve_lower(const SpdFactor& f, const Eigen::VectorXd& b);

// log det(L L^T) = 2 sum log L_ii
double log_det(const SpdFactor& f);

// In-place update of a lower-triangular factor so that
// L' L'^T = L L^T + v v^T. Uses sequential Givens-style rotations.
void rank_one_update(Eigen::Ref<Eigen::MatrixXd> lower, Eigen::VectorXd v);

// Factor of the matrix with row and column j removed, obtained from the full
// factor by a rank-one update of the trailing block in O((n-j)^2).
SpdFactor delete_index_factor(const SpdFactor& f, Eigen::Index j);

}  // namespace gprel
