#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gprel/errors.hpp"
#include "gprel/linalg.hpp"
#include "test_util.hpp"

using namespace gprel;
using gprel::testing::drop_index;
using gprel::testing::random_spd;

namespace {

double rel_frobenius(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).norm() / want.norm();
}

bool lower_with_positive_diagonal(const Eigen::MatrixXd& l) {
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0)) return false;
    for (Eigen::Index j = i + 1; j < l.cols(); ++j)
      if (l(i, j) != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST(Cholesky, IdentityHasIdentityFactor) {
  const SpdFactor f = cholesky(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(f.lower().isApprox(Eigen::MatrixXd::Identity(3, 3), 0.0));
  EXPECT_EQ(f.jitter_applied(), 0.0);
  EXPECT_EQ(f.dim(), 3);
}

TEST(Cholesky, TwoByTwoReconstructs) {
  Eigen::MatrixXd a(2, 2);
  a << 4, 2, 2, 3;
  const SpdFactor f = cholesky(a);
  EXPECT_EQ(f.jitter_applied(), 0.0);
  EXPECT_TRUE(lower_with_positive_diagonal(f.lower()));
  const Eigen::MatrixXd r = f.lower() * f.lower().transpose();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(r(i, j), a(i, j), 1e-12);
}

TEST(Cholesky, RankDeficientGetsJitter) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(2, 2);
  const SpdFactor f = cholesky(a);
  EXPECT_GT(f.jitter_applied(), 0.0);
  const Eigen::MatrixXd want = a + f.jitter_applied() * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_LT(rel_frobenius(f.reconstruct(), want), 1e-10);
}

TEST(Cholesky, SymmetrizesInput) {
  Eigen::MatrixXd a(2, 2);
  a << 4, 1, 3, 3;
  const SpdFactor f = cholesky(a);
  Eigen::MatrixXd sym(2, 2);
  sym << 4, 2, 2, 3;
  EXPECT_LT(rel_frobenius(f.reconstruct(), sym), 1e-14);
}

TEST(Cholesky, ExhaustedLadderThrows) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, 0, -5;
  EXPECT_THROW(cholesky(a), NotPositiveDefinite);
  EXPECT_THROW(cholesky(Eigen::MatrixXd(2, 3)), DimensionMismatch);
}

TEST(Cholesky, RandomSpdReconstructsProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 40;
    const Eigen::MatrixXd a = random_spd(n, rng);
    const SpdFactor f = cholesky(a);
    ASSERT_EQ(f.jitter_applied(), 0.0);
    EXPECT_TRUE(lower_with_positive_diagonal(f.lower()));
    EXPECT_LE(rel_frobenius(f.reconstruct(), a), 1e-10);
  }
}

TEST(SolveSpd, IdentityReturnsRhs) {
  const SpdFactor f = cholesky(Eigen::MatrixXd::Identity(3, 3));
  const Eigen::VectorXd b = Eigen::Vector3d(1, 2, 3);
  EXPECT_TRUE(solve_spd(f, b).isApprox(b, 0.0));
}

TEST(SolveSpd, TwoByTwoResidual) {
  Eigen::MatrixXd a(2, 2);
  a << 4, 2, 2, 3;
  const Eigen::VectorXd b = Eigen::Vector2d(1, 0);
  const Eigen::VectorXd x = solve_spd(cholesky(a), b);
  EXPECT_LT((a * x - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveSpd, ScalarMatrix) {
  const SpdFactor f = cholesky(2.0 * Eigen::MatrixXd::Identity(2, 2));
  const Eigen::VectorXd x = solve_spd(f, Eigen::VectorXd(Eigen::Vector2d(4, 4)));
  EXPECT_NEAR(x(0), 2.0, 1e-15);
  EXPECT_NEAR(x(1), 2.0, 1e-15);
}

TEST(SolveSpd, MatrixRightHandSide) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = random_spd(7, rng);
  const Eigen::MatrixXd b = gprel::testing::random_matrix(7, 4, rng);
  const Eigen::MatrixXd x = solve_spd(cholesky(a), b);
  EXPECT_LT((a * x - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveSpd, DimensionMismatchThrows) {
  const SpdFactor f = cholesky(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(solve_spd(f, Eigen::VectorXd(Eigen::VectorXd::Ones(2))), DimensionMismatch);
  EXPECT_THROW(solve_spd(f, Eigen::MatrixXd(Eigen::MatrixXd::Ones(4, 2))), DimensionMismatch);
  EXPECT_THROW(solve_lower(f, Eigen::VectorXd::Ones(2)), DimensionMismatch);
}

TEST(SolveSpd, ResidualOnConditionedInputsProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logc(0.0, 6.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + trial;
    // Orthogonal Q times a spectrum spanning up to 1e6.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gprel::testing::random_matrix(n, n, rng));
    const Eigen::MatrixXd q = qr.householderQ();
    const double cond = std::pow(10.0, logc(rng));
    Eigen::VectorXd eigs(n);
    for (Eigen::Index i = 0; i < n; ++i)
      eigs(i) = std::pow(cond, static_cast<double>(i) / static_cast<double>(n - 1));
    const Eigen::MatrixXd a = q * eigs.asDiagonal() * q.transpose();
    const Eigen::VectorXd b = gprel::testing::random_vector(n, rng);
    const SpdFactor f = cholesky(a);
    ASSERT_EQ(f.jitter_applied(), 0.0);
    const Eigen::VectorXd x = solve_spd(f, b);
    EXPECT_LE((a * x - b).cwiseAbs().maxCoeff(), 1e-8 * b.cwiseAbs().maxCoeff());
  }
}

TEST(LogDet, Identity) { EXPECT_EQ(log_det(cholesky(Eigen::MatrixXd::Identity(4, 4))), 0.0); }

TEST(LogDet, Diagonal) {
  const Eigen::MatrixXd a = Eigen::Vector2d(2, 3).asDiagonal();
  EXPECT_NEAR(log_det(cholesky(a)), std::log(6.0), 1e-14);
}

TEST(LogDet, MatchesLuDeterminant) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd a = random_spd(5, rng);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd d = lu.matrixLU().diagonal();
  double sign = (lu.permutationP().determinant() > 0) ? 1.0 : -1.0;
  double logabs = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < 0) sign = -sign;
    logabs += std::log(std::abs(d(i)));
  }
  ASSERT_GT(sign, 0.0);
  EXPECT_NEAR(log_det(cholesky(a)), logabs, 1e-10);
}

TEST(RankOneUpdate, MatchesRefactorization) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 1 + 3 * trial;
    const Eigen::MatrixXd a = random_spd(n, rng);
    const Eigen::VectorXd v = gprel::testing::random_vector(n, rng, -3.0, 3.0);
    Eigen::MatrixXd l = cholesky(a).lower();
    rank_one_update(l, v);
    const Eigen::MatrixXd want = a + v * v.transpose();
    EXPECT_LT(rel_frobenius(l * l.transpose(), want), 1e-12);
    EXPECT_TRUE(lower_with_positive_diagonal(l));
  }
}

TEST(DeleteIndexFactor, IdentityMiddle) {
  const SpdFactor f = delete_index_factor(cholesky(Eigen::MatrixXd::Identity(3, 3)), 1);
  EXPECT_EQ(f.dim(), 2);
  EXPECT_TRUE(f.lower().isApprox(Eigen::MatrixXd::Identity(2, 2), 0.0));
}

TEST(DeleteIndexFactor, EveryIndexOfSixBySix) {
  std::mt19937_64 rng(33);
  const Eigen::MatrixXd a = random_spd(6, rng);
  const SpdFactor f = cholesky(a);
  for (Eigen::Index j = 0; j < 6; ++j) {
    const SpdFactor d = delete_index_factor(f, j);
    EXPECT_LT((d.reconstruct() - drop_index(a, j)).norm(), 1e-10) << "j = " << j;
  }
}

TEST(DeleteIndexFactor, TrailingIndexTruncates) {
  std::mt19937_64 rng(34);
  const SpdFactor f = cholesky(random_spd(5, rng));
  const SpdFactor d = delete_index_factor(f, 4);
  EXPECT_TRUE(d.lower().isApprox(f.lower().topLeftCorner(4, 4), 0.0));
}

TEST(DeleteIndexFactor, KeepsLeadingBlock) {
  std::mt19937_64 rng(35);
  const SpdFactor f = cholesky(random_spd(8, rng));
  const SpdFactor d = delete_index_factor(f, 3);
  EXPECT_TRUE(d.lower().topLeftCorner(3, 3).isApprox(f.lower().topLeftCorner(3, 3), 0.0));
  EXPECT_TRUE(d.lower().bottomLeftCorner(4, 3).isApprox(f.lower().bottomLeftCorner(4, 3), 0.0));
}

TEST(DeleteIndexFactor, InvalidIndexThrows) {
  const SpdFactor f = cholesky(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(delete_index_factor(f, 3), IndexOutOfRange);
  EXPECT_THROW(delete_index_factor(f, -1), IndexOutOfRange);
  EXPECT_THROW(delete_index_factor(cholesky(Eigen::MatrixXd::Identity(1, 1)), 0), IndexOutOfRange);
}

TEST(DeleteIndexFactor, RandomSpdUpToFiftyProperty) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + (trial * 48) / 19;
    const Eigen::MatrixXd a = random_spd(n, rng);
    const SpdFactor f = cholesky(a);
    for (Eigen::Index j = 0; j < n; ++j) {
      const SpdFactor d = delete_index_factor(f, j);
      ASSERT_TRUE(lower_with_positive_diagonal(d.lower()));
      ASSERT_LT((d.reconstruct() - drop_index(a, j)).norm(), 1e-10) << "n = " << n << " j = " << j;
    }
  }
}
