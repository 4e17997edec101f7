#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gprel/errors.hpp"
#include "gprel/experiments.hpp"
#include "gprel/log.hpp"
#include "gprel/relevance.hpp"
#include "test_util.hpp"

using namespace gprel;
using gprel::testing::random_matrix;
using gprel::testing::random_vector;
using gprel::testing::rel_err;

namespace {

const HyperPriors kFlat{1e8, 1e8, 1e-5, 1e-5};

FittedGP fitted_toy(std::uint64_t seed, int n, InputDistribution dist, int restarts = 2) {
  ToyConfig cfg;
  cfg.n = n;
  cfg.dist = dist;
  cfg.seed = seed;
  const Dataset d = generate_toy(cfg);
  OptimizerConfig opt;
  opt.restarts = restarts;
  opt.seed = seed;
  return fit(d.x, d.y, {}, opt);
}

// y depends on the first column only; the second is a dummy.
FittedGP fitted_with_dummy(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd x = random_matrix(60, 2, rng, -2.0, 2.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i) y(i) = std::sin(1.5 * x(i, 0)) + noise(rng);
  OptimizerConfig opt;
  opt.seed = seed;
  return fit(x, y, kFlat, opt);
}

// Every sign pattern of each base point, with a target odd in each coordinate.
FittedGP fitted_sign_symmetric(std::uint64_t seed, int p, int base) {
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd b = random_matrix(base, p, rng, -2.0, 2.0);
  const int flips = 1 << p;
  Eigen::MatrixXd x(base * flips, p);
  for (int i = 0; i < base; ++i) {
    for (int m = 0; m < flips; ++m) {
      for (int j = 0; j < p; ++j) x(i * flips + m, j) = ((m >> j) & 1) ? -b(i, j) : b(i, j);
    }
  }
  std::normal_distribution<double> noise(0.0, 0.05);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y(i) = std::sin(x(i, 0)) + 0.8 * x(i, 1) + 0.5 * std::tanh(x(i, 2)) + noise(rng);
  }
  OptimizerConfig opt;
  opt.restarts = 1;
  opt.seed = seed;
  return fit(x, y, {}, opt);
}

// Central difference of the predictive mean along coordinate j.
double mean_derivative(const FittedGP& g, const Eigen::VectorXd& x, Eigen::Index j, double h) {
  Eigen::VectorXd hi = x;
  Eigen::VectorXd lo = x;
  hi(j) += h;
  lo(j) -= h;
  return (g.predict_mean(hi) - g.predict_mean(lo)) / (2.0 * h);
}

}  // namespace

TEST(Ranking, DescendingWithIndexTieBreak) {
  EXPECT_EQ(rank_descending(Eigen::Vector4d(0.5, 2.0, 0.5, 3.0)), (std::vector<int>{3, 1, 0, 2}));
  EXPECT_EQ(rank_descending(Eigen::Vector3d::Ones()), (std::vector<int>{0, 1, 2}));
}

TEST(Ranking, MethodNames) {
  EXPECT_EQ(parse_method("kl"), RelevanceMethod::kl);
  EXPECT_EQ(to_string(RelevanceMethod::var), "var");
  EXPECT_THROW(parse_method("hmc"), InvalidArgument);
}

TEST(KlGaussian, EqualIsZero) {
  const GaussianPredictive p{0.3, 1.7, PredictiveFlavor::observation};
  EXPECT_EQ(kl_gaussian(p, p), 0.0);
}

TEST(KlGaussian, ClosedFormCases) {
  EXPECT_NEAR(kl_gaussian({0, 1, {}}, {1, 1, {}}), 0.5, 1e-15);
  EXPECT_NEAR(kl_gaussian({0, 1, {}}, {0, 4, {}}), std::log(2.0) + 0.125 - 0.5, 1e-15);
}

TEST(KlGaussian, MatchesTextbookFormOnRandomPairs) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> mu(-2, 2);
  std::uniform_real_distribution<double> var(0.1, 3);
  for (int i = 0; i < 100; ++i) {
    const GaussianPredictive p{mu(rng), var(rng), {}};
    const GaussianPredictive q{mu(rng), var(rng), {}};
    const double want = std::log(std::sqrt(q.variance / p.variance)) +
                        (p.variance + (p.mean - q.mean) * (p.mean - q.mean)) / (2 * q.variance) -
                        0.5;
    EXPECT_NEAR(kl_gaussian(p, q), want, 1e-13);
    EXPECT_GE(kl_gaussian(p, q), 0.0);
  }
}

TEST(KlGaussian, NonPositiveVarianceThrows) {
  EXPECT_THROW(kl_gaussian({0, 0, {}}, {0, 1, {}}), NonPositiveVariance);
  EXPECT_THROW(kl_gaussian({0, 1, {}}, {0, -1, {}}), NonPositiveVariance);
}

TEST(KlBernoulli, Cases) {
  EXPECT_EQ(kl_bernoulli(0.3, 0.3), 0.0);
  EXPECT_NEAR(kl_bernoulli(0.5, 0.25), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  EXPECT_GT(std::abs(kl_bernoulli(0.9, 0.5) - kl_bernoulli(0.5, 0.9)), 1e-3);
}

TEST(KlBernoulli, ClampsEndpoints) {
  EXPECT_TRUE(std::isfinite(kl_bernoulli(0.0, 1.0)));
  EXPECT_TRUE(std::isfinite(kl_bernoulli(1.0, 0.0)));
  EXPECT_GT(kl_bernoulli(1.0, 0.5), 0.0);
  EXPECT_EQ(kl_bernoulli(0.0, 0.0), 0.0);
}

TEST(Ard, InverseLengthscales) {
  std::mt19937_64 rng(2);
  const KernelHypers h = KernelHypers::from_natural(1.0, Eigen::Vector3d(1, 2, 4), 0.1, 0.1);
  const FittedGP g = FittedGP::condition(random_matrix(10, 3, rng), random_vector(10, rng), h);
  const RelevanceReport r = ard_relevance(g);
  EXPECT_NEAR(r.aggregate(0), 1.0, 1e-15);
  EXPECT_NEAR(r.aggregate(1), 0.5, 1e-15);
  EXPECT_NEAR(r.aggregate(2), 0.25, 1e-15);
  EXPECT_EQ(r.ranking, (std::vector<int>{0, 1, 2}));
  EXPECT_FALSE(r.pointwise.has_value());
  EXPECT_EQ(r.method, RelevanceMethod::ard);
}

TEST(Ard, EqualLengthscalesGiveIdentityRanking) {
  std::mt19937_64 rng(3);
  const KernelHypers h = KernelHypers::from_natural(1.0, Eigen::VectorXd::Constant(5, 0.7), 0.1, 0.1);
  const FittedGP g = FittedGP::condition(random_matrix(10, 5, rng), random_vector(10, rng), h);
  EXPECT_EQ(ard_relevance(g).ranking, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Report, ScaledPreservesRanking) {
  const FittedGP g = fitted_toy(4, 80, InputDistribution::uniform, 1);
  for (RelevanceMethod m : {RelevanceMethod::ard, RelevanceMethod::kl, RelevanceMethod::var}) {
    const RelevanceReport r = compute_relevance(g, m);
    const Eigen::VectorXd s = r.scaled();
    EXPECT_DOUBLE_EQ(s.maxCoeff(), 1.0);
    EXPECT_EQ(rank_descending(s), r.ranking);
    EXPECT_TRUE(r.aggregate.allFinite());
    EXPECT_GE(r.aggregate.minCoeff(), 0.0);
  }
}

TEST(KlRelevance, DummyColumnIsIrrelevant) {
  const FittedGP g = fitted_with_dummy(5);
  ASSERT_GE(g.hypers().lengthscales()(1), 1e3);
  for (Eigen::Index i = 0; i < g.size(); i += 7) {
    const Eigen::VectorXd x = g.inputs().row(i).transpose();
    const double r0 = kl_relevance_point(g, x, 0, 1e-4);
    const double r1 = kl_relevance_point(g, x, 1, 1e-4);
    EXPECT_LT(r1, 1e-3 * std::max(r0, r1));
  }
}

TEST(KlRelevance, DerivativeLimitOnFittedModel) {
  // Inputs closed under sign flips give a predictive variance that is flat in x_j at x_j = 0.
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const FittedGP g = fitted_sign_symmetric(seed, 3, 30);
    std::mt19937_64 rng(100 + seed);
    for (int q = 0; q < 10; ++q) {
      for (Eigen::Index j = 0; j < 3; ++j) {
        Eigen::VectorXd x = random_vector(3, rng, -1.5, 1.5);
        x(j) = 0.0;
        const double var = predict(g, x, PredictiveFlavor::observation).variance;
        const double want = std::abs(mean_derivative(g, x, j, 1e-3)) / std::sqrt(var);
        EXPECT_LT(rel_err(kl_relevance_point(g, x, j, 1e-4), want), 1e-3)
            << "seed " << seed << " q " << q << " j " << j;
      }
    }
  }
}

TEST(KlRelevance, InsensitiveToDelta) {
  const FittedGP g = fitted_toy(7, 80, InputDistribution::normal, 1);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = g.inputs().row(i).transpose();
    for (Eigen::Index j = 0; j < 8; ++j) {
      const double a = kl_relevance_point(g, x, j, 1e-5);
      const double b = kl_relevance_point(g, x, j, 1e-3);
      EXPECT_LT(rel_err(a, b), 1e-2) << "i " << i << " j " << j;
    }
  }
}

TEST(KlRelevance, ReportStructure) {
  const FittedGP g = fitted_toy(8, 50, InputDistribution::uniform, 1);
  const RelevanceReport r = kl_relevance(g, 1e-4);
  ASSERT_TRUE(r.pointwise.has_value());
  EXPECT_EQ(r.pointwise->rows(), 50);
  EXPECT_EQ(r.pointwise->cols(), 8);
  EXPECT_EQ(r.predictive, "observation");
  EXPECT_EQ(r.config.delta, 1e-4);
  EXPECT_GE(r.pointwise->minCoeff(), 0.0);
  for (Eigen::Index j = 0; j < 8; ++j) EXPECT_NEAR(r.aggregate(j), r.pointwise->col(j).mean(), 1e-12);
  EXPECT_EQ(r.pointwise->coeff(3, 5), kl_relevance_point(g, g.inputs().row(3).transpose(), 5, 1e-4));
}

TEST(KlRelevance, SinglePointAndDuplicatedRows) {
  const FittedGP g = fitted_toy(9, 50, InputDistribution::uniform, 1);
  const Eigen::MatrixXd one = g.inputs().topRows(1);
  const RelevanceReport r1 = kl_relevance(g, one, 1e-4);
  EXPECT_EQ(r1.aggregate, r1.pointwise->row(0).transpose());

  const Eigen::MatrixXd x = g.inputs().topRows(10);
  Eigen::MatrixXd doubled(20, 8);
  doubled << x, x;
  const RelevanceReport a = kl_relevance(g, x, 1e-4);
  const RelevanceReport b = kl_relevance(g, doubled, 1e-4);
  EXPECT_LT((a.aggregate - b.aggregate).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KlRelevance, WarnsOutsideSafeDeltaRange) {
  const FittedGP g = fitted_toy(10, 30, InputDistribution::uniform, 1);
  std::vector<std::string> lines;
  const log::Sink previous = log::set_sink([&](const std::string& m) { lines.push_back(m); });
  kl_relevance(g, 1e-9);
  kl_relevance(g, 1e-4);
  log::set_sink(previous);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_NE(lines[0].find("delta"), std::string::npos);
  EXPECT_THROW(kl_relevance(g, 0.0), InvalidArgument);
}

TEST(ConditionalVariance, LinearMapIsExact) {
  const Eigen::Vector3d x(0.2, -0.4, 1.1);
  const Conditional1D cond{0.3, 0.7};
  const auto f = [](const Eigen::VectorXd& q) { return 2.5 * q(1) - 0.8 * q(0) + 4.0; };
  for (int order : {2, 3, 8, 32}) {
    const double v = conditional_variance(f, x, 1, cond, gauss_hermite(order));
    EXPECT_LT(rel_err(v, 2.5 * 2.5 * 0.49), 1e-8) << "order " << order;
  }
}

TEST(ConditionalVariance, QuadraticMapMoments) {
  // Var[z^2] for z ~ N(m, s^2) is 2 s^4 + 4 m^2 s^2.
  const Eigen::Vector2d x(0.0, 0.0);
  const Conditional1D cond{0.6, 0.9};
  const auto f = [](const Eigen::VectorXd& q) { return q(0) * q(0); };
  const double want = 2 * std::pow(0.9, 4) + 4 * 0.36 * 0.81;
  EXPECT_LT(rel_err(conditional_variance(f, x, 0, cond, gauss_hermite(3)), want), 1e-12);
}

TEST(VarRelevance, DummyColumnIsNearZero) {
  const FittedGP g = fitted_with_dummy(5);
  ASSERT_GE(g.hypers().lengthscales()(1), 1e3);
  const RelevanceReport r = var_relevance(g);
  EXPECT_LT(r.aggregate(1), 1e-6 * r.aggregate.maxCoeff());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    EXPECT_LT(r.pointwise->coeff(i, 1), 1e-6 * r.aggregate.maxCoeff());
}

TEST(VarRelevance, PureNoiseHasSmallRelevance) {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd x = random_matrix(100, 3, rng);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) y(i) = z(rng);
  OptimizerConfig opt;
  opt.seed = 12;
  const FittedGP g = fit(x, y, {}, opt);
  const double var_y = (y.array() - y.mean()).square().sum() / 99.0;
  const RelevanceReport r = var_relevance(g);
  EXPECT_LT(r.aggregate.maxCoeff(), 1e-2 * var_y);
}

TEST(VarRelevance, ReportStructureAndSinglePoint) {
  const FittedGP g = fitted_toy(13, 50, InputDistribution::normal, 1);
  const InputGaussian im = estimate(g.inputs());
  const GaussHermiteRule rule = gauss_hermite(20);
  const RelevanceReport r = var_relevance(g, im, g.inputs(), rule);
  EXPECT_EQ(r.predictive, "latent");
  EXPECT_EQ(r.config.quad_order, 20);
  for (Eigen::Index j = 0; j < 8; ++j) EXPECT_NEAR(r.aggregate(j), r.pointwise->col(j).mean(), 1e-12);
  const RelevanceReport one = var_relevance(g, im, g.inputs().topRows(1), rule);
  EXPECT_EQ(one.aggregate, one.pointwise->row(0).transpose());
  EXPECT_EQ(one.pointwise->coeff(0, 2),
            var_relevance_point(g, im, g.inputs().row(0).transpose(), 2, rule));
}

TEST(VarRelevance, OrderConvergence) {
  const FittedGP g = fitted_toy(14, 80, InputDistribution::uniform, 1);
  const InputGaussian im = estimate(g.inputs());
  const GaussHermiteRule r16 = gauss_hermite(16);
  const GaussHermiteRule r32 = gauss_hermite(32);
  for (Eigen::Index i = 0; i < 10; ++i) {
    const Eigen::VectorXd x = g.inputs().row(i).transpose();
    for (Eigen::Index j = 0; j < 8; ++j) {
      const double a = var_relevance_point(g, im, x, j, r16);
      const double b = var_relevance_point(g, im, x, j, r32);
      EXPECT_LT(rel_err(a, b), 1e-4) << "i " << i << " j " << j;
    }
  }
}

TEST(VarRelevance, InvalidArguments) {
  const FittedGP g = fitted_toy(15, 30, InputDistribution::uniform, 1);
  const InputGaussian im = estimate(g.inputs());
  const GaussHermiteRule rule = gauss_hermite(8);
  EXPECT_THROW(var_relevance_point(g, im, g.inputs().row(0).transpose(), 8, rule), IndexOutOfRange);
  EXPECT_THROW(kl_relevance_point(g, g.inputs().row(0).transpose(), -1, 1e-4), IndexOutOfRange);
  const InputGaussian small = estimate(g.inputs().leftCols(3));
  EXPECT_THROW(var_relevance_point(g, small, g.inputs().row(0).transpose(), 0, rule),
               DimensionMismatch);
}

TEST(Relevance, ColumnPermutationEquivariant) {
  ToyConfig cfg;
  cfg.n = 60;
  cfg.p_relevant = 4;
  cfg.seed = 16;
  const Dataset d = generate_toy(cfg);
  const std::vector<int> perm{2, 0, 3, 1};
  const Dataset dp = d.columns(perm);

  OptimizerConfig opt;
  opt.restarts = 0;
  Eigen::VectorXd start(7);
  start << 0.1, -0.2, 0.3, 0.05, -0.1, -0.5, -1.0;
  opt.initial_points = {start};
  const FittedGP g = fit(d.x, d.y, {}, opt);

  Eigen::VectorXd start_p = start;
  for (int k = 0; k < 4; ++k) start_p(1 + k) = start(1 + perm[k]);
  OptimizerConfig opt_p = opt;
  opt_p.initial_points = {start_p};
  const FittedGP gp = fit(dp.x, dp.y, {}, opt_p);

  for (RelevanceMethod m : {RelevanceMethod::ard, RelevanceMethod::kl, RelevanceMethod::var}) {
    const RelevanceReport a = compute_relevance(g, m);
    const RelevanceReport b = compute_relevance(gp, m);
    for (int k = 0; k < 4; ++k)
      EXPECT_LT(rel_err(b.aggregate(k), a.aggregate(perm[k])), 1e-6) << to_string(m) << " " << k;
    for (int k = 0; k < 4; ++k) EXPECT_EQ(perm[b.ranking[k]], a.ranking[k]) << to_string(m);
  }
}
