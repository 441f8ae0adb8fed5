#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"
#include "test_support.hpp"

namespace semfuse {
namespace {

TEST(Softmax, ZeroScoresGiveUniform) {
  const auto d = softmax(ClassScores(std::vector<double>(15, 0.0)));
  for (std::size_t i = 0; i < 15; ++i) EXPECT_DOUBLE_EQ(d[i], 1.0 / 15.0);
}

TEST(Softmax, ShiftInvariantForLargeOffsets) {
  std::vector<double> a(15, 0.0), b(15, 1000.0);
  a[0] = 1.0;
  b[0] = 1001.0;
  const auto da = softmax(ClassScores(a));
  const auto db = softmax(ClassScores(b));
  for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(da[i], db[i], 1e-12);
}

TEST(Softmax, MatchesExtendedPrecisionValues) {
  // mpmath, 30 digits.
  const auto d = softmax(ClassScores({2.0, 1.0, 0.0}));
  EXPECT_NEAR(d[0], 0.66524095577482188953, 1e-15);
  EXPECT_NEAR(d[1], 0.24472847105479765247, 1e-15);
  EXPECT_NEAR(d[2], 0.090030573170380457998, 1e-15);
}

TEST(Softmax, RejectsNonFiniteScores) {
  EXPECT_THROW(softmax(ClassScores({0.0, std::numeric_limits<double>::quiet_NaN()})), InvalidInput);
  EXPECT_THROW(softmax(ClassScores({0.0, std::numeric_limits<double>::infinity()})), InvalidInput);
}

TEST(SoftmaxProperty, SumsToOneAndIgnoresConstantShift) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 20.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> s(15), shifted(15);
    const double k = n(rng) * 10.0;
    for (std::size_t i = 0; i < 15; ++i) {
      s[i] = n(rng);
      shifted[i] = s[i] + k;
    }
    const auto a = softmax(ClassScores(s));
    const auto b = softmax(ClassScores(shifted));
    double sum = 0.0;
    for (std::size_t i = 0; i < 15; ++i) {
      sum += a[i];
      EXPECT_NEAR(a[i], b[i], 1e-9);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
    EXPECT_EQ(argmax_class(a), argmax(s));
  }
}

TEST(BayesFuse, UniformIsIdentity) {
  std::mt19937_64 rng(1);
  const auto p = ClassDistribution(test::random_distribution(rng, 15));
  const auto f = bayes_fuse(ClassDistribution::uniform(15), p);
  for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(f[i], p[i], 1e-12);
}

TEST(BayesFuse, HandComputedTwoClassProduct) {
  const ClassDistribution a({0.8, 0.2});
  const auto f = bayes_fuse(a, a);
  EXPECT_NEAR(f[0], 0.94117647058823529412, 1e-15);
  EXPECT_NEAR(f[1], 0.058823529411764705882, 1e-15);
}

TEST(BayesFuse, DisjointOneHotsAreDegenerate) {
  FusionStatus status = FusionStatus::ok;
  const auto f = bayes_fuse(ClassDistribution({1.0, 0.0, 0.0}), ClassDistribution({0.0, 1.0, 0.0}), &status);
  EXPECT_EQ(status, FusionStatus::degenerate);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(f[i], 1.0 / 3.0);
}

TEST(BayesFuseProperty, CommutativeAndAssociative) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const ClassDistribution a(test::random_distribution(rng, 15));
    const ClassDistribution b(test::random_distribution(rng, 15));
    const ClassDistribution c(test::random_distribution(rng, 15));
    const auto ab = bayes_fuse(a, b), ba = bayes_fuse(b, a);
    const auto left = bayes_fuse(ab, c), right = bayes_fuse(a, bayes_fuse(b, c));
    double sum = 0.0;
    for (std::size_t i = 0; i < 15; ++i) {
      EXPECT_NEAR(ab[i], ba[i], 1e-12);
      EXPECT_NEAR(left[i], right[i], 1e-9);
      sum += left[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(BayesFuseProperty, UniformPreservesArgmax) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const ClassDistribution p(test::random_distribution(rng, 15));
    EXPECT_EQ(argmax_class(bayes_fuse(ClassDistribution::uniform(15), p)), argmax_class(p));
  }
}

TEST(LogNormalize, SymmetricPair) {
  const auto l = log_normalize({0.0, 0.0});
  EXPECT_NEAR(l[0], -std::log(2.0), 1e-15);
  EXPECT_NEAR(l[1], -std::log(2.0), 1e-15);
}

TEST(LogNormalize, VeryNegativeInputsStayFinite) {
  const auto l = log_normalize({-1000.0, -1001.0});
  // mpmath, 30 digits.
  EXPECT_NEAR(l[0], -0.31326168751822283405, 1e-14);
  EXPECT_NEAR(l[1], -1.313261687518222834, 1e-14);
  // Exponentiating first underflows to zero, so the direct route cannot work.
  EXPECT_EQ(std::exp(-1000.0) + std::exp(-1001.0), 0.0);
}

TEST(LogNormalize, ClampedEntryCollapsesToDominantClass) {
  const auto l = log_normalize({0.0, kLogProbabilityFloor});
  EXPECT_NEAR(l[0], 0.0, 1e-15);
  EXPECT_NEAR(l[1], kLogProbabilityFloor, 1e-12);
}

TEST(LogNormalize, NegativeInfinityIsClampedToFloor) {
  const auto l = log_normalize({0.0, -std::numeric_limits<double>::infinity()});
  EXPECT_TRUE(std::isfinite(l[1]));
  EXPECT_DOUBLE_EQ(l[1], kLogProbabilityFloor);
}

TEST(LogNormalizeProperty, ResultHasZeroLogSumExp) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> l(15);
    for (auto& v : l) v = u(rng);
    const auto n = log_normalize(l);
    EXPECT_NEAR(log_sum_exp(n.values()), 0.0, 1e-9);
    for (double v : n.values()) EXPECT_LE(v, 0.0);
  }
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax_class(ClassDistribution::uniform(15)), 0u);
  EXPECT_EQ(argmax_class(ClassDistribution({0.1, 0.7, 0.2})), 1u);
  EXPECT_EQ(argmax_class(log_normalize({-0.1, -3.0, -3.0})), 0u);
}

TEST(ClassDistribution, RejectsUnnormalizedInput) {
  EXPECT_THROW(ClassDistribution({0.5, 0.6}), InvalidInput);
  EXPECT_THROW(ClassDistribution({-0.1, 1.1}), InvalidInput);
}

TEST(LogProperty, LogSpaceAccumulationMatchesExtendedPrecisionProduct) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng() % 50;
    std::vector<long double> oracle(15, 1.0L);
    std::vector<double> acc(15, 0.0), logp(15);
    for (std::size_t s = 0; s < len; ++s) {
      const auto p = test::random_distribution(rng, 15);
      long double sum = 0.0L;
      for (std::size_t i = 0; i < 15; ++i) {
        oracle[i] *= p[i];
        sum += oracle[i];
      }
      for (auto& v : oracle) v /= sum;
      log_probabilities_into(p, logp);
      for (std::size_t i = 0; i < 15; ++i) acc[i] += logp[i];
      log_normalize_into(acc);
    }
    const auto d = to_distribution(log_normalize(acc));
    for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(d[i], static_cast<double>(oracle[i]), 1e-6);
  }
}

}  // namespace
}  // namespace semfuse
