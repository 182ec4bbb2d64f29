#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "celm/arousal.hpp"
#include "oracle.hpp"

using namespace celm;
using namespace celm::arousal;

TEST(WundtHedonic, SymmetricParamsGiveZero) {
  WundtParams p;
  p.r_min = p.p_min = 0.4;
  for (double s : {-3.0, 0.0, 0.25, 0.4, 0.9, 1.0, 7.0}) EXPECT_DOUBLE_EQ(wundt_hedonic(s, p), 0.0);
}

TEST(WundtHedonic, SaturatesToRewardMinusPunishment) {
  WundtParams p;
  p.r_max = 1.5;
  p.p_max = 0.5;
  EXPECT_NEAR(wundt_hedonic(1e3, p), 1.0, 1e-12);
  EXPECT_NEAR(wundt_hedonic(-1e3, p), 0.0, 1e-12);
}

TEST(WundtHedonic, DefaultsAtMidpointMatchScalarEvaluation) {
  const WundtParams p;
  // 1/(1+e^-2.5) - 1/(1+e^2.5)
  const double expected = 1.0 / (1.0 + std::exp(-2.5)) - 1.0 / (1.0 + std::exp(2.5));
  EXPECT_NEAR(wundt_hedonic(0.5, p), expected, 1e-15);
  EXPECT_NEAR(wundt_hedonic(0.5, p), 0.848283639957513, 1e-14);
}

TEST(WundtHedonic, MatchesOracleOnGrid) {
  const WundtParams p{1.2, 0.8, 7.0, 12.0, 0.3, 0.6};
  for (int k = 0; k <= 200; ++k) {
    const double s = k / 200.0;
    EXPECT_NEAR(wundt_hedonic(s, p), oracle::sigmoid_difference(s, 1.2, 0.8, 7.0, 12.0, 0.3, 0.6), 1e-14);
  }
}

TEST(WundtHedonic, RejectsNonFiniteAndBadSlopes) {
  EXPECT_THROW(wundt_hedonic(std::nan(""), {}), DomainError);
  EXPECT_THROW(wundt_hedonic(INFINITY, {}), DomainError);
  WundtParams p;
  p.rho_p = 0.0;
  EXPECT_THROW(wundt_hedonic(0.5, p), DomainError);
}

TEST(WundtHedonic, BoundedOnFuzzGrid) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 3.0);
  const WundtParams p;
  for (int i = 0; i < 10000; ++i) {
    const double h = wundt_hedonic(u(rng), p);
    EXPECT_GE(h, -p.p_max);
    EXPECT_LE(h, p.r_max);
  }
}

TEST(WundtHedonic, DefaultCurveRisesThenFalls) {
  const WundtParams p;
  int sign_changes = 0;
  int last_sign = 0;
  for (int k = 1; k <= 1000; ++k) {
    const double d = wundt_hedonic(k / 1000.0, p) - wundt_hedonic((k - 1) / 1000.0, p);
    const int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++sign_changes;
    last_sign = sign;
  }
  EXPECT_EQ(sign_changes, 1);
}

TEST(ShannonEntropy, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(shannon_entropy(std::vector<double>{0.5, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(shannon_entropy(std::vector<double>{1.0, 0.0, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(shannon_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5);
}

TEST(ShannonEntropy, RejectsInvalidDistributions) {
  EXPECT_THROW(shannon_entropy(std::vector<double>{0.7, -0.1, 0.4}), DomainError);
  EXPECT_THROW(shannon_entropy(std::vector<double>{0.5, 0.4}), DomainError);
  EXPECT_THROW(shannon_entropy(std::vector<double>{0.5, 0.5 + 1e-8}), DomainError);
  EXPECT_NO_THROW(shannon_entropy(std::vector<double>{0.5, 0.5 + 1e-10}));
}

TEST(ShannonEntropy, BoundedByLogNAndPermutationInvariant) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) sum += (v = u(rng));
    for (auto& v : p) v /= sum;
    const double h = shannon_entropy(p);
    EXPECT_NEAR(h, oracle::entropy_bits(p), 1e-12);
    EXPECT_LE(h, std::log2(static_cast<double>(n)) + 1e-9);
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_NEAR(shannon_entropy(p), h, 1e-12);
  }
  for (std::size_t n = 2; n <= 16; ++n) {
    const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
    EXPECT_NEAR(shannon_entropy(uniform), std::log2(static_cast<double>(n)), 1e-9);
  }
}

TEST(NormalizedEntropy, Examples) {
  EXPECT_NEAR(normalized_entropy(std::vector<double>(4, 0.25)), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(normalized_entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(normalized_entropy(std::vector<double>{0.5, 0.25, 0.25}), 1.5 / std::log2(3.0), 1e-15);
  EXPECT_THROW(normalized_entropy(std::vector<double>{1.0}), DomainError);
}

TEST(AttentionSpread, Examples) {
  const SpreadParams p{1.0, 0.1, 2.0, 0.8};
  EXPECT_DOUBLE_EQ(attention_spread(0.0, 0.8, p), 1.0);
  EXPECT_NEAR(attention_spread(5.0, 0.3, p), 2.0, 1e-15);
  const SpreadParams zeroed{1.7, 0.0, 0.0, 0.5};
  EXPECT_DOUBLE_EQ(attention_spread(12.0, 0.1, zeroed), 1.7);
  EXPECT_THROW(attention_spread(-1.0, 0.5, p), DomainError);
  EXPECT_THROW(attention_spread(1.0, NAN, p), DomainError);
}

TEST(AttentionSpread, NeverBelowBaselineAndIncreasingInBoredom) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const SpreadParams p{u(rng), 0.01 + u(rng), u(rng), u(rng)};
    const double tb = 10.0 * u(rng);
    const double sr = u(rng);
    EXPECT_GE(attention_spread(tb, sr, p), p.sigma0);
    EXPECT_GT(attention_spread(tb + 1.0, sr, p), attention_spread(tb, sr, p));
  }
}

TEST(InterestZone, DefaultsAcrossTheCurve) {
  const WundtParams p;
  EXPECT_EQ(interest_zone(0.0, p), InterestZone::Boredom);
  EXPECT_EQ(interest_zone(1.0, p), InterestZone::Anxiety);
  EXPECT_EQ(interest_zone(wundt_argmax(p), p), InterestZone::Curiosity);
}

TEST(InterestZone, ArgmaxMatchesIndependentScan) {
  const WundtParams p{1.0, 0.7, 9.0, 14.0, 0.2, 0.7};
  double best_s = 0.0, best_h = -INFINITY;
  for (int k = 0; k <= 1000; ++k) {
    const double s = k * 1e-3;
    const double h = oracle::sigmoid_difference(s, 1.0, 0.7, 9.0, 14.0, 0.2, 0.7);
    if (h > best_h) best_h = h, best_s = s;
  }
  EXPECT_NEAR(wundt_argmax(p), best_s, 1e-12);
}

TEST(InterestZone, RejectsInvalidRegime) {
  WundtParams p;
  p.r_min = 0.8;
  EXPECT_THROW(interest_zone(0.5, p), DomainError);
  EXPECT_THROW(interest_zone(0.5, WundtParams{}, 0.0), DomainError);
}

TEST(InterestZone, ExhaustiveAndDeterministic) {
  const WundtParams p;
  InterestZone previous = InterestZone::Boredom;
  int transitions = 0;
  for (int k = 0; k <= 1000; ++k) {
    const double s = k / 1000.0;
    const auto z = interest_zone(s, p);
    EXPECT_EQ(z, interest_zone(s, p));
    if (z != previous) ++transitions;
    previous = z;
  }
  // Boredom -> Curiosity -> Anxiety
  EXPECT_EQ(transitions, 2);
  EXPECT_EQ(previous, InterestZone::Anxiety);
}

TEST(InterestZone, Names) {
  EXPECT_EQ(to_string(InterestZone::Boredom), "boredom");
  EXPECT_EQ(to_string(InterestZone::Curiosity), "curiosity");
  EXPECT_EQ(to_string(InterestZone::Anxiety), "anxiety");
}
