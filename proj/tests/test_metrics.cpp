#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "tabrank/metrics.hpp"

using namespace tabrank;

TEST(Confusion, CountsAndScores) {
  const ConfusionMatrix cm{35, 10, 5, 50};  // tp, fp, fn, tn
  const auto s = scores(cm);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.85);
  EXPECT_NEAR(s.precision, 0.7778, 1e-4);
  EXPECT_DOUBLE_EQ(s.recall, 0.875);
  EXPECT_NEAR(s.f1, 0.8235, 1e-4);
}

TEST(Confusion, FromLabels) {
  const std::vector<std::uint8_t> y{1, 1, 0, 0, 1}, p{1, 0, 1, 0, 1};
  const auto cm = confusion(y, p);
  EXPECT_EQ(cm, (ConfusionMatrix{2, 1, 1, 1}));
  EXPECT_EQ(cm.swapped(), (ConfusionMatrix{1, 1, 1, 2}));
}

TEST(Confusion, ZeroDenominatorsGiveZero) {
  const auto s = scores({0, 0, 3, 7});
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.7);
}

TEST(Confusion, LengthMismatch) {
  const std::vector<std::uint8_t> y{1, 0}, p{1};
  EXPECT_THROW(confusion(y, p), ValidationError);
}

TEST(Auc, SmallExample) {
  const std::vector<std::uint8_t> y{0, 0, 1, 1};
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  EXPECT_DOUBLE_EQ(auc(y, s), 0.75);
}

TEST(Auc, AllTiesIsHalf) {
  const std::vector<std::uint8_t> y{0, 1, 0, 1, 1};
  const std::vector<double> s(5, 0.3);
  EXPECT_DOUBLE_EQ(auc(y, s), 0.5);
}

TEST(Auc, SingleClassIsUndefined) {
  const std::vector<std::uint8_t> y{1, 1};
  const std::vector<double> s{0.1, 0.2};
  EXPECT_THROW(auc(y, s), DomainError);
}

TEST(Auc, MatchesPairwiseCountWithTies) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 150;
    std::vector<std::uint8_t> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = gen() % 3 == 0;
      s[i] = static_cast<double>(gen() % 10) / 10.0;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_TRUE(testing_support::close_rel(auc(y, s), testing_support::oracle::pairwise_auc(y, s), 1e-12));
  }
}

TEST(Auc, InvariantUnderMonotoneMapsAndComplementsUnderNegation) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + gen() % 100;
    std::vector<std::uint8_t> y(n);
    std::vector<double> s(n), e(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = gen() % 2;
      s[i] = std::round(z(gen) * 4.0) / 4.0;
      e[i] = std::exp(s[i]) * 3.0 + 1.0;
      neg[i] = -s[i];
    }
    y[0] = 1;
    y[1] = 0;
    const double a = auc(y, s);
    EXPECT_EQ(a, auc(y, e));
    EXPECT_NEAR(a + auc(y, neg), 1.0, 1e-12);
  }
}
