#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wcc/error.hpp"
#include "wcc/renewal.hpp"

using namespace wcc;

TEST(Transition, Rows) {
  const auto g = EpsilonSequence::geometric(2);
  const TransitionDistribution five = transition_distribution(5, g);
  ASSERT_EQ(five.entries.size(), 1u);
  EXPECT_EQ(five.entries[0].first, 4u);
  EXPECT_DOUBLE_EQ(five.entries[0].second, 1.0);
  const TransitionDistribution one = transition_distribution(1, g, 20);
  ASSERT_EQ(one.entries.size(), 20u);
  for (const auto& [k, p] : one.entries) EXPECT_DOUBLE_EQ(p, std::ldexp(1.0, -static_cast<int>(k)));
  EXPECT_NEAR(one.tail_mass, std::ldexp(1.0, -20), 1e-18);
  EXPECT_THROW(transition_distribution(0, g), DomainError);
}

TEST(Chain, Basics) {
  const auto g = EpsilonSequence::geometric(2);
  const ChainPath one = sample_chain(1, g, 3);
  EXPECT_EQ(one.passages, one.initial_state == 1 ? 1u : 0u);
  const ChainPath a = sample_chain(10000, g, 42, 7);
  const ChainPath b = sample_chain(10000, g, 42, 7);
  EXPECT_EQ(a.passages, b.passages);
  EXPECT_EQ(a.information, b.information);
  EXPECT_NEAR(static_cast<double>(a.passages) / 10000.0, 0.5, 0.05);
}

TEST(Chain, LinearRegimeMean) {
  const auto g = EpsilonSequence::geometric(2);
  double total = 0;
  for (std::uint64_t r = 0; r < 200; ++r) total += static_cast<double>(sample_chain(100000, g, 5, r).passages);
  EXPECT_NEAR(total / 200 / 100000, 0.5, 0.005);
}

TEST(Occupation, GeometricMatchesInvariantMeasure) {
  const auto g = EpsilonSequence::geometric(2);
  const OccupationEstimate o = simulate_occupation(g, 100000, 50, 6, 9, 1);
  for (std::uint64_t k = 1; k <= 6; ++k) {
    const double expect = normalized_invariant_measure(k, g);
    EXPECT_LT(std::abs(o.fraction[k - 1] - expect), 4 * o.standard_error[k - 1] + 1e-12) << k;
  }
}

TEST(RecurrenceTime, Families) {
  EXPECT_NEAR(mean_recurrence_time(EpsilonSequence::geometric(2)).value, 2.0, 1e-12);
  EXPECT_NEAR(mean_recurrence_time(EpsilonSequence::geometric(3)).value, 1.5, 1e-12);
  EXPECT_TRUE(mean_recurrence_time(EpsilonSequence::power(0.5)).infinite());
  EXPECT_NEAR(mean_recurrence_time(EpsilonSequence::power(2)).value, std::numbers::pi * std::numbers::pi / 6,
              1e-9);
  EXPECT_TRUE(mean_recurrence_time(EpsilonSequence::logarithmic()).infinite());
  const auto t = EpsilonSequence::table({0.5, 0.25, 0.125}, EpsilonSequence::PowerTail{2.0, 1.0});
  EXPECT_NEAR(mean_recurrence_time(t).value, 2.15882, 1e-4);
  EXPECT_THROW(mean_recurrence_time(EpsilonSequence::table({0.5, 0.25}, std::nullopt)), Inconclusive);
}

TEST(InvariantMeasure, Geometric) {
  const auto g = EpsilonSequence::geometric(2);
  EXPECT_DOUBLE_EQ(invariant_measure(1, g), 1.0);
  EXPECT_DOUBLE_EQ(normalized_invariant_measure(1, g), 0.5);
  EXPECT_DOUBLE_EQ(normalized_invariant_measure(2, g), 0.25);
  EXPECT_EQ(normalized_invariant_measure(1, EpsilonSequence::power(0.5)), 0.0);
}

TEST(Classify, Regimes) {
  const RegimePrediction pw = classify(EpsilonSequence::power(0.5));
  EXPECT_EQ(pw.regime, Regime::power);
  EXPECT_NEAR(pw.amplitude, 1.0, 1e-12);
  EXPECT_NEAR(pw.coefficient, 2 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(pw.predicted_mean_N(1e6), 2 / std::numbers::pi * 1000, 1e-6);
  EXPECT_FALSE(pw.tail_function.empty());
  const RegimePrediction lin = classify(EpsilonSequence::geometric(2));
  EXPECT_EQ(lin.regime, Regime::linear);
  EXPECT_NEAR(lin.predicted_mean_N(1000), 500, 1e-9);
  const RegimePrediction lg = classify(EpsilonSequence::logarithmic());
  EXPECT_EQ(lg.regime, Regime::logarithmic);
  EXPECT_NEAR(lg.predicted_mean_N(1000), std::log(1000.0), 1e-12);
  EXPECT_THROW(classify(EpsilonSequence::power(1.0)), Unsupported);
  EXPECT_THROW(classify(EpsilonSequence::table({0.5, 0.25}, std::nullopt)), Inconclusive);
}

TEST(Entropy, Series) {
  EXPECT_NEAR(induced_entropy_pl(EpsilonSequence::geometric(2)).value, 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(induced_entropy_pl(EpsilonSequence::power(0.5)).value, 3.709477380972, 1e-8);
  EXPECT_NEAR(induced_entropy_pl(EpsilonSequence::power(2)).value, 0.948006765437, 1e-8);
  EXPECT_TRUE(induced_entropy_pl(EpsilonSequence::logarithmic()).infinite());
}
