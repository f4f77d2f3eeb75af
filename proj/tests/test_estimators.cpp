#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wcc/coding.hpp"
#include "wcc/error.hpp"
#include "wcc/estimators.hpp"
#include "wcc/renewal.hpp"
#include "wcc/symbolic.hpp"

using namespace wcc;

TEST(Moments, MergeIsAssociative) {
  std::mt19937_64 g(1);
  MomentAccumulator a, b, c, all;
  for (int i = 0; i < 300; ++i) {
    const std::uint64_t v = g() % 100000;
    (i < 100 ? a : i < 200 ? b : c).add(v);
    all.add(v);
  }
  MomentAccumulator left = a, right = b;
  left.merge(b);
  left.merge(c);
  right.merge(c);
  MomentAccumulator a2 = a;
  a2.merge(right);
  EXPECT_EQ(left, a2);
  EXPECT_EQ(left, all);
  EXPECT_NEAR(all.mean(), left.mean(), 0);
}

TEST(Ensemble, Deterministic) {
  const MapSpec m = MapSpec::manneville_pomeau(3);
  const auto grid = dyadic_grid(128, 4096);
  EnsembleOptions one;
  one.threads = 1;
  EnsembleOptions many;
  many.threads = 4;
  const ScalingTable a = run_ensemble(m, default_partition(m), grid, 40, 17, one);
  const ScalingTable b = run_ensemble(m, default_partition(m), grid, 40, 17, many);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  EXPECT_EQ(a.replica_N, b.replica_N);
}

TEST(Ensemble, MergeHalves) {
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::power(0.5));
  const auto grid = dyadic_grid(64, 8192);
  const Partition z = default_partition(pl);
  const ScalingTable full = run_ensemble(pl, z, grid, 60, 3);
  EnsembleOptions second;
  second.first_replica = 30;
  const ScalingTable merged = merge_tables(run_ensemble(pl, z, grid, 30, 3), run_ensemble(pl, z, grid, 30, 3, second));
  EXPECT_EQ(full.replica_N, merged.replica_N);
  ASSERT_EQ(full.rows.size(), merged.rows.size());
  for (std::size_t i = 0; i < full.rows.size(); ++i) {
    EXPECT_EQ(full.rows[i].mean_N, merged.rows[i].mean_N);
    EXPECT_EQ(full.rows[i].var_I, merged.rows[i].var_I);
  }
}

TEST(Ensemble, SingleSampleSingleStep) {
  const MapSpec m = MapSpec::manneville_pomeau(2);
  const ScalingTable t = run_ensemble(m, default_partition(m), {1}, 1, 5);
  EXPECT_TRUE(t.rows[0].mean_N == 0.0 || t.rows[0].mean_N == 1.0);
}

TEST(Ensemble, GeometricLinear) {
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::geometric(2));
  const ScalingTable t = run_ensemble(pl, default_partition(pl), {1 << 16}, 200, 8);
  EXPECT_NEAR(t.rows[0].mean_N / 65536.0, 0.5, 0.01);
  EXPECT_LT(t.rows[0].mean_I / 65536.0, 2.0);
}

TEST(Ensemble, LowPassageFractionShrinks) {
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::power(0.5));
  const ScalingTable t = run_ensemble(pl, default_partition(pl), dyadic_grid(1 << 8, 1 << 20), 2000, 4);
  const auto f = low_passage_fraction(t);
  EXPECT_LT(f.back(), f.front());
}

TEST(Fit, ExactPowerLaw) {
  std::vector<double> n, v;
  for (double x = 1000; x <= 1e6; x *= 2) {
    n.push_back(x);
    v.push_back(7 * std::sqrt(x));
  }
  const ChaosIndexEstimate e = fit_points(n, v);
  EXPECT_NEAR(e.slope, 0.5, 1e-12);
  EXPECT_NEAR(e.prefactor, 7.0, 1e-9);
  EXPECT_NEAR(e.r_squared, 1.0, 1e-12);
  FitOptions pl;
  pl.model = FitModel::power_log;
  std::vector<double> w;
  for (double x : n) w.push_back(3 * std::pow(x, 0.25) * std::log(x));
  EXPECT_NEAR(fit_points(n, w, pl).slope, 0.25, 1e-12);
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_points({1000, 2000, 4000}, {1, 2, 3}), DomainError);
  EXPECT_THROW(fit_points({1000, 2000, 4000, 8000}, {0, 0, 0, 0}), DegenerateFit);
  const MapSpec m = MapSpec::manneville_pomeau(3);
  EXPECT_THROW(local_index_estimate(0.0, m, default_partition(m), dyadic_grid(1000, 64000)), DegenerateFit);
}

TEST(Fit, GeometricLocalIndex) {
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::geometric(2));
  const ChaosIndexEstimate e = local_index_estimate(0.3, pl, default_partition(pl), dyadic_grid(1000, 1 << 18));
  EXPECT_NEAR(e.slope, 1.0, 0.05);
  EXPECT_EQ(e.flavor, Flavor::local);
}

TEST(Birkhoff, GeometricSmall) {
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::geometric(2));
  const BirkhoffEstimate b = birkhoff_induced_entropy(pl, 500, 40, 2, 1);
  EXPECT_NEAR(b.mean, 2 * std::log(2.0), 5 * b.standard_error);
  EXPECT_EQ(b.skipped, 0u);
}

TEST(Tail, InsufficientSamples) {
  const MapSpec m = MapSpec::manneville_pomeau(3);
  EXPECT_THROW(passage_tail_exponent(m, 100, 1), InsufficientTail);
}

TEST(Truncation, Monotone) {
  std::mt19937_64 g(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> s(1 + g() % 400);
    for (auto& c : s) c = (g() % 5 == 0) ? 1 : 0;
    const SymbolString w(2, s);
    std::uint64_t prev = 0;
    for (std::uint64_t k = 1; k < 40; ++k) {
      const std::uint64_t t = truncated_complexity(w, k);
      EXPECT_GE(t, prev);
      EXPECT_LE(t, information_length(w));
      prev = t;
    }
  }
}

TEST(Comparison, PowerPrediction) {
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::power(0.5));
  const ScalingTable t = run_ensemble(pl, default_partition(pl), dyadic_grid(1000, 1 << 18), 2000, 6);
  const ComparisonReport r = compare_with_prediction(t, classify(pl.eps()));
  EXPECT_TRUE(r.ok());
  EXPECT_NEAR(r.rows.back().ratio, 1.0, 0.1);
}

TEST(Grid, Dyadic) {
  EXPECT_EQ(dyadic_grid(1000, 8000), (std::vector<std::uint64_t>{1000, 2000, 4000, 8000}));
  EXPECT_EQ(dyadic_grid(1000, 5000), (std::vector<std::uint64_t>{1000, 2000, 4000, 5000}));
}
