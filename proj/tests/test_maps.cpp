#include <gtest/gtest.h>

#include <cmath>

#include "wcc/epsilon.hpp"
#include "wcc/error.hpp"
#include "wcc/maps.hpp"
#include "wcc/spec_parser.hpp"

using namespace wcc;

namespace {
MapSpec mp(double z) { return MapSpec::manneville_pomeau(z); }
MapSpec geom() { return MapSpec::piecewise_linear(EpsilonSequence::geometric(2.0)); }
}  // namespace

TEST(MpApply, Values) {
  EXPECT_EQ(mp_apply(0.0, mp(2)), 0.0);
  EXPECT_NEAR(mp_apply(0.8, mp(2)), 0.44, 1e-15);
  EXPECT_NEAR(mp_apply(0.1, mp(2)), 0.11, 1e-15);
  EXPECT_THROW(mp_apply(1.5, mp(2)), DomainError);
  EXPECT_THROW(mp_apply(-0.1, mp(2)), DomainError);
}

TEST(MpApply, LeftBranchEscapesMonotonically) {
  const MapSpec s = mp(3);
  double prev_gap = 1.0;
  for (double x = 0.5; x > 1e-4; x /= 2) {
    const double y = mp_apply(x, s);
    EXPECT_GT(y, x);
    EXPECT_LT(y - x, prev_gap);
    prev_gap = y - x;
  }
}

TEST(MpBranchPoint, Roots) {
  EXPECT_NEAR(mp_branch_point(2, 1), (std::sqrt(5.0) - 1) / 2, 1e-14);
  EXPECT_NEAR(mp_branch_point(3, 1), 0.6823278038280193, 1e-14);
  EXPECT_THROW(mp_branch_point(1.0, 1), DomainError);
  EXPECT_THROW(MapSpec::manneville_pomeau(0.5), DomainError);
  EXPECT_THROW(MapSpec::manneville_pomeau(3, 1.5), DomainError);
}

TEST(PlApply, Values) {
  const MapSpec s = geom();
  EXPECT_DOUBLE_EQ(pl_apply(0.375, s), 0.75);
  EXPECT_DOUBLE_EQ(pl_apply(0.75, s), 0.5);
  EXPECT_EQ(pl_apply(0.0, s), 0.0);
  EXPECT_THROW(pl_apply(1.01, s), DomainError);
}

TEST(FirstPassage, Values) {
  EXPECT_EQ(first_passage_time(0.8, mp(2)), 1u);
  EXPECT_EQ(first_passage_time(0.8, geom()), 1u);
  EXPECT_EQ(first_passage_time(0.375, geom()), 2u);
  EXPECT_EQ(first_passage_time(0.2, mp(2)), 6u);
  EXPECT_EQ(first_passage_time_iterated(0.375, geom()), 2u);
}

TEST(FirstPassage, LevelIndexMatchesIteration) {
  const MapSpec s = MapSpec::piecewise_linear(EpsilonSequence::power(0.5));
  for (int i = 1; i < 500; ++i) {
    const double x = i / 500.0;
    EXPECT_EQ(first_passage_time(x, s), first_passage_time_iterated(x, s)) << x;
  }
}

TEST(FirstPassage, FixedPointExceedsBudget) {
  PrecisionPolicy p;
  p.max_passage_steps = 1000;
  EXPECT_THROW(first_passage_time(1e-4, MapSpec::manneville_pomeau(3, 1, p)), BudgetError);
  EXPECT_THROW(first_passage_time(0.0, MapSpec::manneville_pomeau(3, 1, p)), DomainError);
}

TEST(LevelSets, Boundaries) {
  const LevelSetTable pl = level_sets(geom(), 8);
  EXPECT_DOUBLE_EQ(pl.boundaries[0], 1.0);
  EXPECT_DOUBLE_EQ(pl.boundaries[1], 0.5);
  EXPECT_DOUBLE_EQ(pl.boundaries[0] - pl.boundaries[1], 0.5);
  const LevelSetTable m = level_sets(mp(2), 50);
  EXPECT_NEAR(m.boundaries[1], mp_branch_point(2, 1), 1e-14);
  for (std::size_t i = 1; i < m.boundaries.size(); ++i) EXPECT_LT(m.boundaries[i], m.boundaries[i - 1]);
}

TEST(LevelSets, ConsistentWithFirstPassage) {
  const MapSpec s = mp(3);
  const LevelSetTable t = level_sets(s, 200);
  for (std::uint64_t n = 1; n < 200; n += 7) {
    const double mid = 0.5 * (t.boundaries[n] + t.boundaries[n - 1]);
    EXPECT_EQ(first_passage_time(mid, s), n);
    EXPECT_EQ(t.index_of(mid), n);
  }
}

TEST(Induced, Apply) {
  const InducedStep a = induced_apply(0.8, mp(2));
  EXPECT_EQ(a.tau, 1u);
  EXPECT_NEAR(a.x, mp_apply(0.8, mp(2)), 1e-15);
  const InducedStep b = induced_apply(0.375, geom());
  EXPECT_EQ(b.tau, 2u);
  EXPECT_DOUBLE_EQ(b.x, 0.5);
}

TEST(Induced, ConsistentWithIteration) {
  const MapSpec s = mp(3);
  for (double x : {0.05, 0.2, 0.4, 0.7, 0.9}) {
    const InducedStep st = induced_apply(x, s);
    double y = x;
    for (std::uint64_t i = 0; i < st.tau; ++i) y = mp_apply(y, s);
    EXPECT_NEAR(st.x, y, 1e-12);
    EXPECT_EQ(st.tau, first_passage_time(x, s));
  }
}

TEST(Induced, LogDerivative) {
  for (double x : {0.7, 0.9}) EXPECT_NEAR(induced_log_derivative(x, mp(2)), std::log(1 + 2 * x), 1e-12);
  EXPECT_NEAR(induced_log_derivative(0.8, geom()), std::log(2.0), 1e-12);
  // two slopes of 2 for a point in A_2
  EXPECT_NEAR(induced_log_derivative(0.375, geom()), 2 * std::log(2.0), 1e-12);
}

TEST(Orbit, PrecisionModes) {
  const double x0 = 1e-4;
  for (auto mode : {PrecisionMode::extended, PrecisionMode::ode_approx}) {
    PrecisionPolicy p;
    p.mode = mode;
    const MapSpec s = MapSpec::manneville_pomeau(3, 1, p);
    const std::uint64_t t = first_passage_time(x0, s);
    // continuum escape time ~ 1/(2 x0^2)
    EXPECT_NEAR(static_cast<double>(t), 0.5 / (x0 * x0), 0.02 * 0.5 / (x0 * x0));
  }
  PrecisionPolicy plain;
  plain.mode = PrecisionMode::plain;
  plain.max_passage_steps = 100000;
  EXPECT_THROW(first_passage_time(1e-12, MapSpec::manneville_pomeau(3, 1, plain)), BudgetError);
}

TEST(SpecParser, Accepts) {
  EXPECT_EQ(parse_map_spec("mp:z=3").describe(), "mp:z=3,r=1");
  EXPECT_EQ(parse_map_spec("pl:geom,a=2").describe(), "pl:geom,a=2");
  EXPECT_EQ(parse_map_spec("pl:pow,alpha=0.5").eps().kind(), EpsilonSequence::Kind::power);
  EXPECT_EQ(parse_map_spec("pl:log").eps().kind(), EpsilonSequence::Kind::logarithmic);
  EXPECT_EQ(parse_map_spec("mp:z=3,precision=ode-approx").precision().mode, PrecisionMode::ode_approx);
  const MapSpec s = parse_map_spec(parse_map_spec("mp:z=2.5,r=0.5").describe());
  EXPECT_DOUBLE_EQ(s.z(), 2.5);
  EXPECT_DOUBLE_EQ(s.r(), 0.5);
}

TEST(SpecParser, ErrorsCarryColumns) {
  const auto column_of = [](const char* text) {
    try {
      parse_map_spec(text);
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 1u);
      return e.column();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(column_of("mp:z=0.5"), 6u);
  EXPECT_EQ(column_of("mp:z=abc"), 6u);
  EXPECT_EQ(column_of("mp:z=3,q=1"), 8u);
  EXPECT_EQ(column_of("xx:z=3"), 1u);
  EXPECT_EQ(column_of("pl:cube"), 4u);
  EXPECT_EQ(column_of("nocolon"), 1u);
}
