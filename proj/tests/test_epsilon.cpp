#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "wcc/epsilon.hpp"
#include "wcc/error.hpp"

using namespace wcc;

TEST(Epsilon, Families) {
  const auto g = EpsilonSequence::geometric(2);
  EXPECT_DOUBLE_EQ(g.eps(-1), 1.0);
  EXPECT_DOUBLE_EQ(g.eps(0), 0.5);
  EXPECT_DOUBLE_EQ(g.cell_length(1), 0.5);
  EXPECT_DOUBLE_EQ(g.cell_length(3), 0.125);
  const auto p = EpsilonSequence::power(0.5);
  EXPECT_DOUBLE_EQ(p.eps(2), 0.5);
  EXPECT_NEAR(p.cell_length(1), 1 - std::sqrt(0.5), 1e-15);
  const auto l = EpsilonSequence::logarithmic();
  EXPECT_DOUBLE_EQ(l.eps(0), 0.5);
  EXPECT_THROW(EpsilonSequence::geometric(1.0), DomainError);
  EXPECT_THROW(EpsilonSequence::power(0.0), DomainError);
}

TEST(Epsilon, CellOfInvertsEps) {
  for (const auto& e : {EpsilonSequence::geometric(2), EpsilonSequence::power(0.5), EpsilonSequence::power(2),
                        EpsilonSequence::logarithmic()}) {
    for (std::uint64_t k = 1; k < 300; k += 3) {
      const double mid = 0.5 * (e.eps(static_cast<std::int64_t>(k) - 1) + e.eps(static_cast<std::int64_t>(k) - 2));
      EXPECT_EQ(e.cell_of(mid), k) << e.describe();
      EXPECT_EQ(e.cell_of(e.eps(static_cast<std::int64_t>(k) - 2)), k) << e.describe();
    }
  }
  EXPECT_THROW(EpsilonSequence::geometric(2).cell_of(0.0), DomainError);
}

TEST(Epsilon, TableAndFile) {
  const auto t = EpsilonSequence::table({0.5, 0.25, 0.125}, EpsilonSequence::PowerTail{2.0, 1.0});
  EXPECT_DOUBLE_EQ(t.eps(1), 0.25);
  EXPECT_DOUBLE_EQ(t.eps(3), 1.0 / 16);
  EXPECT_DOUBLE_EQ(t.cell_length(1), 0.5);
  const auto bare = EpsilonSequence::table({0.5, 0.25}, std::nullopt);
  EXPECT_THROW(bare.eps(5), Inconclusive);
  EXPECT_THROW(EpsilonSequence::table({0.5, 0.6}, std::nullopt), DomainError);

  const auto path = std::filesystem::temp_directory_path() / "wcc_eps_table.txt";
  {
    std::ofstream f(path);
    f << "# three values\ntail: pow alpha=2 A=1\n0.5\n0.25\n0.125\n";
  }
  const auto loaded = EpsilonSequence::load(path.string());
  EXPECT_EQ(loaded.values().size(), 3u);
  ASSERT_TRUE(loaded.tail().has_value());
  EXPECT_DOUBLE_EQ(loaded.tail()->alpha, 2.0);
  std::filesystem::remove(path);
}
