#include <gtest/gtest.h>

#include "wcc/error.hpp"
#include "wcc/maps.hpp"
#include "wcc/symbolic.hpp"

using namespace wcc;

namespace {
const char* kOmega30 = "000100000000110010000000001101";
}

TEST(Partition, Validation) {
  EXPECT_THROW(Partition({0.0, 1.0}), DomainError);
  EXPECT_THROW(Partition({0.0, 0.5, 0.5, 1.0}), DomainError);
  EXPECT_THROW(Partition({0.1, 0.5, 1.0}), DomainError);
  const Partition p({0.0, 0.3, 0.6, 1.0});
  EXPECT_EQ(p.cells(), 3u);
  EXPECT_EQ(p.cell_of(0.3), 0);
  EXPECT_EQ(p.cell_of(0.31), 1);
  EXPECT_EQ(p.cell_of(0.6), 1);
  EXPECT_EQ(p.cell_of(1.0), 2);
  EXPECT_TRUE(p.on_breakpoint(0.6));
}

TEST(Partition, Parse) {
  EXPECT_EQ(parse_partition("Z=0.3,0.6"), Partition({0.0, 0.3, 0.6, 1.0}));
  EXPECT_EQ(parse_partition("0.5"), Partition::from_interior({0.5}));
  try {
    parse_partition("Z=0.3,x");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 7u);
  }
  EXPECT_THROW(parse_partition("Z=0.6,0.3"), ParseError);
}

TEST(DefaultPartition, TwoCells) {
  const MapSpec m = MapSpec::manneville_pomeau(2);
  const Partition a = default_partition(m);
  EXPECT_EQ(a.cells(), 2u);
  EXPECT_NEAR(a.breakpoints()[1], 0.6180339887498949, 1e-14);
  const Partition b = default_partition(MapSpec::piecewise_linear(EpsilonSequence::geometric(2)));
  EXPECT_EQ(b.cells(), 2u);
  EXPECT_DOUBLE_EQ(b.breakpoints()[1], 0.5);
}

TEST(Symbolize, Examples) {
  const MapSpec m = MapSpec::manneville_pomeau(2);
  const Partition z = default_partition(m);
  EXPECT_EQ(symbolize(0.0, 12, m, z).to_string(), std::string(12, '0'));
  EXPECT_EQ(symbolize(0.8, 2, m, z).to_string(), "10");
  const MapSpec pl = MapSpec::piecewise_linear(EpsilonSequence::geometric(2));
  // 0.9 -> 0.8 -> 0.6 -> 0.2: begins 1,1
  EXPECT_EQ(symbolize(0.9, 4, pl, default_partition(pl)).to_string(), "1110");
  EXPECT_THROW(symbolize(1.2, 4, m, z), DomainError);
}

TEST(Symbolize, RunLengthsMatchPassageTimes) {
  const MapSpec m = MapSpec::manneville_pomeau(3);
  const Partition z = default_partition(m);
  const SymbolString s = symbolize(0.3, 2000, m, z);
  // the first 1 appears at time tau(x0) - 1
  std::size_t first = 0;
  while (s.symbols[first] == 0) ++first;
  EXPECT_EQ(first + 1, first_passage_time(0.3, m));
}

TEST(SymbolString, ParseAndCount) {
  const SymbolString w = SymbolString::parse(kOmega30);
  EXPECT_EQ(w.size(), 30u);
  EXPECT_EQ(w.alphabet_size, 2u);
  EXPECT_EQ(count_passages(w, 30), 7u);
  EXPECT_EQ(count_passages(w, 4), 1u);
  EXPECT_EQ(count_passages(SymbolString::parse("0000"), 4), 0u);
  EXPECT_EQ(count_passages(SymbolString::parse("1111"), 4), 4u);
  EXPECT_THROW(count_passages(w, 31), DomainError);
  EXPECT_EQ(SymbolString::parse("0A1", 11).symbols[1], 10);
  EXPECT_THROW(SymbolString::parse("012", 2), DomainError);
  EXPECT_THROW(SymbolString::parse("01?"), DomainError);
}
