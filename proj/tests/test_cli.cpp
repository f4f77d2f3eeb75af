#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "wcc/cli.hpp"
#include "wcc/error.hpp"

using namespace wcc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "wcc_cli_test" / name;
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST(Grid, Parse) {
  EXPECT_EQ(parse_grid("dyadic:2^10..2^12"), (std::vector<std::uint64_t>{1024, 2048, 4096}));
  EXPECT_EQ(parse_grid("dyadic:1000..5000"), (std::vector<std::uint64_t>{1000, 2000, 4000, 5000}));
  EXPECT_EQ(parse_grid("10,100,1e3"), (std::vector<std::uint64_t>{10, 100, 1000}));
  EXPECT_THROW(parse_grid("10,5"), ParseError);
  EXPECT_THROW(parse_grid("dyadic:10"), ParseError);
  try {
    parse_grid("10,x");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.column(), 4u);
  }
}

TEST(Config, Parse) {
  const auto e = parse_config("# comment\nmap = mp:z=3\n\n  seed=7\n");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].key, "map");
  EXPECT_EQ(e[0].value, "mp:z=3");
  EXPECT_EQ(e[0].line, 2u);
  EXPECT_EQ(e[0].value_column, 7u);
  EXPECT_EQ(e[1].line, 4u);
  try {
    parse_config("map = x\noops\n");
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 2u);
    EXPECT_EQ(err.column(), 1u);
  }
}

TEST(Cli, Simulate) {
  const Result r = run({"simulate", "--map", "mp:z=3", "--n", "1000", "--samples", "10", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("sample", 0) != 0) ++rows;
  EXPECT_EQ(rows, 10);
  EXPECT_NE(r.out.find("# seed: 7"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--map", "pl:geom,a=2", "--n", "50", "--seed", "1"}).code, 0);
  EXPECT_EQ(run({"simulate", "--map", "mp:z=3", "--n", "1000", "--samples", "10", "--seed", "7"}).out, r.out);
}

TEST(Cli, RejectsBadInput) {
  const Result bad = run({"simulate", "--map", "mp:z=0.5", "--n", "10", "--seed", "1"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("z > 1"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--map", "mp:z=3", "--n", "10"}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
}

TEST(Cli, EncodeDecode) {
  const fs::path dir = scratch("codec");
  const Result r = run({"encode", "--symbols", "000100000000110010000000001101", "--out", "w.wcc", "--output-dir",
                        dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("I: 27"), std::string::npos);
  EXPECT_NE(r.out.find("N: 7"), std::string::npos);
  const Result d = run({"decode", "--input", (dir / "w.wcc").string()});
  EXPECT_EQ(d.code, 0);
  EXPECT_EQ(d.out, "000100000000110010000000001101\n");
  const Result m = run({"encode", "--symbols", "0012000102", "--alphabet", "3"});
  EXPECT_EQ(m.code, 0);
  EXPECT_NE(m.out.find("passage_bound"), std::string::npos);
}

TEST(Cli, ScalingDeterministicAndChecks) {
  const fs::path a = scratch("scaling_a"), b = scratch("scaling_b");
  const std::vector<std::string> base{"scaling", "--map", "pl:pow,alpha=0.5", "--grid", "dyadic:2^10..2^16",
                                      "--samples", "300", "--seed", "5", "--bootstrap", "50"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--output-dir", a.string()});
  args_b.insert(args_b.end(), {"--output-dir", b.string(), "--threads", "3"});
  ASSERT_EQ(run(args_a).code, 0);
  ASSERT_EQ(run(args_b).code, 0);
  EXPECT_EQ(slurp(a / "scaling.csv"), slurp(b / "scaling.csv"));
  const auto j = nlohmann::json::parse(slurp(a / "scaling.json"));
  EXPECT_NEAR(j["prediction"]["prefactor"].get<double>(), 0.63662, 1e-4);
  EXPECT_NEAR(j["fits"]["N"]["q_hat"].get<double>(), 0.5, 0.1);

  auto failing = args_a;
  failing.insert(failing.end(), {"--expect-q", "0.9", "--tol", "0.05"});
  const Result f = run(failing);
  EXPECT_EQ(f.code, 1);
  EXPECT_TRUE(nlohmann::json::accept(f.err)) << f.err;
}

TEST(Cli, ConfigFile) {
  const fs::path dir = scratch("config");
  {
    std::ofstream c(dir / "run.cfg");
    c << "# example\nmap = mp:z=3\nn = 200\nsamples = 3\n";
  }
  const Result r = run({"simulate", "--config", (dir / "run.cfg").string(), "--seed", "2", "--samples", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# samples: 2"), std::string::npos);
  {
    std::ofstream c(dir / "bad.cfg");
    c << "map = mp:z=3\nsteps = 4\n";
  }
  const Result bad = run({"simulate", "--config", (dir / "bad.cfg").string(), "--seed", "2"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("2:1"), std::string::npos) << bad.err;
  {
    std::ofstream c(dir / "badmap.cfg");
    c << "n = 5\nmap = mp:z=0.5\n";
  }
  const Result bm = run({"simulate", "--config", (dir / "badmap.cfg").string(), "--seed", "2"});
  EXPECT_EQ(bm.code, 2);
  EXPECT_NE(bm.err.find("2:12"), std::string::npos) << bm.err;
}

TEST(Cli, PlPredictAndTable) {
  const Result p = run({"pl-predict", "--map", "pl:geom,a=2", "--states", "3"});
  ASSERT_EQ(p.code, 0) << p.err;
  const auto j = nlohmann::json::parse(p.out);
  EXPECT_DOUBLE_EQ(j["t0"].get<double>(), 2.0);
  EXPECT_EQ(j["regime"], "linear");
  EXPECT_DOUBLE_EQ(j["states"][1]["invariant_normalized"].get<double>(), 0.25);
  EXPECT_EQ(nlohmann::json::parse(run({"pl-predict", "--map", "pl:log"}).out)["entropy"], "inf");
  EXPECT_EQ(run({"pl-predict", "--map", "mp:z=3"}).code, 2);

  const fs::path dir = scratch("table");
  const Result t = run({"pl-table", "--seed", "1", "--samples", "100", "--grid", "dyadic:2^10..2^14",
                        "--output-dir", dir.string()});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("pl:log"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "pl_table.csv"));
}

TEST(Cli, IndexAndEntropy) {
  const Result i = run({"index", "--map", "pl:geom,a=2", "--x0", "0.3", "--seed", "1", "--grid",
                        "dyadic:2^10..2^16"});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_NEAR(nlohmann::json::parse(i.out)["median_q_hat"].get<double>(), 1.0, 0.05);
  const Result e = run({"entropy", "--map", "pl:geom,a=2", "--samples", "20", "--passages", "200", "--seed", "3",
                        "--no-tail"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_GT(nlohmann::json::parse(e.out)["birkhoff"]["mean"].get<double>(), 0.0);
}

TEST(Cli, EnvOutputDir) {
  const fs::path dir = scratch("env");
  setenv("WCC_OUTPUT_DIR", dir.string().c_str(), 1);
  const Result r = run({"scaling", "--map", "mp:z=3", "--grid", "dyadic:2^10..2^13", "--samples", "20", "--seed",
                        "1", "--prefix", "envrun", "--bootstrap", "10"});
  unsetenv("WCC_OUTPUT_DIR");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "envrun.csv"));
}
