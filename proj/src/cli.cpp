#include "wcc/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "wcc/coding.hpp"
#include "wcc/error.hpp"
#include "wcc/estimators.hpp"
#include "wcc/renewal.hpp"
#include "wcc/spec_parser.hpp"
#include "wcc/symbolic.hpp"

namespace wcc {

using nlohmann::ordered_json;

namespace {

constexpr const char* kDefaultFamilies = "pl:geom,a=2;pl:pow,alpha=2;pl:pow,alpha=0.5;pl:log";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_count(std::string_view text, std::size_t column) {
  std::string s = trim(text);
  std::uint64_t v = 0;
  const auto caret = s.find('^');
  try {
    if (caret != std::string::npos) {
      const std::uint64_t base = std::stoull(s.substr(0, caret));
      const std::uint64_t exp = std::stoull(s.substr(caret + 1));
      if (exp > 62 || base < 2) throw std::out_of_range("power");
      v = 1;
      for (std::uint64_t i = 0; i < exp; ++i) {
        if (v > (std::uint64_t{1} << 62) / base) throw std::out_of_range("power");
        v *= base;
      }
    } else {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used != s.size() || d < 1.0 || d != std::floor(d) || d > 4.6e18) throw std::invalid_argument("int");
      v = static_cast<std::uint64_t>(d);
    }
  } catch (const std::exception&) {
    throw ParseError("invalid count '" + s + "'", 1, column);
  }
  return v;
}

ordered_json jnum(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

ordered_json fit_json(const ChaosIndexEstimate& e) {
  return {{"q_hat", jnum(e.q_hat)},         {"slope", jnum(e.slope)},         {"ci_low", jnum(e.ci_low)},
          {"ci_high", jnum(e.ci_high)},     {"prefactor", jnum(e.prefactor)}, {"slope_se", jnum(e.slope_se)},
          {"r_squared", jnum(e.r_squared)}, {"curvature", jnum(e.curvature)}, {"points", e.points},
          {"flavor", e.flavor == Flavor::global ? "global" : "local"},
          {"model", e.model == FitModel::power ? "pow" : "pow-log"},
          {"interval", e.interval_method}};
}

std::string output_dir_default() {
  if (const char* env = std::getenv("WCC_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path.string() + "'");
  f << content;
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

FitModel parse_model(const std::string& s) {
  if (s == "pow") return FitModel::power;
  if (s == "pow-log" || s == "pow*log" || s == "powlog") return FitModel::power_log;
  throw DomainError("unknown fit model '" + s + "' (pow | pow-log)");
}

// Where a string option came from, to place parse errors inside config files.
struct Origin {
  std::size_t line = 0;  // 0: command line
  std::size_t column = 0;
};

struct Context {
  std::map<std::string, Origin> origins;
  std::ostream* out;
  std::ostream* err;
  std::string config_path;
  mutable bool config_error = false;
  std::vector<std::string> failures;
};

template <class Fn>
auto located(const Context& ctx, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    const auto it = ctx.origins.find(key);
    if (it == ctx.origins.end() || it->second.line == 0)
      throw ParseError("--" + key + ": " + std::string(e.what()).substr(std::string(e.what()).find(' ') + 1), e.line(),
                       e.column());
    const std::string msg = std::string(e.what()).substr(std::string(e.what()).find(' ') + 1);
    ctx.config_error = true;
    throw ParseError(key + ": " + msg, it->second.line, it->second.column + e.column() - 1);
  }
}

MapSpec map_option(const Context& ctx, const std::string& text) {
  return located(ctx, "map", [&] { return parse_map_spec(text); });
}

Partition partition_option(const Context& ctx, const std::string& text, const MapSpec& spec) {
  if (text.empty() || text == "default") return default_partition(spec);
  return located(ctx, "partition", [&] { return parse_partition(text); });
}

std::vector<std::uint64_t> grid_option(const Context& ctx, const std::string& text) {
  return located(ctx, "grid", [&] { return parse_grid(text); });
}

std::vector<std::pair<std::string, std::string>> header(const std::string& command,
                                                        const std::vector<std::pair<std::string, std::string>>& cfg) {
  std::vector<std::pair<std::string, std::string>> h{{"command", command}};
  h.insert(h.end(), cfg.begin(), cfg.end());
  return h;
}

std::string comment_block(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string s;
  for (const auto& [k, v] : kv) s += "# " + k + ": " + v + "\n";
  return s;
}

ordered_json config_json(const std::vector<std::pair<std::string, std::string>>& kv) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

// Symbol string of one sample, orbit or chain, as used by the ensembles.
std::string sample_symbols(const MapSpec& spec, const Partition& partition, std::uint64_t n, Rng& rng,
                           std::optional<double> x0, double& x_used) {
  const bool chain = !spec.is_mp() && partition == default_partition(spec);
  x_used = x0 ? *x0 : rng.uniform();
  if (!chain) return symbolize(x_used, static_cast<std::size_t>(n), spec, partition).to_string();
  std::string s(static_cast<std::size_t>(n), '0');
  if (x_used == 0.0) return s;
  const ChainSampler sampler(spec.eps());
  std::uint64_t t = spec.eps().cell_of(x_used) - 1;
  while (t < n) {
    s[static_cast<std::size_t>(t)] = '1';
    const std::uint64_t K = sampler.draw(rng);
    if (K >= n - t) break;
    t += K;
  }
  return s;
}

void write_gnuplot(const std::filesystem::path& path, const std::string& csv_name, const std::string& title) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set logscale xy\n"
     << "set xlabel 'n'\n"
     << "set title '" << title << "'\n"
     << "plot '" << csv_name << "' using 1:3 with linespoints title 'mean N_n', \\\n"
     << "     '' using 1:5 with linespoints title 'mean I_n'\n";
  write_file(path, gp.str());
}

}  // namespace

std::vector<std::uint64_t> parse_grid(std::string_view text) {
  const std::string s(text);
  if (s.rfind("dyadic:", 0) == 0) {
    const auto dots = s.find("..", 7);
    if (dots == std::string::npos) throw ParseError("expected dyadic:<lo>..<hi>", 1, 8);
    const std::uint64_t lo = parse_count(std::string_view(s).substr(7, dots - 7), 8);
    const std::uint64_t hi = parse_count(std::string_view(s).substr(dots + 2), dots + 3);
    if (hi < lo) throw ParseError("grid upper end below lower end", 1, dots + 3);
    return dyadic_grid(lo, hi);
  }
  std::vector<std::uint64_t> g;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t end = std::min(s.find(',', pos), s.size());
    g.push_back(parse_count(std::string_view(s).substr(pos, end - pos), pos + 1));
    if (g.size() > 1 && g.back() <= g[g.size() - 2]) throw ParseError("grid must be strictly increasing", 1, pos + 1);
    if (end == s.size()) break;
    pos = end + 1;
  }
  return g;
}

std::vector<ConfigEntry> parse_config(std::string_view text) {
  std::vector<ConfigEntry> entries;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, first + 1);
      ConfigEntry e;
      e.key = trim(line.substr(0, eq));
      if (e.key.empty()) throw ParseError("missing key", line_no, first + 1);
      if (e.key.find_first_of(" \t") != std::string::npos) throw ParseError("key contains spaces", line_no, first + 1);
      const auto vstart = line.find_first_not_of(" \t", eq + 1);
      e.value = vstart == std::string_view::npos ? std::string() : trim(line.substr(vstart));
      if (e.value.empty()) throw ParseError("missing value for '" + e.key + "'", line_no, eq + 2);
      e.line = line_no;
      e.value_column = vstart + 1;
      entries.push_back(std::move(e));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return entries;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"wcc: intermittent maps, run-length coding and information growth"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path, output_dir = output_dir_default();
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool gnuplot = false;

  // Options shared by several subcommands.
  std::string map_text, partition_text = "default", grid_text = "dyadic:2^10..2^20", out_path, input_path;
  std::uint64_t n = 0, samples = 0;
  std::optional<double> x0;
  std::string model_text = "pow";
  std::uint64_t min_n = 1000, bootstrap = 200;

  const auto add_common = [&](CLI::App* sub, bool needs_seed) {
    sub->add_option("--config", config_path, "key = value file; flags override it");
    sub->add_option("--threads", threads, "worker threads (default: all cores)");
    sub->add_option("--output-dir", output_dir, "directory for output files (env WCC_OUTPUT_DIR)");
    auto* s = sub->add_option("--seed", seed, "random seed");
    if (needs_seed) s->required();
  };

  auto* sim = app.add_subcommand("simulate", "dump symbolic orbits and passage counts");
  add_common(sim, true);
  sim->add_option("--map", map_text, "map specification")->required();
  sim->add_option("--partition", partition_text, "partition, e.g. Z=0.618");
  sim->add_option("--n", n, "orbit length")->required();
  std::uint64_t sim_samples = 1;
  sim->add_option("--samples", sim_samples, "number of orbits");
  sim->add_option("--x0", x0, "start point (default: uniform draws)");
  sim->add_option("--out", out_path, "write rows to this file instead of stdout");

  auto* enc = app.add_subcommand("encode", "run-length prefix coding of a symbol string");
  add_common(enc, false);
  std::string symbols_text;
  std::uint32_t alphabet = 0;
  enc->add_option("--symbols", symbols_text, "symbol string (0-9, A-Z)");
  enc->add_option("--input", input_path, "file holding the symbol string");
  enc->add_option("--alphabet", alphabet, "alphabet size (default: inferred)");
  enc->add_option("--out", out_path, "write the coded stream (WCC1 format)");

  auto* dec = app.add_subcommand("decode", "decode a WCC1 stream");
  add_common(dec, false);
  dec->add_option("--input", input_path, "coded stream file")->required();
  dec->add_option("--out", out_path, "write symbols to this file instead of stdout");

  auto* sca = app.add_subcommand("scaling", "ensemble growth of N_n and I_n with fitted exponents");
  add_common(sca, true);
  sca->add_option("--map", map_text, "map specification")->required();
  sca->add_option("--partition", partition_text, "partition");
  sca->add_option("--grid", grid_text, "n grid, e.g. dyadic:2^10..2^20");
  samples = 1000;
  sca->add_option("--samples", samples, "orbits per ensemble");
  sca->add_option("--model", model_text, "pow | pow-log");
  sca->add_option("--min-n", min_n, "drop rows with n below this before fitting");
  sca->add_option("--bootstrap", bootstrap, "bootstrap resamples");
  std::optional<double> expect_q, expect_prefactor;
  double tol = 0.1, prefactor_tol = 0.1;
  std::string prefix = "scaling";
  sca->add_option("--expect-q", expect_q, "check |q_hat - value| <= tol");
  sca->add_option("--tol", tol, "tolerance for --expect-q");
  sca->add_option("--expect-prefactor", expect_prefactor, "check the N prefactor within a relative tolerance");
  sca->add_option("--prefactor-tol", prefactor_tol, "relative tolerance for --expect-prefactor");
  sca->add_option("--prefix", prefix, "output file prefix");
  sca->add_flag("--gnuplot", gnuplot, "also write a gnuplot script");

  auto* idx = app.add_subcommand("index", "single-orbit (local) growth exponents");
  add_common(idx, true);
  idx->add_option("--map", map_text, "map specification")->required();
  idx->add_option("--partition", partition_text, "partition");
  idx->add_option("--grid", grid_text, "n grid");
  idx->add_option("--x0", x0, "start point (default: uniform draws)");
  std::uint64_t orbits = 1;
  idx->add_option("--orbits", orbits, "number of start points drawn when --x0 is absent");
  idx->add_option("--min-n", min_n, "drop points with n below this");

  auto* pre = app.add_subcommand("pl-predict", "analytic predictions for a PL map");
  add_common(pre, false);
  pre->add_option("--map", map_text, "pl map specification")->required();
  std::uint64_t states = 10;
  pre->add_option("--states", states, "number of chain states to list");

  auto* tab = app.add_subcommand("pl-table", "analytic and measured summary for PL families");
  add_common(tab, true);
  std::string families = kDefaultFamilies;
  tab->add_option("--families", families, "';'-separated pl map specifications");
  tab->add_option("--grid", grid_text, "n grid");
  std::uint64_t tab_samples = 1000;
  tab->add_option("--samples", tab_samples, "replicas per family");
  tab->add_option("--min-n", min_n, "fit floor");
  tab->add_flag("--gnuplot", gnuplot, "also write a gnuplot script");

  auto* ent = app.add_subcommand("entropy", "Birkhoff average of log|G'| and passage-time tail");
  add_common(ent, true);
  ent->add_option("--map", map_text, "map specification")->required();
  std::uint64_t passages = 1000, ent_samples = 100, tail_samples = 20000, cutoff = 50, cap = 10'000'000;
  bool no_tail = false;
  ent->add_option("--passages", passages, "induced steps per sample");
  ent->add_option("--samples", ent_samples, "independent start points");
  ent->add_option("--tail-samples", tail_samples, "first-passage times for the tail fit");
  ent->add_option("--cutoff", cutoff, "tail cutoff");
  ent->add_option("--cap", cap, "per-passage step cap in the tail fit");
  ent->add_flag("--no-tail", no_tail, "skip the tail fit");

  // Config file entries become flags unless given on the command line.
  std::vector<std::string> args = raw_args;
  std::string cfg_path;
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg_path = args[i].substr(9);
    }
    if (!cfg_path.empty()) {
      const std::string sub_name = args.empty() ? std::string() : args.front();
      CLI::App* sub = nullptr;
      for (auto* s : app.get_subcommands([](CLI::App*) { return true; }))
        if (s->get_name() == sub_name) sub = s;
      ctx.config_path = cfg_path;
      const std::string text = read_text(cfg_path);
      std::vector<std::string> injected;
      for (const auto& e : parse_config(text)) {
        if (e.key == "config") throw ParseError("nested config is not supported", e.line, 1);
        if (sub && !sub->get_option_no_throw("--" + e.key))
          throw ParseError("unknown key '" + e.key + "' for " + sub_name, e.line, 1);
        const bool on_cli = std::any_of(raw_args.begin(), raw_args.end(), [&](const std::string& a) {
          return a == "--" + e.key || a.rfind("--" + e.key + "=", 0) == 0;
        });
        if (on_cli) continue;
        ctx.origins[e.key] = Origin{e.line, e.value_column};
        const auto* opt = sub ? sub->get_option_no_throw("--" + e.key) : nullptr;
        if (opt && opt->get_type_size() == 0) {
          if (e.value == "true" || e.value == "1" || e.value == "yes") injected.push_back("--" + e.key);
        } else {
          injected.push_back("--" + e.key + "=" + e.value);
        }
      }
      if (!args.empty()) args.insert(args.begin() + 1, injected.begin(), injected.end());
    }
  } catch (const ParseError& e) {
    err << "error: " << cfg_path << ":" << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    // ------------------------------------------------------------ simulate
    if (sim->parsed()) {
      const MapSpec spec = map_option(ctx, map_text);
      const Partition partition = partition_option(ctx, partition_text, spec);
      if (n < 1) throw DomainError("--n must be >= 1");
      if (x0 && (*x0 < 0.0 || *x0 > 1.0)) throw DomainError("--x0 must lie in [0,1]");
      const auto cfg = header("simulate", {{"map", spec.describe()},
                                           {"partition", partition.describe()},
                                           {"precision", to_string(spec.precision().mode)},
                                           {"n", std::to_string(n)},
                                           {"samples", std::to_string(sim_samples)},
                                           {"seed", std::to_string(seed)}});
      std::ostringstream rows;
      rows.precision(17);
      rows << comment_block(cfg) << "sample,x0,N_n,symbols\n";
      for (std::uint64_t s = 0; s < sim_samples; ++s) {
        Rng rng(seed, s);
        double x_used = 0.0;
        const std::string sym = sample_symbols(spec, partition, n, rng, x0, x_used);
        const auto N = std::count_if(sym.begin(), sym.end(), [](char c) { return c != '0'; });
        rows << s << ',' << x_used << ',' << N << ',' << sym << '\n';
      }
      if (out_path.empty())
        out << rows.str();
      else
        write_file(std::filesystem::path(output_dir) / out_path, rows.str());
      return 0;
    }

    // -------------------------------------------------------------- encode
    if (enc->parsed()) {
      if (symbols_text.empty() == input_path.empty()) throw DomainError("give exactly one of --symbols or --input");
      const std::string text = input_path.empty() ? symbols_text : read_text(input_path);
      const SymbolString omega = SymbolString::parse(text, alphabet);
      const CodedStream cs = encode(omega);
      const std::uint64_t N = count_passages(omega, omega.size());
      const std::uint64_t I = information_length(omega);
      ordered_json j;
      j["n"] = omega.size();
      j["alphabet"] = omega.alphabet_size;
      j["N"] = N;
      j["I"] = I;
      j["header_bits"] = cs.header_bits;
      j["total_bits"] = cs.bits.size();
      if (omega.alphabet_size == 2) {
        const BoundsCheck b = verify_bounds(omega);
        j["bound_lower"] = jnum(b.lower);
        j["bound_upper"] = jnum(b.upper);
        j["bound_slack"] = jnum(b.slack);
        j["bounds_ok"] = b.ok;
        if (!b.ok) ctx.failures.push_back("information length outside the bound sandwich");
      } else {
        const double nd = static_cast<double>(omega.size()), Nd = static_cast<double>(N);
        const double bound =
            N == 0 ? 0.0 : Nd + 2.0 * Nd * std::log2(nd / Nd) + Nd * std::log2(omega.alphabet_size - 1.0);
        j["passage_bound"] = jnum(bound);
        j["symbol_width"] = symbol_width(omega.alphabet_size);
      }
      if (!out_path.empty()) {
        const auto path = std::filesystem::path(output_dir) / out_path;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        write_stream(path.string(), cs);
        j["file"] = path.string();
      }
      for (const auto& [k, v] : j.items()) out << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    }

    // -------------------------------------------------------------- decode
    if (dec->parsed()) {
      const SymbolString omega = decode(read_stream(input_path));
      const std::string s = omega.to_string();
      if (out_path.empty())
        out << s << '\n';
      else
        write_file(std::filesystem::path(output_dir) / out_path, s + "\n");
      return 0;
    }

    // ------------------------------------------------------------- scaling
    if (sca->parsed()) {
      const MapSpec spec = map_option(ctx, map_text);
      const Partition partition = partition_option(ctx, partition_text, spec);
      const auto grid = grid_option(ctx, grid_text);
      FitOptions fo;
      fo.min_n = min_n;
      fo.model = parse_model(model_text);
      fo.bootstrap = bootstrap;
      fo.seed = seed;
      EnsembleOptions eo;
      eo.threads = threads;
      ScalingTable table = run_ensemble(spec, partition, grid, samples, seed, eo);
      table.metadata.insert(table.metadata.begin(), {"command", "scaling"});
      table.metadata.emplace_back("model", model_text);
      table.metadata.emplace_back("min_n", std::to_string(min_n));
      table.metadata.emplace_back("bootstrap", std::to_string(bootstrap));

      ordered_json j;
      j["config"] = config_json(table.metadata);
      ordered_json fits = ordered_json::object();
      std::optional<ChaosIndexEstimate> fit_n;
      for (const Column col : {Column::N, Column::I}) {
        const char* name = col == Column::N ? "N" : "I";
        try {
          const auto e = fit_power(table, col, fo);
          fits[name] = fit_json(e);
          if (col == Column::N) fit_n = e;
        } catch (const DegenerateFit& e) {
          fits[name] = {{"error", e.what()}};
        }
      }
      j["fits"] = fits;
      const std::uint32_t alpha_size = static_cast<std::uint32_t>(partition.cells());
      ComparisonReport rep = check_sandwich(table, alpha_size);
      if (!spec.is_mp()) {
        try {
          const RegimePrediction pred = classify(spec.eps());
          rep = compare_with_prediction(table, pred, alpha_size);
          j["prediction"] = {{"regime", to_string(pred.regime)}, {"law", pred.law()},
                             {"t0", jnum(pred.t0)},              {"alpha", jnum(pred.alpha)},
                             {"amplitude", jnum(pred.amplitude)}, {"prefactor", jnum(pred.coefficient)}};
        } catch (const std::exception& e) {
          j["prediction"] = {{"error", e.what()}};
        }
      }
      ordered_json rows = ordered_json::array();
      for (const auto& c : rep.rows)
        rows.push_back({{"n", c.n},
                        {"mean_N", jnum(c.mean_N)},
                        {"predicted_N", jnum(c.predicted)},
                        {"ratio", jnum(c.ratio)},
                        {"mean_I", jnum(c.mean_I)},
                        {"upper_I", jnum(c.upper)},
                        {"lower_ok", c.lower_ok},
                        {"upper_ok", c.upper_ok}});
      j["comparison"] = rows;
      for (const auto& v : rep.violations) ctx.failures.push_back(v);
      if (expect_q) {
        if (!fit_n)
          ctx.failures.push_back("q_hat unavailable (degenerate fit)");
        else if (std::abs(fit_n->q_hat - *expect_q) > tol)
          ctx.failures.push_back("q_hat " + std::to_string(fit_n->q_hat) + " outside " + std::to_string(*expect_q) +
                                 " +- " + std::to_string(tol));
      }
      if (expect_prefactor) {
        if (!fit_n || std::abs(fit_n->prefactor / *expect_prefactor - 1.0) > prefactor_tol)
          ctx.failures.push_back("prefactor outside " + std::to_string(*expect_prefactor) + " +- " +
                                 std::to_string(prefactor_tol * 100.0) + "%");
      }
      j["failures"] = ctx.failures;

      const std::filesystem::path dir(output_dir);
      write_file(dir / (prefix + ".csv"), table.to_csv());
      write_file(dir / (prefix + ".json"), j.dump(2) + "\n");
      if (gnuplot) write_gnuplot(dir / (prefix + ".gp"), prefix + ".csv", spec.describe());
      out << "wrote " << (dir / (prefix + ".csv")).string() << " and " << (dir / (prefix + ".json")).string() << '\n';
      if (fit_n)
        out << "q_hat(N) = " << fit_n->q_hat << " [" << fit_n->ci_low << ", " << fit_n->ci_high
            << "], prefactor = " << fit_n->prefactor << '\n';
    }

    // --------------------------------------------------------------- index
    if (idx->parsed()) {
      const MapSpec spec = map_option(ctx, map_text);
      const Partition partition = partition_option(ctx, partition_text, spec);
      const auto grid = grid_option(ctx, grid_text);
      FitOptions fo;
      fo.min_n = min_n;
      const std::uint64_t count = x0 ? 1 : orbits;
      std::vector<ordered_json> results(count);
      std::vector<double> qs(count, std::nan(""));
      parallel_for(count, threads, [&](std::uint64_t i) {
        Rng rng(seed, i);
        const double start = x0 ? *x0 : rng.uniform();
        ordered_json r{{"x0", start}};
        try {
          const auto e = local_index_estimate(start, spec, partition, grid, fo, splitmix64(seed + i));
          r["fit"] = fit_json(e);
          qs[i] = e.q_hat;
        } catch (const DegenerateFit& e) {
          r["error"] = e.what();
        }
        results[i] = r;
      });
      std::vector<double> valid;
      for (double q : qs)
        if (!std::isnan(q)) valid.push_back(q);
      ordered_json j;
      j["config"] = config_json(header("index", {{"map", spec.describe()},
                                                 {"partition", partition.describe()},
                                                 {"grid", grid_text},
                                                 {"seed", std::to_string(seed)},
                                                 {"orbits", std::to_string(count)},
                                                 {"min_n", std::to_string(min_n)}}));
      if (!valid.empty()) {
        std::sort(valid.begin(), valid.end());
        j["median_q_hat"] = valid[valid.size() / 2];
      }
      j["orbits"] = results;
      out << j.dump(2) << '\n';
      if (valid.empty()) ctx.failures.push_back("no orbit produced a fit");
    }

    // ---------------------------------------------------------- pl-predict
    if (pre->parsed()) {
      const MapSpec spec = map_option(ctx, map_text);
      if (spec.is_mp()) throw DomainError("pl-predict needs a pl map");
      const EpsilonSequence& eps = spec.eps();
      ordered_json j;
      j["map"] = spec.describe();
      const SeriesValue t0 = mean_recurrence_time(eps);
      j["t0"] = jnum(t0.value);
      j["t0_error_bound"] = jnum(t0.error_bound);
      try {
        const RegimePrediction p = classify(eps);
        j["regime"] = to_string(p.regime);
        j["law"] = p.law();
        j["alpha"] = jnum(p.alpha);
        j["amplitude"] = jnum(p.amplitude);
        j["prefactor"] = jnum(p.coefficient);
        ordered_json f = ordered_json::array();
        for (const auto& [x, F] : p.tail_function) f.push_back({{"x", x}, {"F", jnum(F)}});
        j["tail_function"] = f;
      } catch (const Unsupported& e) {
        j["regime"] = "unsupported";
        j["reason"] = e.what();
      }
      const SeriesValue H = induced_entropy_pl(eps);
      j["entropy"] = jnum(H.value);
      j["entropy_error_bound"] = jnum(H.error_bound);
      ordered_json st = ordered_json::array();
      for (std::uint64_t k = 1; k <= states; ++k)
        st.push_back({{"state", k},
                      {"transition_from_1", jnum(eps.cell_length(k))},
                      {"invariant_weight", jnum(invariant_measure(k, eps))},
                      {"invariant_normalized", jnum(normalized_invariant_measure(k, eps))}});
      j["states"] = st;
      out << j.dump(2) << '\n';
    }

    // ------------------------------------------------------------ pl-table
    if (tab->parsed()) {
      const auto grid = grid_option(ctx, grid_text);
      const double nmax = static_cast<double>(grid.back());
      FitOptions fo;
      fo.min_n = min_n;
      fo.seed = seed;
      std::ostringstream csv, text;
      csv.precision(10);
      const auto cfg = header("pl-table", {{"families", families},
                                           {"grid", grid_text},
                                           {"samples", std::to_string(tab_samples)},
                                           {"seed", std::to_string(seed)}});
      csv << comment_block(cfg) << "family,t0,law,H,q_hat,mean_N,mean_I,log2n_sq\n";
      text << std::left << std::setw(22) << "family" << std::setw(12) << "t0" << std::setw(18) << "E[N_n]"
           << std::setw(12) << "H" << std::setw(10) << "q_hat" << "mean_I / (log n)^2\n";
      std::size_t start = 0;
      for (;;) {
        const std::size_t end = std::min(families.find(';', start), families.size());
        const std::string fam = trim(std::string_view(families).substr(start, end - start));
        if (!fam.empty()) {
          const MapSpec spec = located(ctx, "families", [&] { return parse_map_spec(fam); });
          if (spec.is_mp()) throw DomainError("pl-table takes pl families only");
          EnsembleOptions eo;
          eo.threads = threads;
          const ScalingTable t = run_ensemble(spec, default_partition(spec), grid, tab_samples, seed, eo);
          const SeriesValue t0 = mean_recurrence_time(spec.eps());
          std::string law;
          try {
            law = classify(spec.eps()).law();
          } catch (const Unsupported&) {
            law = "unsupported";
          }
          const SeriesValue H = induced_entropy_pl(spec.eps());
          double q = std::nan("");
          try {
            q = fit_power(t, Column::N, fo).q_hat;
          } catch (const std::exception&) {
          }
          const double log_sq = std::pow(std::log(nmax), 2.0);
          const auto fmt = [](double v) {
            std::ostringstream s;
            s.precision(5);
            if (std::isinf(v))
              s << "inf";
            else
              s << v;
            return s.str();
          };
          csv << fam << ',' << fmt(t0.value) << ',' << law << ',' << fmt(H.value) << ',' << fmt(q) << ','
              << t.rows.back().mean_N << ',' << t.rows.back().mean_I << ',' << log_sq << '\n';
          text << std::setw(22) << fam << std::setw(12) << fmt(t0.value) << std::setw(18) << law << std::setw(12)
               << fmt(H.value) << std::setw(10) << fmt(q) << fmt(t.rows.back().mean_I / log_sq) << '\n';
        }
        if (end == families.size()) break;
        start = end + 1;
      }
      const std::filesystem::path dir(output_dir);
      write_file(dir / "pl_table.csv", csv.str());
      if (gnuplot) {
        write_file(dir / "pl_table.gp", "set datafile separator ','\nset key autotitle columnhead\n"
                                        "set style data histogram\nplot 'pl_table.csv' using 5:xtic(1)\n");
      }
      out << text.str();
    }

    // ------------------------------------------------------------- entropy
    if (ent->parsed()) {
      const MapSpec spec = map_option(ctx, map_text);
      ordered_json j;
      j["config"] = config_json(header("entropy", {{"map", spec.describe()},
                                                   {"passages", std::to_string(passages)},
                                                   {"samples", std::to_string(ent_samples)},
                                                   {"seed", std::to_string(seed)},
                                                   {"precision", to_string(spec.precision().mode)}}));
      const BirkhoffEstimate b = birkhoff_induced_entropy(spec, passages, ent_samples, seed, threads);
      j["birkhoff"] = {{"mean", b.mean},
                       {"standard_error", b.standard_error},
                       {"samples", b.samples},
                       {"skipped", b.skipped},
                       {"note", "uniform starts; the induced invariant density is not used"}};
      if (!spec.is_mp()) j["entropy_series"] = jnum(induced_entropy_pl(spec.eps()).value);
      if (!no_tail) {
        TailOptions to;
        to.cutoff = cutoff;
        to.cap = cap;
        to.threads = threads;
        try {
          const TailEstimate t = passage_tail_exponent(spec, tail_samples, seed, to);
          j["tail"] = {{"exponent", t.exponent},
                       {"standard_error", t.standard_error},
                       {"observations", t.observations},
                       {"exceedances", t.exceedances},
                       {"censored", t.censored}};
          if (spec.is_mp()) j["tail"]["expected"] = 1.0 + 1.0 / (spec.z() - 1.0);
        } catch (const InsufficientTail& e) {
          j["tail"] = {{"error", e.what()}};
        }
      }
      if (!(b.mean > 0.0)) ctx.failures.push_back("Birkhoff average is not positive");
      j["failures"] = ctx.failures;
      out << j.dump(2) << '\n';
    }
  } catch (const ParseError& e) {
    err << "error: " << (ctx.config_error ? ctx.config_path + ":" : std::string()) << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (!ctx.failures.empty()) {
    err << ordered_json{{"failures", ctx.failures}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace wcc
