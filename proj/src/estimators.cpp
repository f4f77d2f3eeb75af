#include "wcc/estimators.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wcc/coding.hpp"
#include "wcc/error.hpp"
#include "wcc/parallel.hpp"

namespace wcc {
namespace {

constexpr std::uint64_t kNoStall = ~std::uint64_t{0};

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_grid(const std::vector<std::uint64_t>& grid) {
  if (grid.empty()) throw DomainError("n grid is empty");
  if (grid.front() < 1) throw DomainError("n grid values must be >= 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("n grid must be strictly increasing");
}

bool chain_applicable(const MapSpec& spec, const Partition& partition, const EnsembleOptions& options) {
  return !spec.is_mp() && options.use_chain_for_pl && partition == default_partition(spec);
}

std::string grid_string(const std::vector<std::uint64_t>& grid) {
  std::string s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(grid[i]);
  }
  return s;
}

// Same as orbit_counts, with the step of the first plain-precision stall.
void orbit_counts_impl(const MapSpec& spec, const Partition& partition, double x0,
                       const std::vector<std::uint64_t>& grid, std::uint64_t* passages,
                       std::uint64_t* information, std::uint64_t& stall_step) {
  const std::uint64_t width = symbol_width(static_cast<std::uint32_t>(partition.cells()));
  const bool plain = spec.is_mp() && spec.precision().mode == PrecisionMode::plain;
  const bool two_cells = partition.cells() == 2;
  const double b1 = partition.breakpoints()[1];
  Orbit orbit(spec, x0);
  std::uint64_t t = 0, zeros = 0, N = 0, I = 0;
  stall_step = kNoStall;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const std::uint64_t target = grid[g];
    while (t < target) {
      if (const std::uint64_t k = orbit.pending_skip(); k > 0) {
        const std::uint64_t run = std::min(k, target - t);
        if (partition.cell_of(orbit.x()) == 0) {
          zeros += run;
        } else {
          N += run;
          I += prefix_code_length(zeros) + (run - 1) + run * width;
          zeros = 0;
        }
        orbit.skip(run);
        t += run;
        continue;
      }
      if (two_cells) {
        // Tight loop until the next grid point or laminar skip.
        while (t < target && orbit.pending_skip() == 0) {
          if (orbit.x() > b1) {
            ++N;
            I += prefix_code_length(zeros) + width;
            zeros = 0;
          } else {
            ++zeros;
          }
          orbit.step();
          ++t;
          if (plain && stall_step == kNoStall && orbit.stalled()) stall_step = t;
        }
        continue;
      }
      if (partition.cell_of(orbit.x()) != 0) {
        ++N;
        I += prefix_code_length(zeros) + width;
        zeros = 0;
      } else {
        ++zeros;
      }
      orbit.step();
      ++t;
      if (plain && stall_step == kNoStall && orbit.stalled()) stall_step = t;
    }
    passages[g] = N;
    information[g] = I;
  }
}

struct OlsFit {
  double slope, intercept, se, r2, curvature;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  OlsFit f{};
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  double ssr = 0.0;
  std::vector<double> res(m), q(m);
  for (std::size_t i = 0; i < m; ++i) {
    res[i] = y[i] - (f.intercept + f.slope * x[i]);
    ssr += res[i] * res[i];
    q[i] = (x[i] - xm) * (x[i] - xm);
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.se = m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
  const double qm = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(m);
  double sqq = 0.0, sqr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sqq += (q[i] - qm) * (q[i] - qm);
    sqr += (q[i] - qm) * res[i];
  }
  f.curvature = sqq > 0.0 ? sqr / sqq : 0.0;
  return f;
}

// Log-space design for the chosen model. Points with value <= 0 are dropped.
void design(const std::vector<double>& n, const std::vector<double>& v, FitModel model, std::vector<double>& x,
            std::vector<double>& y) {
  x.clear();
  y.clear();
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(v[i] > 0.0)) continue;
    x.push_back(std::log(n[i]));
    y.push_back(model == FitModel::power_log ? std::log(v[i]) - std::log(std::log(n[i])) : std::log(v[i]));
  }
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void finalize(ChaosIndexEstimate& e) {
  e.ci_low = std::min(e.ci_low, e.slope);
  e.ci_high = std::max(e.ci_high, e.slope);
  e.q_hat = std::clamp(e.slope, 0.0, 1.0);
  e.ci_low = std::clamp(e.ci_low, 0.0, 1.0);
  e.ci_high = std::clamp(e.ci_high, 0.0, 1.0);
}

}  // namespace

double MomentAccumulator::mean() const noexcept {
  if (count_ == 0) return 0.0;
  return static_cast<double>(sum_) / static_cast<double>(count_);
}

double MomentAccumulator::variance() const noexcept {
  if (count_ < 2) return 0.0;
  // count * sum_sq - sum^2 is exact and nonnegative.
  const unsigned __int128 num = static_cast<unsigned __int128>(count_) * sum_sq_ - sum_ * sum_;
  return static_cast<double>(num) / (static_cast<double>(count_) * static_cast<double>(count_ - 1));
}

void ScalingTable::recompute_rows() {
  const std::size_t G = rows.size();
  for (std::size_t i = 0; i < G; ++i) {
    MomentAccumulator an, ai;
    for (std::uint64_t r = 0; r < replicas; ++r) {
      an.add(replica_N[r * G + i]);
      ai.add(replica_I[r * G + i]);
    }
    auto& row = rows[i];
    row.samples = replicas;
    row.mean_N = an.mean();
    row.var_N = an.variance();
    row.mean_I = ai.mean();
    row.var_I = ai.variance();
    row.flagged = row.samples > 0 && static_cast<double>(row.failed) > 0.01 * static_cast<double>(row.samples);
  }
}

std::string ScalingTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << '\n';
  for (const auto& row : rows)
    if (row.flagged) os << "# flagged: n=" << row.n << " failed=" << row.failed << '\n';
  os << "n,samples,mean_N,var_N,mean_I,var_I\n";
  for (const auto& row : rows)
    os << row.n << ',' << row.samples << ',' << row.mean_N << ',' << row.var_N << ',' << row.mean_I << ','
       << row.var_I << '\n';
  return os.str();
}

std::string ScalingTable::metadata_value(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return {};
}

void orbit_counts(const MapSpec& spec, const Partition& partition, double x0, const std::vector<std::uint64_t>& grid,
                  std::uint64_t* passages, std::uint64_t* information, bool* stalled) {
  check_grid(grid);
  std::uint64_t stall = kNoStall;
  orbit_counts_impl(spec, partition, x0, grid, passages, information, stall);
  if (stalled) *stalled = stall != kNoStall;
}

ScalingTable run_ensemble(const MapSpec& spec, const Partition& partition, const std::vector<std::uint64_t>& n_grid,
                          std::uint64_t samples, std::uint64_t seed, const EnsembleOptions& options) {
  check_grid(n_grid);
  if (samples < 1) throw DomainError("run_ensemble needs samples >= 1");
  const std::size_t G = n_grid.size();
  const bool chain = chain_applicable(spec, partition, options);

  ScalingTable table;
  table.replicas = samples;
  table.replica_N.assign(samples * G, 0);
  table.replica_I.assign(samples * G, 0);
  std::vector<std::uint64_t> stall(samples, kNoStall);

  std::optional<ChainSampler> sampler;
  if (chain) sampler.emplace(spec.eps());
  parallel_for(samples, options.threads, [&](std::uint64_t r) {
    Rng rng(seed, options.first_replica + r);
    std::uint64_t* N = table.replica_N.data() + r * G;
    std::uint64_t* I = table.replica_I.data() + r * G;
    if (chain) {
      chain_counts(*sampler, rng, n_grid, N, I);
    } else {
      orbit_counts_impl(spec, partition, rng.uniform(), n_grid, N, I, stall[r]);
    }
  });

  table.rows.resize(G);
  for (std::size_t i = 0; i < G; ++i) {
    table.rows[i].n = n_grid[i];
    table.rows[i].failed =
        static_cast<std::uint64_t>(std::count_if(stall.begin(), stall.end(), [&](std::uint64_t s) { return s < n_grid[i]; }));
  }
  table.recompute_rows();

  const PrecisionPolicy& p = spec.precision();
  table.metadata = {
      {"map", spec.describe()},
      {"partition", partition.describe()},
      {"seed", std::to_string(seed)},
      {"samples", std::to_string(samples)},
      {"first_replica", std::to_string(options.first_replica)},
      {"grid", grid_string(n_grid)},
      {"engine", chain ? "markov-chain" : "orbit"},
      {"precision", to_string(p.mode)},
  };
  if (spec.is_mp()) {
    table.metadata.emplace_back("threshold", format_double(spec.threshold()));
    if (p.mode == PrecisionMode::ode_approx) table.metadata.emplace_back("biased", "ode-approx laminar skips");
  }
  return table;
}

ScalingTable merge_tables(const ScalingTable& a, const ScalingTable& b) {
  if (a.rows.size() != b.rows.size()) throw DomainError("cannot merge tables with different grids");
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    if (a.rows[i].n != b.rows[i].n) throw DomainError("cannot merge tables with different grids");
  ScalingTable out = a;
  out.replicas = a.replicas + b.replicas;
  out.replica_N.insert(out.replica_N.end(), b.replica_N.begin(), b.replica_N.end());
  out.replica_I.insert(out.replica_I.end(), b.replica_I.begin(), b.replica_I.end());
  for (std::size_t i = 0; i < out.rows.size(); ++i) out.rows[i].failed += b.rows[i].failed;
  out.recompute_rows();
  for (auto& [k, v] : out.metadata)
    if (k == "samples") v = std::to_string(out.replicas);
  return out;
}

ChaosIndexEstimate fit_points(const std::vector<double>& n, const std::vector<double>& values,
                              const FitOptions& options) {
  if (n.size() != values.size()) throw DomainError("fit needs matching n and value columns");
  std::vector<double> kn, kv;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < static_cast<double>(options.min_n)) continue;
    kn.push_back(n[i]);
    kv.push_back(values[i]);
  }
  if (kn.size() < 4) throw DomainError("fit needs at least 4 rows with n >= " + std::to_string(options.min_n));
  if (std::all_of(kv.begin(), kv.end(), [&](double v) { return v == kv.front(); }))
    throw DegenerateFit("all values are equal; no growth exponent");
  std::vector<double> x, y;
  design(kn, kv, options.model, x, y);
  if (x.size() < 4) throw DegenerateFit("fewer than 4 positive values to fit");
  const OlsFit f = ols(x, y);

  ChaosIndexEstimate e;
  e.slope = f.slope;
  e.prefactor = std::exp(f.intercept);
  e.slope_se = f.se;
  e.r_squared = f.r2;
  e.curvature = f.curvature;
  e.points = x.size();
  e.model = options.model;
  const double dof = static_cast<double>(x.size() - 2);
  const double t = boost::math::quantile(boost::math::complement(boost::math::students_t(dof), (1.0 - options.confidence) / 2.0));
  e.ci_low = f.slope - t * f.se;
  e.ci_high = f.slope + t * f.se;
  e.interval_method = "ols";
  finalize(e);
  return e;
}

ChaosIndexEstimate fit_power(const ScalingTable& table, Column column, const FitOptions& options) {
  std::vector<double> n, v;
  for (const auto& row : table.rows) {
    n.push_back(static_cast<double>(row.n));
    v.push_back(column == Column::N ? row.mean_N : row.mean_I);
  }
  ChaosIndexEstimate e = fit_points(n, v, options);
  const std::uint64_t R = table.replicas;
  const std::size_t G = table.rows.size();
  if (R < 2 || options.bootstrap == 0 || table.replica_N.size() != R * G) return e;

  const auto& values = column == Column::N ? table.replica_N : table.replica_I;
  Rng rng(options.seed, 0x626f6f74);  // independent of ensemble streams
  std::vector<double> slopes;
  slopes.reserve(options.bootstrap);
  std::vector<double> sums(G), means(G), x, y;
  std::vector<double> kn, kv;
  for (std::uint64_t b = 0; b < options.bootstrap; ++b) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::uint64_t j = 0; j < R; ++j) {
      const std::uint64_t r = rng.below(R);
      for (std::size_t i = 0; i < G; ++i) sums[i] += static_cast<double>(values[r * G + i]);
    }
    kn.clear();
    kv.clear();
    for (std::size_t i = 0; i < G; ++i) {
      if (n[i] < static_cast<double>(options.min_n)) continue;
      kn.push_back(n[i]);
      kv.push_back(sums[i] / static_cast<double>(R));
    }
    design(kn, kv, options.model, x, y);
    if (x.size() < 4) continue;
    slopes.push_back(ols(x, y).slope);
  }
  if (slopes.size() >= 10) {
    const double a = (1.0 - options.confidence) / 2.0;
    e.ci_low = quantile(slopes, a);
    e.ci_high = quantile(slopes, 1.0 - a);
    e.interval_method = "bootstrap-" + std::to_string(slopes.size());
    finalize(e);
  }
  return e;
}

ChaosIndexEstimate local_index_estimate(double x0, const MapSpec& spec, const Partition& partition,
                                        const std::vector<std::uint64_t>& n_grid, const FitOptions& options,
                                        std::uint64_t seed) {
  check_grid(n_grid);
  if (!std::isfinite(x0) || x0 < 0.0 || x0 > 1.0) throw DomainError("x0 must lie in [0,1]");
  const std::size_t G = n_grid.size();
  std::vector<std::uint64_t> N(G), I(G);
  if (chain_applicable(spec, partition, {}) && x0 > 0.0) {
    const ChainSampler sampler(spec.eps());
    Rng rng(seed, 0);
    chain_counts(sampler, rng, n_grid, N.data(), I.data(), spec.eps().cell_of(x0));
  } else {
    std::uint64_t stall = kNoStall;
    orbit_counts_impl(spec, partition, x0, n_grid, N.data(), I.data(), stall);
  }
  std::vector<double> n(G), v(G);
  for (std::size_t i = 0; i < G; ++i) {
    n[i] = static_cast<double>(n_grid[i]);
    v[i] = static_cast<double>(N[i]);
  }
  ChaosIndexEstimate e = fit_points(n, v, options);
  e.flavor = Flavor::local;
  return e;
}

BirkhoffEstimate birkhoff_induced_entropy(const MapSpec& spec, std::uint64_t passages, std::uint64_t samples,
                                          std::uint64_t seed, unsigned threads) {
  if (passages < 1 || samples < 2) throw DomainError("birkhoff average needs passages >= 1 and samples >= 2");
  std::vector<double> means(samples, 0.0);
  std::vector<char> ok(samples, 1);
  std::optional<ChainSampler> sampler;
  if (!spec.is_mp()) sampler.emplace(spec.eps());
  parallel_for(samples, threads, [&](std::uint64_t s) {
    Rng rng(seed, s);
    double sum = 0.0;
    if (sampler) {
      // G preserves Lebesgue measure and tau is i.i.d. with law (ell_k).
      for (std::uint64_t p = 0; p < passages; ++p) sum -= std::log(spec.eps().cell_length(sampler->draw(rng)));
    } else {
      try {
        Orbit orbit(spec, rng.uniform_open0());
        for (std::uint64_t p = 0; p < passages; ++p) sum += induced_advance_log(orbit).log_derivative;
      } catch (const BudgetError&) {
        ok[s] = 0;
      } catch (const DomainError&) {
        ok[s] = 0;
      }
    }
    means[s] = sum / static_cast<double>(passages);
  });
  BirkhoffEstimate e;
  e.passages = passages;
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    if (!ok[s]) {
      ++e.skipped;
      continue;
    }
    sum += means[s];
    sum2 += means[s] * means[s];
    ++e.samples;
  }
  if (e.samples < 2) throw BudgetError("too few Birkhoff samples completed");
  const double S = static_cast<double>(e.samples);
  e.mean = sum / S;
  e.standard_error = std::sqrt(std::max(0.0, (sum2 - S * e.mean * e.mean) / (S - 1.0)) / S);
  return e;
}

TailEstimate passage_tail_exponent(const MapSpec& spec, std::uint64_t samples, std::uint64_t seed,
                                   const TailOptions& options) {
  if (samples < 1) throw DomainError("tail fit needs samples >= 1");
  if (options.cutoff < 1 || options.cap <= options.cutoff) throw DomainError("tail fit needs 1 <= cutoff < cap");
  constexpr std::uint64_t kChunks = 64;
  std::vector<std::vector<std::uint64_t>> taus(kChunks);
  const MapSpec capped = spec.is_mp() ? spec.with_precision(PrecisionPolicy{spec.precision().mode,
                                                                            spec.precision().threshold, options.cap})
                                      : spec;
  std::optional<ChainSampler> sampler;
  if (!spec.is_mp()) sampler.emplace(spec.eps());
  parallel_for(kChunks, options.threads, [&](std::uint64_t chunk) {
    const std::uint64_t count = samples / kChunks + (chunk < samples % kChunks ? 1 : 0);
    auto& out = taus[chunk];
    out.reserve(count);
    Rng rng(seed, chunk);
    if (sampler) {
      for (std::uint64_t i = 0; i < count; ++i) out.push_back(std::min(sampler->draw(rng), options.cap + 1));
      return;
    }
    Orbit orbit(capped, rng.uniform_open0());
    while (out.size() < count) {
      try {
        out.push_back(induced_advance(orbit));
      } catch (const BudgetError&) {
        out.push_back(options.cap + 1);
        orbit = Orbit(capped, rng.uniform_open0());
      }
    }
  });

  TailEstimate e;
  double log_sum = 0.0;
  const double u = static_cast<double>(options.cutoff) + 0.5;
  const double cap = static_cast<double>(options.cap);
  for (const auto& chunk : taus) {
    for (std::uint64_t tau : chunk) {
      ++e.observations;
      if (tau <= options.cutoff) continue;
      ++e.exceedances;
      if (tau > options.cap) {
        ++e.censored;
        log_sum += std::log((cap + 0.5) / u);
      } else {
        log_sum += std::log((static_cast<double>(tau) - 0.5) / u);
      }
    }
  }
  const std::uint64_t d = e.exceedances - e.censored;
  if (d < 100) throw InsufficientTail("only " + std::to_string(d) + " passage times beyond the cutoff");
  const double alpha = static_cast<double>(d) / log_sum;
  e.exponent = 1.0 + alpha;
  e.standard_error = alpha / std::sqrt(static_cast<double>(d));
  return e;
}

std::uint64_t truncated_complexity(const SymbolString& omega, std::uint64_t k) {
  return information_length(trunc_k(run_length(omega), k));
}

ComparisonReport check_sandwich(const ScalingTable& table, std::uint32_t alphabet_size) {
  ComparisonReport rep;
  const double w = symbol_width(alphabet_size);
  for (const auto& row : table.rows) {
    const double n = static_cast<double>(row.n);
    ComparisonRow c{};
    c.n = row.n;
    c.mean_N = row.mean_N;
    c.mean_I = row.mean_I;
    c.upper = row.mean_N * (std::log2(n) + 1.0 + w) + 2.0 * std::floor(std::log2(n + 1.0)) + 3.0;
    c.lower_ok = row.mean_N <= row.mean_I;
    c.upper_ok = row.mean_I <= c.upper;
    if (!c.lower_ok) rep.violations.push_back("n=" + std::to_string(row.n) + ": mean_I < mean_N");
    if (!c.upper_ok) rep.violations.push_back("n=" + std::to_string(row.n) + ": mean_I above upper bound");
    if (row.flagged) rep.violations.push_back("n=" + std::to_string(row.n) + ": more than 1% failed orbits");
    rep.rows.push_back(c);
  }
  return rep;
}

ComparisonReport compare_with_prediction(const ScalingTable& table, const RegimePrediction& prediction,
                                         std::uint32_t alphabet_size) {
  ComparisonReport rep = check_sandwich(table, alphabet_size);
  for (auto& c : rep.rows) {
    c.predicted = prediction.predicted_mean_N(static_cast<double>(c.n));
    c.ratio = c.predicted > 0.0 ? c.mean_N / c.predicted : 0.0;
  }
  return rep;
}

std::vector<double> low_passage_fraction(const ScalingTable& table) {
  const std::size_t G = table.rows.size();
  if (table.replicas == 0) throw DomainError("table has no replica values");
  std::vector<double> out(G, 0.0);
  for (std::size_t i = 0; i < G; ++i) {
    const double bound = table.rows[i].mean_N / std::log(static_cast<double>(std::max<std::uint64_t>(table.rows[i].n, 3)));
    std::uint64_t hits = 0;
    for (std::uint64_t r = 0; r < table.replicas; ++r)
      if (static_cast<double>(table.replica_N[r * G + i]) <= bound) ++hits;
    out[i] = static_cast<double>(hits) / static_cast<double>(table.replicas);
  }
  return out;
}

std::vector<std::uint64_t> dyadic_grid(std::uint64_t n_min, std::uint64_t n_max) {
  if (n_min < 1 || n_max < n_min) throw DomainError("dyadic grid needs 1 <= n_min <= n_max");
  std::vector<std::uint64_t> g;
  for (std::uint64_t n = n_min; n <= n_max; n *= 2) {
    g.push_back(n);
    if (n > n_max / 2) break;
  }
  if (g.back() != n_max) g.push_back(n_max);
  return g;
}

}  // namespace wcc
