#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wcc/maps.hpp"
#include "wcc/renewal.hpp"
#include "wcc/symbolic.hpp"

namespace wcc {

// Exact integer moment sums; merging is associative and commutative.
class MomentAccumulator {
 public:
  void add(std::uint64_t v) noexcept {
    ++count_;
    sum_ += v;
    sum_sq_ += static_cast<unsigned __int128>(v) * v;
  }
  void merge(const MomentAccumulator& other) noexcept {
    count_ += other.count_;
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
  }

  std::uint64_t count() const noexcept { return count_; }
  double mean() const noexcept;
  // Unbiased sample variance; 0 for fewer than two values.
  double variance() const noexcept;

  friend bool operator==(const MomentAccumulator&, const MomentAccumulator&) = default;

 private:
  std::uint64_t count_ = 0;
  unsigned __int128 sum_ = 0;
  unsigned __int128 sum_sq_ = 0;
};

struct ScalingRow {
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  double mean_N = 0.0;
  double var_N = 0.0;
  double mean_I = 0.0;
  double var_I = 0.0;
  std::uint64_t failed = 0;  // orbits that stalled in plain precision
  bool flagged = false;      // failed > 1% of samples
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
  // Per-replica values, replica-major: N[r * rows + i]. Used for bootstrap.
  std::vector<std::uint64_t> replica_N;
  std::vector<std::uint64_t> replica_I;
  std::uint64_t replicas = 0;

  // Rebuilds rows from replica values (keeps n and failure counts).
  void recompute_rows();
  std::string to_csv() const;
  std::string metadata_value(const std::string& key) const;
};

struct EnsembleOptions {
  unsigned threads = 0;  // 0 = all cores
  // PL maps with their two-cell partition run on the isomorphic Markov chain.
  bool use_chain_for_pl = true;
  // Replicas [first_replica, first_replica + samples) of the seeded stream.
  std::uint64_t first_replica = 0;
};

ScalingTable run_ensemble(const MapSpec& spec, const Partition& partition, const std::vector<std::uint64_t>& n_grid,
                          std::uint64_t samples, std::uint64_t seed, const EnsembleOptions& options = {});

// Concatenates the replicas of b after those of a (same grid).
ScalingTable merge_tables(const ScalingTable& a, const ScalingTable& b);

// N_n and I_n of one orbit at each grid point.
void orbit_counts(const MapSpec& spec, const Partition& partition, double x0, const std::vector<std::uint64_t>& grid,
                  std::uint64_t* passages, std::uint64_t* information, bool* stalled = nullptr);

enum class Column { N, I };
enum class FitModel { power, power_log };
enum class Flavor { global, local };

struct FitOptions {
  std::uint64_t min_n = 1000;
  FitModel model = FitModel::power;
  std::uint64_t bootstrap = 200;
  double confidence = 0.95;
  std::uint64_t seed = 1;
};

struct ChaosIndexEstimate {
  double q_hat = 0.0;  // clamped to [0,1]
  double ci_low = 0.0;
  double ci_high = 0.0;
  double slope = 0.0;  // unclamped fitted exponent
  double prefactor = 0.0;
  double slope_se = 0.0;
  double r_squared = 0.0;
  double curvature = 0.0;  // quadratic trend left in the residuals
  std::size_t points = 0;
  Flavor flavor = Flavor::global;
  FitModel model = FitModel::power;
  std::string interval_method;
};

// Least squares on log mean versus log n over rows with n >= min_n.
ChaosIndexEstimate fit_power(const ScalingTable& table, Column column, const FitOptions& options = {});

// Same fit on raw (n, value) points, no bootstrap.
ChaosIndexEstimate fit_points(const std::vector<double>& n, const std::vector<double>& values,
                              const FitOptions& options = {});

// Single-orbit slope of log N_n versus log n. PL maps with the two-cell
// partition follow the chain started in the cell of x0, excursions drawn
// from `seed`.
ChaosIndexEstimate local_index_estimate(double x0, const MapSpec& spec, const Partition& partition,
                                        const std::vector<std::uint64_t>& n_grid, const FitOptions& options = {},
                                        std::uint64_t seed = 1);

struct BirkhoffEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t passages = 0;
  std::uint64_t skipped = 0;  // samples lost to budget or branch-point hits
};

BirkhoffEstimate birkhoff_induced_entropy(const MapSpec& spec, std::uint64_t passages, std::uint64_t samples,
                                          std::uint64_t seed, unsigned threads = 0);

struct TailOptions {
  std::uint64_t cutoff = 50;
  std::uint64_t cap = 10'000'000;
  unsigned threads = 0;
};

struct TailEstimate {
  double exponent = 0.0;  // density exponent 1 + alpha
  double standard_error = 0.0;
  std::uint64_t observations = 0;
  std::uint64_t exceedances = 0;
  std::uint64_t censored = 0;
};

// Censored Hill estimate of the tail of first-passage times along induced orbits.
TailEstimate passage_tail_exponent(const MapSpec& spec, std::uint64_t samples, std::uint64_t seed,
                                   const TailOptions& options = {});

std::uint64_t truncated_complexity(const SymbolString& omega, std::uint64_t k);

struct ComparisonRow {
  std::uint64_t n;
  double mean_N;
  double predicted;
  double ratio;
  double mean_I;
  double upper;
  bool lower_ok;
  bool upper_ok;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// Ratios mean_N / prediction and the sandwich
// mean_N <= mean_I <= mean_N (log2 n + 1 + w) + 2 floor(log2(n+1)) + 3.
ComparisonReport compare_with_prediction(const ScalingTable& table, const RegimePrediction& prediction,
                                         std::uint32_t alphabet_size = 2);
// Sandwich only.
ComparisonReport check_sandwich(const ScalingTable& table, std::uint32_t alphabet_size = 2);

// n_0 < 2 n_0 < ... <= n_max (n_max appended when not a power of two times n_0).
// Per row, the fraction of replicas with N_n <= mean_N / log n.
std::vector<double> low_passage_fraction(const ScalingTable& table);

std::vector<std::uint64_t> dyadic_grid(std::uint64_t n_min, std::uint64_t n_max);

}  // namespace wcc
