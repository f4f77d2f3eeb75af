#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wcc/epsilon.hpp"
#include "wcc/parallel.hpp"

namespace wcc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Value of an infinite series with a bound on the truncation error.
struct SeriesValue {
  double value = 0.0;
  double error_bound = 0.0;
  std::uint64_t terms = 0;

  bool infinite() const noexcept { return value == kInfinity; }
};

struct TransitionDistribution {
  std::vector<std::pair<std::uint64_t, double>> entries;  // (next state, probability)
  double tail_mass = 0.0;  // probability of states beyond the listed ones
};

// Row `state` of the stochastic matrix: from 1 to k with probability ell_k,
// from k > 1 to k - 1. State 1 lists the first `max_states` targets.
TransitionDistribution transition_distribution(std::uint64_t state, const EpsilonSequence& eps,
                                               std::uint64_t max_states = 64);

// Inverse-CDF sampler of the excursion length K ~ (ell_k).
class ChainSampler {
 public:
  explicit ChainSampler(const EpsilonSequence& eps);

  std::uint64_t draw(Rng& rng) const {
    if (binary_geometric_) {
      std::uint64_t k = 1;
      for (;;) {
        const std::uint64_t b = rng.bits();
        if (b != 0) return k + static_cast<std::uint64_t>(std::countl_zero(b));
        k += 64;
      }
    }
    return eps_->cell_of(rng.uniform_open0());
  }
  const EpsilonSequence& eps() const noexcept { return *eps_; }

 private:
  const EpsilonSequence* eps_;
  bool binary_geometric_ = false;
};

struct ChainPath {
  std::uint64_t n = 0;
  std::uint64_t passages = 0;     // N_n, visits to state 1 at times 0..n-1
  std::uint64_t information = 0;  // coded body length of the binary symbol string
  std::uint64_t initial_state = 0;
  std::uint64_t final_state = 0;  // state at time n-1
  std::uint64_t longest_excursion = 0;
};

// One chain path of n steps, initial state drawn from (ell_k).
ChainPath sample_chain(std::uint64_t n, const EpsilonSequence& eps, std::uint64_t seed,
                       std::uint64_t replica = 0);

// N_n and I_n at every grid point (increasing) for one chain path. The
// initial state is drawn from (ell_k) unless given.
void chain_counts(const ChainSampler& sampler, Rng& rng, const std::vector<std::uint64_t>& grid,
                  std::uint64_t* passages, std::uint64_t* information, std::uint64_t initial_state = 0);

struct OccupationEstimate {
  std::vector<double> fraction;        // index k-1 -> mean fraction of time in state k
  std::vector<double> standard_error;  // across replicas
  std::uint64_t steps = 0;
  std::uint64_t replicas = 0;
};

// Fraction of the first `steps` times spent in states 1..max_state.
OccupationEstimate simulate_occupation(const EpsilonSequence& eps, std::uint64_t steps, std::uint64_t replicas,
                                       std::uint64_t max_state, std::uint64_t seed, unsigned threads = 0);

// t_0 = sum_k k ell_k = 1 + sum_{j>=0} eps_j.
SeriesValue mean_recurrence_time(const EpsilonSequence& eps);

// Unnormalized invariant weight p(k) = sum_{n>=0} ell_{n+k} = eps_{k-2}.
double invariant_measure(std::uint64_t k, const EpsilonSequence& eps);
// p(k) / t_0; 0 when t_0 is infinite.
double normalized_invariant_measure(std::uint64_t k, const EpsilonSequence& eps);

enum class Regime { linear, power, logarithmic };
const char* to_string(Regime regime);

struct RegimePrediction {
  double t0 = kInfinity;
  Regime regime = Regime::linear;
  double alpha = 1.0;
  double amplitude = 1.0;
  double coefficient = 0.0;  // n / t0, coefficient * n^alpha, or log n
  std::vector<std::pair<double, double>> tail_function;  // (x, F(x))

  double predicted_mean_N(double n) const;
  std::string law() const;
};

// Throws Unsupported for alpha = 1 and Inconclusive for tables without a tail.
RegimePrediction classify(const EpsilonSequence& eps);

// H = -sum_n ell_n log ell_n (nats); infinite for the logarithmic family.
SeriesValue induced_entropy_pl(const EpsilonSequence& eps);

}  // namespace wcc
