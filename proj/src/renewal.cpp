#include "wcc/renewal.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wcc/coding.hpp"
#include "wcc/error.hpp"

namespace wcc {
namespace {

constexpr std::uint64_t kMaxSeriesTerms = 1'000'000;

// k^{-alpha} - (k+1)^{-alpha} for real k >= 1.
double power_difference(double k, double alpha) {
  return -std::pow(k, -alpha) * std::expm1(-alpha * std::log1p(1.0 / k));
}

double xlogx(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

// sum_{k >= k0} f(k) for a positive, eventually decreasing f defined on
// the reals. Direct summation, then an Euler-Maclaurin tail
// int_M^inf f + f(M)/2 - f'(M)/12.
template <class F>
SeriesValue sum_series(F f, double k0) {
  SeriesValue out;
  double partial = 0.0, comp = 0.0;
  double k = k0;
  for (std::uint64_t i = 0; i < kMaxSeriesTerms; ++i, k += 1.0) {
    const double term = f(k);
    const double y = term - comp;
    const double t = partial + y;
    comp = (t - partial) - y;
    partial = t;
    ++out.terms;
    if (i >= 1000 && term < 1e-14 * partial) {
      k += 1.0;
      break;
    }
  }
  const double M = k;
  boost::math::quadrature::exp_sinh<double> integrator;
  double quad_error = 0.0;
  const double integral = integrator.integrate([&](double x) { return f(x); }, M,
                                               std::numeric_limits<double>::infinity(), 1e-12, &quad_error);
  const double h = std::max(1e-3, 1e-6 * M);
  const double deriv = (f(M + h) - f(M - h)) / (2.0 * h);
  out.value = partial + integral + 0.5 * f(M) - deriv / 12.0;
  out.error_bound = std::abs(deriv) / 12.0 + quad_error + std::abs(comp);
  return out;
}

}  // namespace

TransitionDistribution transition_distribution(std::uint64_t state, const EpsilonSequence& eps,
                                               std::uint64_t max_states) {
  if (state < 1) throw DomainError("chain states start at 1");
  TransitionDistribution d;
  if (state > 1) {
    d.entries.emplace_back(state - 1, 1.0);
    return d;
  }
  for (std::uint64_t k = 1; k <= max_states; ++k) d.entries.emplace_back(k, eps.cell_length(k));
  d.tail_mass = eps.eps(static_cast<std::int64_t>(max_states) - 1);
  return d;
}

ChainSampler::ChainSampler(const EpsilonSequence& eps)
    : eps_(&eps), binary_geometric_(eps.kind() == EpsilonSequence::Kind::geometric && eps.parameter() == 2.0) {}

void chain_counts(const ChainSampler& sampler, Rng& rng, const std::vector<std::uint64_t>& grid,
                  std::uint64_t* passages, std::uint64_t* information, std::uint64_t initial_state) {
  if (grid.empty()) return;
  const std::uint64_t n_max = grid.back();
  const std::uint64_t k0 = initial_state > 0 ? initial_state : sampler.draw(rng);
  std::uint64_t t = k0 - 1;  // time of the next visit to state 1
  std::uint64_t digit = k0 - 1;
  std::uint64_t N = 0, I = 0;
  std::size_t g = 0;
  for (;;) {
    while (g < grid.size() && grid[g] <= t) {
      passages[g] = N;
      information[g] = I;
      ++g;
    }
    if (g == grid.size()) return;
    ++N;
    I += prefix_code_length(digit);
    const std::uint64_t K = sampler.draw(rng);
    digit = K - 1;
    t = K >= n_max - t ? n_max : t + K;
  }
}

ChainPath sample_chain(std::uint64_t n, const EpsilonSequence& eps, std::uint64_t seed, std::uint64_t replica) {
  if (n < 1) throw DomainError("sample_chain needs n >= 1");
  const ChainSampler sampler(eps);
  Rng rng(seed, replica);
  ChainPath p;
  p.n = n;
  p.initial_state = sampler.draw(rng);
  p.longest_excursion = p.initial_state;
  if (p.initial_state - 1 >= n) {
    p.final_state = p.initial_state - (n - 1);
    return p;
  }
  std::uint64_t t = p.initial_state - 1;
  std::uint64_t digit = t;
  for (;;) {
    ++p.passages;
    p.information += prefix_code_length(digit);
    const std::uint64_t K = sampler.draw(rng);
    p.longest_excursion = std::max(p.longest_excursion, K);
    digit = K - 1;
    if (K > n - 1 - t) {
      p.final_state = K - (n - 1 - t) + 1;
      if (t == n - 1) p.final_state = 1;
      return p;
    }
    t += K;
  }
}

OccupationEstimate simulate_occupation(const EpsilonSequence& eps, std::uint64_t steps, std::uint64_t replicas,
                                       std::uint64_t max_state, std::uint64_t seed, unsigned threads) {
  if (steps < 1 || replicas < 2 || max_state < 1) throw DomainError("occupation needs steps >= 1, replicas >= 2");
  const ChainSampler sampler(eps);
  std::vector<std::vector<std::uint64_t>> counts(replicas, std::vector<std::uint64_t>(max_state, 0));
  parallel_for(replicas, threads, [&](std::uint64_t r) {
    Rng rng(seed, r);
    auto& c = counts[r];
    const std::uint64_t k0 = sampler.draw(rng);
    // Initial descent: state j at time k0 - j.
    for (std::uint64_t j = 2; j <= std::min(k0, max_state); ++j)
      if (k0 - j < steps) ++c[j - 1];
    std::uint64_t t = k0 - 1;
    while (t < steps) {
      ++c[0];
      const std::uint64_t K = sampler.draw(rng);
      // Excursion: state j at time t + K - j + 1.
      for (std::uint64_t j = 2; j <= std::min(K, max_state); ++j)
        if (K - j + 1 < steps - t) ++c[j - 1];
      if (K >= steps - t) break;
      t += K;
    }
  });
  OccupationEstimate est;
  est.steps = steps;
  est.replicas = replicas;
  est.fraction.assign(max_state, 0.0);
  est.standard_error.assign(max_state, 0.0);
  const double R = static_cast<double>(replicas);
  for (std::uint64_t k = 0; k < max_state; ++k) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& c : counts) {
      const double f = static_cast<double>(c[k]) / static_cast<double>(steps);
      sum += f;
      sum2 += f * f;
    }
    const double mean = sum / R;
    const double var = std::max(0.0, (sum2 - R * mean * mean) / (R - 1.0));
    est.fraction[k] = mean;
    est.standard_error[k] = std::sqrt(var / R);
  }
  return est;
}

SeriesValue mean_recurrence_time(const EpsilonSequence& eps) {
  SeriesValue out;
  switch (eps.kind()) {
    case EpsilonSequence::Kind::geometric:
      out.value = eps.parameter() / (eps.parameter() - 1.0);
      return out;
    case EpsilonSequence::Kind::power:
      out.value = eps.parameter() > 1.0 ? boost::math::zeta(eps.parameter()) : kInfinity;
      return out;
    case EpsilonSequence::Kind::logarithmic:
      out.value = kInfinity;
      return out;
    case EpsilonSequence::Kind::table: {
      const auto& tail = eps.tail();
      if (!tail) throw Inconclusive("mean recurrence time undetermined: table has no declared tail");
      if (tail->alpha <= 1.0) {
        out.value = kInfinity;
        return out;
      }
      double head = 1.0;
      for (double v : eps.values()) head += v;
      const double A = tail->amplitude, a = tail->alpha;
      out = sum_series([A, a](double m) { return A * std::pow(m, -a); },
                       static_cast<double>(eps.values().size()) + 1.0);
      out.value += head;
      out.terms += eps.values().size();
      return out;
    }
  }
  return out;
}

double invariant_measure(std::uint64_t k, const EpsilonSequence& eps) {
  if (k < 1) throw DomainError("chain states start at 1");
  return eps.eps(static_cast<std::int64_t>(k) - 2);
}

double normalized_invariant_measure(std::uint64_t k, const EpsilonSequence& eps) {
  const SeriesValue t0 = mean_recurrence_time(eps);
  if (t0.infinite()) return 0.0;
  return invariant_measure(k, eps) / t0.value;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::linear: return "linear";
    case Regime::power: return "power";
    case Regime::logarithmic: return "logarithmic";
  }
  return "?";
}

double RegimePrediction::predicted_mean_N(double n) const {
  switch (regime) {
    case Regime::linear: return n / t0;
    case Regime::power: return coefficient * std::pow(n, alpha);
    case Regime::logarithmic: return std::log(n);
  }
  return 0.0;
}

std::string RegimePrediction::law() const {
  std::ostringstream os;
  os.precision(6);
  switch (regime) {
    case Regime::linear: os << "n/" << t0; break;
    case Regime::power: os << coefficient << "*n^" << alpha; break;
    case Regime::logarithmic: os << "log(n)"; break;
  }
  return os.str();
}

RegimePrediction classify(const EpsilonSequence& eps) {
  RegimePrediction p;
  double tail_alpha = 0.0, tail_amp = 1.0;
  bool power_tail = false;
  switch (eps.kind()) {
    case EpsilonSequence::Kind::geometric:
      break;
    case EpsilonSequence::Kind::power:
      power_tail = true;
      tail_alpha = eps.parameter();
      break;
    case EpsilonSequence::Kind::logarithmic:
      p.regime = Regime::logarithmic;
      break;
    case EpsilonSequence::Kind::table:
      if (!eps.tail()) throw Inconclusive("cannot classify a table without a declared tail");
      power_tail = true;
      tail_alpha = eps.tail()->alpha;
      tail_amp = eps.tail()->amplitude;
      break;
  }
  if (power_tail && tail_alpha == 1.0)
    throw Unsupported("alpha = 1 is the boundary case with no prediction");
  p.t0 = mean_recurrence_time(eps).value;
  if (power_tail && tail_alpha < 1.0) {
    p.regime = Regime::power;
    p.alpha = tail_alpha;
    p.amplitude = tail_amp;
    p.coefficient = std::sin(tail_alpha * std::numbers::pi) / (tail_amp * tail_alpha * std::numbers::pi);
  } else if (p.regime == Regime::linear) {
    p.coefficient = 1.0 / p.t0;
  }
  for (double x = 10.0; x <= 1e6; x *= 10.0) p.tail_function.emplace_back(x, eps.tail_cdf(x));
  return p;
}

SeriesValue induced_entropy_pl(const EpsilonSequence& eps) {
  SeriesValue out;
  switch (eps.kind()) {
    case EpsilonSequence::Kind::geometric: {
      const double a = eps.parameter();
      out.value = -std::log(a - 1.0) + std::log(a) * a / (a - 1.0);
      return out;
    }
    case EpsilonSequence::Kind::power: {
      const double alpha = eps.parameter();
      return sum_series([alpha](double k) { return xlogx(power_difference(k, alpha)); }, 1.0);
    }
    case EpsilonSequence::Kind::logarithmic:
      out.value = kInfinity;
      return out;
    case EpsilonSequence::Kind::table: {
      const auto& tail = eps.tail();
      if (!tail) throw Inconclusive("entropy undetermined: table has no declared tail");
      // Cells 1..V+1 come from table values, later ones from the tail.
      const std::uint64_t V = eps.values().size();
      double head = 0.0;
      for (std::uint64_t k = 1; k <= V + 1; ++k) head += xlogx(eps.cell_length(k));
      const double A = tail->amplitude, a = tail->alpha;
      out = sum_series([A, a](double k) { return xlogx(A * power_difference(k - 1.0, a)); },
                       static_cast<double>(V) + 2.0);
      out.value += head;
      out.terms += V + 1;
      return out;
    }
  }
  return out;
}

}  // namespace wcc
