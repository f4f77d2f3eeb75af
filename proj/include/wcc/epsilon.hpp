#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wcc {

// Largest cell / chain-state index handled. Lookups for points closer to 0
// than eps(kMaxIndex) saturate here; no orbit of practical length returns
// from that deep.
inline constexpr std::uint64_t kMaxIndex = std::uint64_t{1} << 62;

// Strictly decreasing sequence eps_k -> 0 (k >= 0) with eps_{-1} = 1 that
// defines a piecewise-linear intermittent map. Cell k >= 1 is
// A_k = (eps_{k-1}, eps_{k-2}] and has length ell_k = eps_{k-2} - eps_{k-1}.
class EpsilonSequence {
 public:
  enum class Kind { geometric, power, logarithmic, table };

  // Power-law continuation of an explicit table: eps_k = A (k+1)^-alpha.
  struct PowerTail {
    double alpha;
    double amplitude;
  };

  // eps_k = a^{-k-1}, a > 1.
  static EpsilonSequence geometric(double a);
  // eps_k = (k+2)^{-alpha}, alpha > 0.
  static EpsilonSequence power(double alpha);
  // eps_k = 1 / log(k + e^2).
  static EpsilonSequence logarithmic();
  // Explicit values eps_0, eps_1, ...; beyond the table the optional tail
  // applies, otherwise lookups past the end throw Inconclusive.
  static EpsilonSequence table(std::vector<double> values, std::optional<PowerTail> tail);
  // Reads the explicit-table file format (header `tail: ...`, one value per line).
  static EpsilonSequence load(const std::string& path);

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::optional<PowerTail>& tail() const noexcept { return tail_; }
  const std::string& source_path() const noexcept { return path_; }

  // eps_k for k >= -1.
  double eps(std::int64_t k) const;
  // ell_k for k >= 1, evaluated without cancellation for built-in families.
  double cell_length(std::uint64_t k) const;
  // The k >= 1 with eps_{k-1} < x <= eps_{k-2}; O(log k). Saturates at kMaxIndex.
  std::uint64_t cell_of(double x) const;

  // Tail distribution function F(x) = sum_{r=1}^{floor x} ell_r = 1 - eps_{floor(x)-1}.
  double tail_cdf(double x) const;

  // Checks positivity, strict decrease and the ratio condition
  // ell_{k+1} < ell_k on the first `terms` values; throws DomainError.
  void validate(std::uint64_t terms = 1000) const;

  std::string describe() const;

 private:
  EpsilonSequence(Kind kind, double param) : kind_(kind), param_(param) {}

  double guess_index(double x) const;

  Kind kind_;
  double param_ = 0.0;
  std::vector<double> values_;
  std::optional<PowerTail> tail_;
  std::string path_;
};

}  // namespace wcc
