#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wcc/maps.hpp"

namespace wcc {

// Finite partition of [0,1] into intervals I_0 = [0, b_1] and
// I_j = (b_j, b_{j+1}] for j >= 1. Symbol 0 is always the cell of the
// indifferent fixed point.
class Partition {
 public:
  // Full breakpoint list 0 = b_0 < b_1 < ... < b_N = 1, N >= 2.
  explicit Partition(std::vector<double> breakpoints);
  // Interior breakpoints only.
  static Partition from_interior(const std::vector<double>& interior);

  std::size_t cells() const noexcept { return breakpoints_.size() - 1; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

  std::uint8_t cell_of(double x) const noexcept {
    if (x <= breakpoints_[1]) return 0;
    if (breakpoints_.size() == 3) return 1;
    return cell_of_multi(x);
  }
  bool on_breakpoint(double x) const noexcept;

  // "Z=0.618" style literal.
  std::string describe() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::uint8_t cell_of_multi(double x) const noexcept;
  std::vector<double> breakpoints_;
};

struct SymbolString {
  std::uint32_t alphabet_size = 2;
  std::vector<std::uint8_t> symbols;

  SymbolString() = default;
  SymbolString(std::uint32_t alphabet, std::vector<std::uint8_t> syms);
  // Digits '0'-'9' then 'A'-'Z' for symbols 10..35.
  static SymbolString parse(std::string_view text, std::uint32_t alphabet_size = 0);

  std::size_t size() const noexcept { return symbols.size(); }
  std::string to_string() const;

  friend bool operator==(const SymbolString&, const SymbolString&) = default;
};

struct SymbolizeDiagnostics {
  std::uint64_t boundary_hits = 0;
  bool stalled = false;
  bool used_extended = false;
  bool used_ode = false;
};

// (omega_0, ..., omega_{n-1}) with omega_i the cell of T^i(x0).
SymbolString symbolize(double x0, std::size_t n, const MapSpec& spec, const Partition& partition,
                       SymbolizeDiagnostics* diagnostics = nullptr);

// #{i < n : omega_i != 0}
std::uint64_t count_passages(const SymbolString& omega, std::size_t n);

// {[0,c], (c,1]} for MP maps, {[0,eps_0], (eps_0,1]} for PL maps.
Partition default_partition(const MapSpec& spec);

// "Z=0.618" or "0.3,0.618"; throws ParseError with the column.
Partition parse_partition(std::string_view text);

}  // namespace wcc
