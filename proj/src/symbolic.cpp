#include "wcc/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wcc/error.hpp"

namespace wcc {

Partition::Partition(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
  if (breakpoints_.size() < 3) throw DomainError("a partition needs at least two cells");
  if (breakpoints_.size() > 257) throw DomainError("a partition supports at most 256 cells");
  if (breakpoints_.front() != 0.0)
    throw DomainError("the leftmost cell must contain the fixed point 0 (b_0 = 0)");
  if (breakpoints_.back() != 1.0) throw DomainError("the last breakpoint must be 1");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i]) || !(breakpoints_[i] > breakpoints_[i - 1]))
      throw DomainError("partition breakpoints must be strictly increasing");
  }
}

Partition Partition::from_interior(const std::vector<double>& interior) {
  std::vector<double> b;
  b.reserve(interior.size() + 2);
  b.push_back(0.0);
  b.insert(b.end(), interior.begin(), interior.end());
  b.push_back(1.0);
  return Partition(std::move(b));
}

std::uint8_t Partition::cell_of_multi(double x) const noexcept {
  // First breakpoint >= x among b_1..b_N; cells are right-closed.
  const auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end(), x);
  if (it == breakpoints_.end()) return static_cast<std::uint8_t>(cells() - 1);
  return static_cast<std::uint8_t>(it - (breakpoints_.begin() + 1));
}

bool Partition::on_breakpoint(double x) const noexcept {
  return std::binary_search(breakpoints_.begin() + 1, breakpoints_.end() - 1, x);
}

std::string Partition::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "Z=";
  for (std::size_t i = 1; i + 1 < breakpoints_.size(); ++i) {
    if (i > 1) os << ',';
    os << breakpoints_[i];
  }
  return os.str();
}

SymbolString::SymbolString(std::uint32_t alphabet, std::vector<std::uint8_t> syms)
    : alphabet_size(alphabet), symbols(std::move(syms)) {
  if (alphabet_size < 2 || alphabet_size > 256) throw DomainError("alphabet size must be in [2, 256]");
  for (auto s : symbols)
    if (s >= alphabet_size) throw DomainError("symbol outside the alphabet");
}

SymbolString SymbolString::parse(std::string_view text, std::uint32_t alphabet_size) {
  std::vector<std::uint8_t> syms;
  syms.reserve(text.size());
  std::uint32_t max_symbol = 0;
  for (char ch : text) {
    std::uint32_t v;
    if (ch >= '0' && ch <= '9') {
      v = static_cast<std::uint32_t>(ch - '0');
    } else if (ch >= 'A' && ch <= 'Z') {
      v = 10u + static_cast<std::uint32_t>(ch - 'A');
    } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      continue;
    } else {
      throw DomainError(std::string("invalid symbol character '") + ch + "'");
    }
    max_symbol = std::max(max_symbol, v);
    syms.push_back(static_cast<std::uint8_t>(v));
  }
  if (alphabet_size == 0) alphabet_size = std::max<std::uint32_t>(2, max_symbol + 1);
  return SymbolString(alphabet_size, std::move(syms));
}

std::string SymbolString::to_string() const {
  std::string s;
  s.reserve(symbols.size());
  for (auto v : symbols) s.push_back(v < 10 ? static_cast<char>('0' + v) : static_cast<char>('A' + v - 10));
  return s;
}

SymbolString symbolize(double x0, std::size_t n, const MapSpec& spec, const Partition& partition,
                       SymbolizeDiagnostics* diagnostics) {
  if (n < 1) throw DomainError("symbolize needs n >= 1");
  SymbolString out;
  out.alphabet_size = static_cast<std::uint32_t>(partition.cells());
  out.symbols.resize(n);
  Orbit orbit(spec, x0);
  std::uint64_t hits = 0;
  std::size_t i = 0;
  while (i < n) {
    if (const std::uint64_t k = orbit.pending_skip(); k > 0) {
      const std::uint8_t sym = partition.cell_of(orbit.x());
      const std::size_t run = static_cast<std::size_t>(std::min<std::uint64_t>(k, n - i));
      std::fill_n(out.symbols.begin() + static_cast<std::ptrdiff_t>(i), run, sym);
      orbit.skip(run);
      i += run;
      continue;
    }
    const double x = orbit.x();
    if (partition.on_breakpoint(x)) ++hits;
    out.symbols[i++] = partition.cell_of(x);
    orbit.step();
  }
  if (diagnostics) {
    diagnostics->boundary_hits = hits;
    diagnostics->stalled = orbit.stalled();
    diagnostics->used_extended = orbit.used_extended();
    diagnostics->used_ode = orbit.used_ode();
  }
  return out;
}

std::uint64_t count_passages(const SymbolString& omega, std::size_t n) {
  if (n > omega.size()) throw DomainError("count_passages: n exceeds the string length");
  return static_cast<std::uint64_t>(
      std::count_if(omega.symbols.begin(), omega.symbols.begin() + static_cast<std::ptrdiff_t>(n),
                    [](std::uint8_t s) { return s != 0; }));
}

Partition default_partition(const MapSpec& spec) { return Partition::from_interior({spec.branch_point()}); }

Partition parse_partition(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == ' ') ++pos;
  if (text.substr(pos, 2) == "Z=") pos += 2;
  std::vector<double> interior;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    std::string token(text.substr(pos, end - pos));
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument("trailing");
      interior.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("invalid breakpoint '" + token + "'", 1, pos + 1);
    }
    if (!(interior.back() > 0.0 && interior.back() < 1.0))
      throw ParseError("breakpoints must lie strictly inside (0,1)", 1, pos + 1);
    if (interior.size() > 1 && !(interior.back() > interior[interior.size() - 2]))
      throw ParseError("breakpoints must be strictly increasing", 1, pos + 1);
    if (end == text.size()) break;
    pos = end + 1;
  }
  return Partition::from_interior(interior);
}

}  // namespace wcc
