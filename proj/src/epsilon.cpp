#include "wcc/epsilon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "wcc/error.hpp"

namespace wcc {
namespace {

constexpr double kE2 = std::numbers::e * std::numbers::e;

// k^{-alpha} - (k+1)^{-alpha} for k >= 1.
double power_difference(double k, double alpha) {
  return -std::pow(k, -alpha) * std::expm1(-alpha * std::log1p(1.0 / k));
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

EpsilonSequence EpsilonSequence::geometric(double a) {
  if (!(a > 1.0) || !std::isfinite(a)) throw DomainError("geometric family requires a > 1");
  return EpsilonSequence(Kind::geometric, a);
}

EpsilonSequence EpsilonSequence::power(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("power family requires alpha > 0");
  return EpsilonSequence(Kind::power, alpha);
}

EpsilonSequence EpsilonSequence::logarithmic() { return EpsilonSequence(Kind::logarithmic, 0.0); }

EpsilonSequence EpsilonSequence::table(std::vector<double> values, std::optional<PowerTail> tail) {
  if (values.empty()) throw DomainError("explicit table needs at least one value");
  if (tail && (!(tail->alpha > 0.0) || !(tail->amplitude > 0.0)))
    throw DomainError("tail requires alpha > 0 and A > 0");
  EpsilonSequence seq(Kind::table, 0.0);
  seq.values_ = std::move(values);
  seq.tail_ = tail;
  seq.validate(seq.values_.size() + (tail ? 64 : 0));
  return seq;
}

EpsilonSequence EpsilonSequence::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open epsilon table '" + path + "'");
  std::optional<PowerTail> tail;
  bool have_header = false;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string body = line.substr(first);
    while (!body.empty() && (body.back() == '\r' || body.back() == ' ')) body.pop_back();
    if (!have_header) {
      if (body.rfind("tail:", 0) != 0) throw ParseError("expected 'tail:' header", line_no, first + 1);
      std::istringstream hs(body.substr(5));
      std::string rule;
      hs >> rule;
      if (rule == "none") {
        have_header = true;
        continue;
      }
      if (rule != "pow") throw ParseError("tail rule must be 'pow' or 'none'", line_no, first + 7);
      PowerTail t{0.0, 0.0};
      bool seen_alpha = false, seen_a = false;
      std::string kv;
      while (hs >> kv) {
        const auto eq = kv.find('=');
        const std::size_t col = first + 1 + body.find(kv);
        if (eq == std::string::npos) throw ParseError("expected key=value", line_no, col);
        const std::string key = kv.substr(0, eq);
        double v = 0.0;
        try {
          std::size_t used = 0;
          v = std::stod(kv.substr(eq + 1), &used);
          if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          throw ParseError("invalid number in '" + kv + "'", line_no, col + eq + 1);
        }
        if (key == "alpha") {
          t.alpha = v;
          seen_alpha = true;
        } else if (key == "A") {
          t.amplitude = v;
          seen_a = true;
        } else {
          throw ParseError("unknown tail key '" + key + "'", line_no, col);
        }
      }
      if (!seen_alpha || !seen_a) throw ParseError("pow tail needs alpha= and A=", line_no, first + 1);
      tail = t;
      have_header = true;
      continue;
    }
    try {
      std::size_t used = 0;
      const double v = std::stod(body, &used);
      if (used != body.size()) throw std::invalid_argument("trailing");
      values.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("invalid epsilon value '" + body + "'", line_no, first + 1);
    }
  }
  if (!have_header) throw ParseError("missing 'tail:' header", line_no + 1, 1);
  EpsilonSequence seq = table(std::move(values), tail);
  seq.path_ = path;
  return seq;
}

double EpsilonSequence::eps(std::int64_t k) const {
  if (k < -1) throw DomainError("epsilon index must be >= -1");
  if (k == -1) return 1.0;
  const double kd = static_cast<double>(k);
  switch (kind_) {
    case Kind::geometric:
      return std::pow(param_, -(kd + 1.0));
    case Kind::power:
      return std::pow(kd + 2.0, -param_);
    case Kind::logarithmic:
      return 1.0 / std::log(kd + kE2);
    case Kind::table:
      if (static_cast<std::uint64_t>(k) < values_.size()) return values_[static_cast<std::size_t>(k)];
      if (!tail_) throw Inconclusive("epsilon table exhausted and no tail declared");
      return tail_->amplitude * std::pow(kd + 1.0, -tail_->alpha);
  }
  return 0.0;
}

double EpsilonSequence::cell_length(std::uint64_t k) const {
  if (k < 1) throw DomainError("cell index must be >= 1");
  const double kd = static_cast<double>(k);
  switch (kind_) {
    case Kind::geometric:
      return std::pow(param_, -kd) * (param_ - 1.0);
    case Kind::power:
      return power_difference(kd, param_);
    case Kind::logarithmic: {
      if (k == 1) return 1.0 - eps(0);
      const double base = kd - 2.0 + kE2;
      const double l1 = std::log(base);
      const double l2 = std::log(base + 1.0);
      return std::log1p(1.0 / base) / (l1 * l2);
    }
    case Kind::table:
      if (tail_ && k >= 2 && k - 2 >= values_.size())
        return tail_->amplitude * power_difference(kd - 1.0, tail_->alpha);
      return eps(static_cast<std::int64_t>(k) - 2) - eps(static_cast<std::int64_t>(k) - 1);
  }
  return 0.0;
}

double EpsilonSequence::guess_index(double x) const {
  const double huge = static_cast<double>(kMaxIndex);
  switch (kind_) {
    case Kind::geometric:
      return std::floor(-std::log(x) / std::log(param_));
    case Kind::power:
      return std::floor(std::pow(x, -1.0 / param_)) - 1.0;
    case Kind::logarithmic:
      if (1.0 / x > 43.0) return huge;
      return std::floor(std::exp(1.0 / x) - kE2) + 1.0;
    case Kind::table: {
      // values_ is decreasing; first entry strictly below x.
      const auto first_below = std::upper_bound(values_.begin(), values_.end(), x, std::greater<double>());
      if (first_below != values_.end()) return static_cast<double>(first_below - values_.begin());
      if (!tail_) throw Inconclusive("point lies beyond the epsilon table and no tail is declared");
      const double g = std::floor(std::pow(tail_->amplitude / x, 1.0 / tail_->alpha));
      return std::max(g, static_cast<double>(values_.size()));
    }
  }
  return 0.0;
}

std::uint64_t EpsilonSequence::cell_of(double x) const {
  if (!(x > 0.0) || !(x <= 1.0)) throw DomainError("cell lookup requires x in (0,1]");
  // Smallest j >= -1 with eps_j < x; the cell is j + 1.
  const double limit = static_cast<double>(kMaxIndex - 2);
  double g = guess_index(x);
  if (!(g < limit)) return kMaxIndex;
  std::int64_t j = static_cast<std::int64_t>(std::max(g, -1.0));
  const auto below = [&](std::int64_t i) { return eps(i) < x; };

  std::int64_t lo, hi;  // invariant: eps(lo) >= x, eps(hi) < x
  if (below(j)) {
    hi = j;
    std::int64_t step = 1;
    lo = hi - step;
    while (lo >= -1 && below(lo)) {
      hi = lo;
      step *= 2;
      lo = hi - step;
    }
    if (lo < -1) lo = -1;
    if (below(lo)) return static_cast<std::uint64_t>(lo + 1);
  } else {
    lo = j;
    std::int64_t step = 1;
    hi = lo + step;
    while (!below(hi)) {
      lo = hi;
      step *= 2;
      hi = lo + step;
      if (static_cast<double>(hi) >= limit) return kMaxIndex;
    }
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (below(mid))
      hi = mid;
    else
      lo = mid;
  }
  return static_cast<std::uint64_t>(hi + 1);
}

double EpsilonSequence::tail_cdf(double x) const {
  if (x < 1.0) return 0.0;
  const double fl = std::floor(x);
  if (fl >= static_cast<double>(kMaxIndex)) return 1.0;
  return 1.0 - eps(static_cast<std::int64_t>(fl) - 1);
}

void EpsilonSequence::validate(std::uint64_t terms) const {
  double prev = 1.0;
  for (std::uint64_t k = 0; k < terms; ++k) {
    const double e = eps(static_cast<std::int64_t>(k));
    if (!(e > 0.0)) throw DomainError("epsilon_" + std::to_string(k) + " is not positive");
    if (!(e < prev)) throw DomainError("epsilon sequence is not strictly decreasing at k=" + std::to_string(k));
    prev = e;
  }
  for (std::uint64_t k = 1; k + 1 <= terms; ++k) {
    const double ratio = cell_length(k + 1) / cell_length(k);
    if (!(ratio < 1.0))
      throw DomainError("ratio condition (eps_{k-1}-eps_k)/(eps_{k-2}-eps_{k-1}) < 1 fails at k=" +
                        std::to_string(k + 1));
  }
}

std::string EpsilonSequence::describe() const {
  switch (kind_) {
    case Kind::geometric:
      return "pl:geom,a=" + format_double(param_);
    case Kind::power:
      return "pl:pow,alpha=" + format_double(param_);
    case Kind::logarithmic:
      return "pl:log";
    case Kind::table:
      if (!path_.empty()) return "pl:file,path=" + path_;
      return "pl:table,n=" + std::to_string(values_.size());
  }
  return {};
}

}  // namespace wcc
