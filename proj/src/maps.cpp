#include "wcc/maps.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cfloat>
#include <cmath>
#include <functional>
#include <sstream>

#include "wcc/error.hpp"

namespace wcc {
namespace detail {

// 113-bit mantissa, about 34 significant decimal digits.
using Quad = boost::multiprecision::cpp_bin_float_quad;

struct ExtendedState {
  Quad x;
  bool active = false;
};

}  // namespace detail

namespace {

using detail::Quad;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_unit(double x) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw DomainError("x must be a finite value in [0,1]");
}

Quad quad_power(const Quad& x, double z, int integer_z) {
  switch (integer_z) {
    case 2: return x * x;
    case 3: return x * x * x;
    case 4: { const Quad s = x * x; return s * s; }
    default: return boost::multiprecision::pow(x, Quad(z));
  }
}

// Continuum escape time from x to level y under dx/dt = r x^z.
// Same arithmetic as Orbit::power so single steps agree bit for bit.
double mp_power(double x, const MapSpec& spec) {
  switch (spec.integer_exponent()) {
    case 2: return x * x;
    case 3: return x * x * x;
    case 4: { const double s = x * x; return s * s; }
    default: return std::pow(x, spec.z());
  }
}

double continuum_steps(double x, double y, double z, double r) {
  return (std::pow(x, 1.0 - z) - std::pow(y, 1.0 - z)) / (r * (z - 1.0));
}

// Walks the orbit until it enters I_1 = (c, 1]. Returns the number of
// steps taken; `on_point(x)` sees every visited point before its step and
// `on_skip(entry_x)` every ode_approx jump.
template <class OnPoint, class OnSkip>
std::uint64_t walk_to_exit(Orbit& orbit, OnPoint&& on_point, OnSkip&& on_skip) {
  const MapSpec& spec = orbit.spec();
  const double c = spec.branch_point();
  const std::uint64_t budget = spec.precision().max_passage_steps;
  std::uint64_t steps = 0;
  if (spec.is_mp() && orbit.x() < c && orbit.x() > 0.0 && spec.precision().mode != PrecisionMode::ode_approx &&
      continuum_steps(orbit.x(), c, spec.z(), spec.r()) > 1.05 * static_cast<double>(budget))
    throw BudgetError("laminar escape exceeds the iteration cap");
  while (!(orbit.x() > c)) {
    if (orbit.x() == 0.0) throw BudgetError("orbit sits on the indifferent fixed point");
    if (const std::uint64_t k = orbit.pending_skip(); k > 0) {
      if (k > budget - std::min(budget, steps)) throw BudgetError("laminar escape exceeds the iteration cap");
      on_skip(orbit.x());
      orbit.skip(k);
      steps += k;
      continue;
    }
    if (spec.is_mp() && orbit.x() < spec.threshold()) {
      if (spec.precision().mode == PrecisionMode::plain && orbit.stalled())
        throw BudgetError("orbit stalled below the laminar threshold in plain precision");
      if (spec.precision().mode == PrecisionMode::extended &&
          continuum_steps(orbit.x(), c, spec.z(), spec.r()) > static_cast<double>(budget - std::min(budget, steps)))
        throw BudgetError("laminar escape exceeds the iteration cap");
    }
    on_point(orbit.x());
    orbit.step();
    if (++steps > budget) throw BudgetError("first passage not found within the iteration cap");
  }
  return steps;
}

}  // namespace

const char* to_string(PrecisionMode mode) {
  switch (mode) {
    case PrecisionMode::plain: return "plain";
    case PrecisionMode::extended: return "extended";
    case PrecisionMode::ode_approx: return "ode-approx";
  }
  return "?";
}

PrecisionMode parse_precision_mode(const std::string& name) {
  if (name == "plain") return PrecisionMode::plain;
  if (name == "extended") return PrecisionMode::extended;
  if (name == "ode-approx" || name == "ode") return PrecisionMode::ode_approx;
  throw DomainError("unknown precision mode '" + name + "' (plain | extended | ode-approx)");
}

MapSpec MapSpec::manneville_pomeau(double z, double r, PrecisionPolicy precision) {
  if (!std::isfinite(z) || !(z > 1.0)) throw DomainError("MP map requires z > 1");
  if (!std::isfinite(r) || !(r > 0.0)) throw DomainError("MP map requires r > 0");
  // With r > 1 the right branch would wrap more than once and leave [0,1].
  if (r > 1.0) throw DomainError("MP map requires r <= 1 so that T maps (c,1] onto (0,1]");
  MapSpec spec;
  spec.kind_ = Kind::mp;
  spec.z_ = z;
  spec.r_ = r;
  spec.branch_ = mp_branch_point(z, r);
  spec.integer_z_ = (z == std::floor(z) && z <= 4.0) ? static_cast<int>(z) : 0;
  spec.precision_ = precision;
  spec.threshold_ = precision.threshold.value_or(std::pow(DBL_EPSILON, 1.0 / (z - 1.0)));
  if (!(spec.threshold_ > 0.0) || !(spec.threshold_ < spec.branch_))
    throw DomainError("laminar threshold must lie in (0, c)");
  spec.resume_ = std::min(0.5 * spec.branch_, std::max(spec.threshold_, std::pow(256.0 * DBL_EPSILON, 1.0 / (z - 1.0))));
  return spec;
}

MapSpec MapSpec::piecewise_linear(EpsilonSequence eps, PrecisionPolicy precision) {
  MapSpec spec;
  spec.kind_ = Kind::pl;
  spec.branch_ = eps.eps(0);
  spec.precision_ = precision;
  spec.threshold_ = 0.0;
  spec.eps_ = std::make_shared<const EpsilonSequence>(std::move(eps));
  return spec;
}

const EpsilonSequence& MapSpec::eps() const {
  if (!eps_) throw DomainError("MP maps carry no epsilon sequence");
  return *eps_;
}

MapSpec MapSpec::with_precision(PrecisionPolicy precision) const {
  if (kind_ == Kind::mp) return manneville_pomeau(z_, r_, precision);
  MapSpec copy = *this;
  copy.precision_ = precision;
  return copy;
}

std::string MapSpec::describe() const {
  if (kind_ == Kind::pl) return eps_->describe();
  return "mp:z=" + format_double(z_) + ",r=" + format_double(r_);
}

std::uint64_t LevelSetTable::index_of(double x) const {
  const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x, std::greater<double>());
  if (it == boundaries.end()) return 0;
  return static_cast<std::uint64_t>(it - boundaries.begin());
}

double mp_branch_point(double z, double r) {
  if (!(z > 1.0) || !(r > 0.0)) throw DomainError("branch point requires z > 1 and r > 0");
  const auto f = [&](double c) { return c + r * std::pow(c, z) - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  double c = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) c -= f(c) / (1.0 + r * z * std::pow(c, z - 1.0));
  return c;
}

double mp_apply(double x, const MapSpec& spec) {
  if (!spec.is_mp()) throw DomainError("mp_apply needs an MP map");
  check_unit(x);
  if (x == 0.0) return 0.0;
  const double y = x + spec.r() * mp_power(x, spec);
  return y <= 1.0 ? y : y - 1.0;
}

double pl_apply(double x, const MapSpec& spec) {
  if (spec.is_mp()) throw DomainError("pl_apply needs a PL map");
  check_unit(x);
  if (x == 0.0) return 0.0;
  const EpsilonSequence& eps = spec.eps();
  const double e0 = spec.branch_point();
  if (x > e0) return (x - e0) / (1.0 - e0);
  // x in (eps_k, eps_{k-1}] is cell k+1.
  const std::uint64_t cell = eps.cell_of(x);
  if (cell >= kMaxIndex) return x;
  const auto k = static_cast<std::int64_t>(cell) - 1;
  const double lower = eps.eps(k);
  const double upper = eps.eps(k - 1);
  const double slope = eps.cell_length(cell - 1) / eps.cell_length(cell);
  return std::min(eps.eps(k - 2), slope * (x - lower) + upper);
}

double apply(double x, const MapSpec& spec) { return spec.is_mp() ? mp_apply(x, spec) : pl_apply(x, spec); }

double derivative(double x, const MapSpec& spec) {
  check_unit(x);
  if (spec.is_mp()) {
    if (x == spec.branch_point()) throw DomainError("T is not differentiable at the branch point");
    return 1.0 + spec.r() * spec.z() * std::pow(x, spec.z() - 1.0);
  }
  if (x == 0.0) throw DomainError("PL map has no derivative at the accumulation point 0");
  const EpsilonSequence& eps = spec.eps();
  const std::uint64_t cell = eps.cell_of(x);
  if (cell == 1) return 1.0 / eps.cell_length(1);
  if (x == eps.eps(static_cast<std::int64_t>(cell) - 2))
    throw DomainError("PL map is not differentiable at a cell endpoint");
  return eps.cell_length(cell - 1) / eps.cell_length(cell);
}

std::uint64_t first_passage_time(double x, const MapSpec& spec) {
  check_unit(x);
  if (x == 0.0) throw DomainError("first passage time requires x > 0");
  if (!spec.is_mp()) return spec.eps().cell_of(x);
  Orbit orbit(spec, x);
  return 1 + walk_to_exit(orbit, [](double) {}, [](double) {});
}

std::uint64_t first_passage_time_iterated(double x, const MapSpec& spec) {
  check_unit(x);
  if (x == 0.0) throw DomainError("first passage time requires x > 0");
  Orbit orbit(spec, x);
  return 1 + walk_to_exit(orbit, [](double) {}, [](double) {});
}

LevelSetTable level_sets(const MapSpec& spec, std::uint64_t max_index) {
  if (max_index < 1) throw DomainError("level_sets needs max_index >= 1");
  LevelSetTable table;
  table.boundaries.reserve(max_index + 1);
  if (!spec.is_mp()) {
    for (std::uint64_t n = 0; n <= max_index; ++n)
      table.boundaries.push_back(spec.eps().eps(static_cast<std::int64_t>(n) - 1));
    return table;
  }
  const double z = spec.z();
  const double r = spec.r();
  table.boundaries.push_back(1.0);
  table.boundaries.push_back(spec.branch_point());
  for (std::uint64_t n = 1; n < max_index; ++n) {
    const double target = table.boundaries.back();
    // Left-branch preimage y + r y^z = target lies in (target - r target^z, target).
    double lo = std::max(0.0, target - r * std::pow(target, z));
    double hi = target;
    const auto f = [&](double y) { return y + r * std::pow(y, z) - target; };
    while (hi - lo > 1e-14 * target) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    for (int i = 0; i < 2; ++i) y -= f(y) / (1.0 + r * z * std::pow(y, z - 1.0));
    if (!(y > 0.0) || !(y < target) || std::abs(f(y)) > 1e-12)
      throw ConvergenceError("level-set preimage did not converge at n=" + std::to_string(n + 1));
    table.boundaries.push_back(y);
  }
  return table;
}

InducedStep induced_apply(double x, const MapSpec& spec) {
  check_unit(x);
  if (x == 0.0) throw DomainError("induced map requires x > 0");
  Orbit orbit(spec, x);
  const std::uint64_t steps = walk_to_exit(orbit, [](double) {}, [](double) {});
  orbit.step();
  return {orbit.x(), steps + 1};
}

std::uint64_t induced_advance(Orbit& orbit) {
  const std::uint64_t steps = walk_to_exit(orbit, [](double) {}, [](double) {});
  orbit.step();
  return steps + 1;
}

InducedPassage induced_advance_log(Orbit& orbit) {
  const MapSpec& spec = orbit.spec();
  if (!spec.is_mp()) {
    const double x = orbit.x();
    const double d = induced_log_derivative(x, spec);
    return {induced_advance(orbit), d};
  }
  const double c = spec.branch_point();
  const double rz = spec.r() * spec.z();
  const double zm1 = spec.z() - 1.0;
  const int iz = spec.integer_exponent();
  // log prod (1 + t): products for large t, second-order series for small t.
  double sum = 0.0, small = 0.0, product = 1.0;
  const auto add = [&](double y) {
    if (y == c) throw DomainError("orbit hits the branch point");
    double p;
    switch (iz) {
      case 2: p = y; break;
      case 3: p = y * y; break;
      case 4: p = y * y * y; break;
      default: p = std::pow(y, zm1);
    }
    const double t = rz * p;
    if (t < 1e-4) {
      small += t * (1.0 - 0.5 * t);
    } else {
      product *= 1.0 + t;
      if (product > 1e200) {
        sum += std::log(product);
        product = 1.0;
      }
    }
  };
  const std::uint64_t steps =
      walk_to_exit(orbit, add, [&](double entry) { sum += spec.z() * std::log(spec.resume_level() / entry); });
  add(orbit.x());
  orbit.step();
  return {steps + 1, sum + small + std::log(product)};
}

double induced_log_derivative(double x, const MapSpec& spec) {
  check_unit(x);
  if (x == 0.0) throw DomainError("induced map requires x > 0");
  if (!spec.is_mp()) {
    const EpsilonSequence& eps = spec.eps();
    const std::uint64_t tau = eps.cell_of(x);
    if (tau >= kMaxIndex) throw BudgetError("point too close to 0 for a cell lookup");
    if (tau > 1 && x == eps.eps(static_cast<std::int64_t>(tau) - 2))
      throw DomainError("induced map is not differentiable at a cell endpoint");
    return -std::log(eps.cell_length(tau));
  }
  Orbit orbit(spec, x);
  return induced_advance_log(orbit).log_derivative;
}

// ---------------------------------------------------------------------------

Orbit::Orbit(const MapSpec& spec, double x0)
    : spec_(&spec),
      x_(x0),
      threshold_(spec.threshold()),
      r_(spec.r()),
      integer_z_(spec.integer_exponent()) {
  check_unit(x0);
  // PL maps always take the out-of-line path.
  slow_ = !spec.is_mp();
}

Orbit::Orbit(const Orbit& other)
    : spec_(other.spec_),
      x_(other.x_),
      threshold_(other.threshold_),
      r_(other.r_),
      integer_z_(other.integer_z_),
      slow_(other.slow_),
      pending_(other.pending_),
      stalled_(other.stalled_),
      used_extended_(other.used_extended_),
      used_ode_(other.used_ode_),
      ext_(other.ext_ ? std::make_unique<detail::ExtendedState>(*other.ext_) : nullptr) {}

Orbit& Orbit::operator=(const Orbit& other) {
  if (this != &other) {
    Orbit copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Orbit::Orbit(Orbit&&) noexcept = default;
Orbit& Orbit::operator=(Orbit&&) noexcept = default;
Orbit::~Orbit() = default;

double Orbit::power_slow(double x) const noexcept { return std::pow(x, spec_->z()); }

void Orbit::skip(std::uint64_t k) {
  if (k > pending_) throw DomainError("skip exceeds pending laminar steps");
  pending_ -= k;
  if (pending_ == 0 && k > 0) {
    x_ = spec_->resume_level();
    slow_ = false;
  }
}

void Orbit::step_slow() {
  if (!spec_->is_mp()) {
    x_ = pl_apply(x_, *spec_);
    return;
  }
  if (x_ == 0.0) return;
  switch (spec_->precision().mode) {
    case PrecisionMode::plain: {
      const double y = x_ + r_ * power(x_);
      if (y == x_) stalled_ = true;
      x_ = y <= 1.0 ? y : y - 1.0;
      return;
    }
    case PrecisionMode::extended: {
      if (!ext_) ext_ = std::make_unique<detail::ExtendedState>();
      if (!ext_->active) {
        ext_->x = Quad(x_);
        ext_->active = true;
        used_extended_ = true;
        slow_ = true;
      }
      ext_->x += Quad(r_) * quad_power(ext_->x, spec_->z(), integer_z_);
      x_ = static_cast<double>(ext_->x);
      if (x_ >= threshold_) {
        ext_->active = false;
        slow_ = false;
      }
      return;
    }
    case PrecisionMode::ode_approx: {
      if (pending_ == 0) {
        const double steps = std::round(continuum_steps(x_, spec_->resume_level(), spec_->z(), r_));
        pending_ = !(steps < static_cast<double>(kMaxIndex))
                       ? kMaxIndex
                       : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(steps));
        used_ode_ = true;
        slow_ = true;
      }
      skip(1);
      return;
    }
  }
}

}  // namespace wcc
