#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wcc/epsilon.hpp"

namespace wcc {

enum class PrecisionMode { plain, extended, ode_approx };

const char* to_string(PrecisionMode mode);
PrecisionMode parse_precision_mode(const std::string& name);

// How laminar segments near the indifferent fixed point are iterated.
// Below `threshold` the increment r x^z drops under one ulp of x in double
// precision; `extended` continues there in quad-precision software
// arithmetic, `ode_approx` jumps over the segment using the continuum
// escape time of dx/dt = r x^z (biased), `plain` lets the orbit stall.
struct PrecisionPolicy {
  PrecisionMode mode = PrecisionMode::extended;
  std::optional<double> threshold;  // default eps_mach^{1/(z-1)}
  std::uint64_t max_passage_steps = 1'000'000'000;
};

class MapSpec {
 public:
  enum class Kind { mp, pl };

  // x -> x + r x^z (mod 1); requires z > 1 and 0 < r <= 1.
  static MapSpec manneville_pomeau(double z, double r = 1.0, PrecisionPolicy precision = {});
  static MapSpec piecewise_linear(EpsilonSequence eps, PrecisionPolicy precision = {});

  Kind kind() const noexcept { return kind_; }
  bool is_mp() const noexcept { return kind_ == Kind::mp; }
  double z() const noexcept { return z_; }
  double r() const noexcept { return r_; }
  // c for MP maps, eps_0 for PL maps: I_0 = [0, c], I_1 = (c, 1].
  double branch_point() const noexcept { return branch_; }
  const EpsilonSequence& eps() const;
  const PrecisionPolicy& precision() const noexcept { return precision_; }
  double threshold() const noexcept { return threshold_; }
  // Continuum-skip exit level used by ode_approx.
  double resume_level() const noexcept { return resume_; }
  int integer_exponent() const noexcept { return integer_z_; }

  MapSpec with_precision(PrecisionPolicy precision) const;
  // Round-trippable mini-language form, e.g. "mp:z=3,r=1" or "pl:geom,a=2".
  std::string describe() const;

 private:
  MapSpec() = default;

  Kind kind_ = Kind::mp;
  double z_ = 0.0;
  double r_ = 1.0;
  double branch_ = 0.0;
  double threshold_ = 0.0;
  double resume_ = 0.0;
  int integer_z_ = 0;
  std::shared_ptr<const EpsilonSequence> eps_;
  PrecisionPolicy precision_;
};

// Decreasing boundaries a_0 = 1 > a_1 = c > a_2 > ... with
// A_n = (a_n, a_{n-1}] the set of points with first-passage time n.
struct LevelSetTable {
  std::vector<double> boundaries;

  std::uint64_t max_index() const noexcept { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  // n with a_n < x <= a_{n-1}; 0 when x <= a_{max_index}.
  std::uint64_t index_of(double x) const;
};

struct InducedStep {
  double x;
  std::uint64_t tau;
};

double mp_apply(double x, const MapSpec& spec);
double mp_branch_point(double z, double r);
double pl_apply(double x, const MapSpec& spec);
// Dispatches on the map kind, plain double arithmetic.
double apply(double x, const MapSpec& spec);
// T'(x); throws DomainError at branch endpoints.
double derivative(double x, const MapSpec& spec);

// 1 + min{n >= 0 : T^n(x) in I_1}. PL maps use the level-set index,
// MP maps iterate under the precision policy.
std::uint64_t first_passage_time(double x, const MapSpec& spec);
// Always iterates the base map, also for PL maps.
std::uint64_t first_passage_time_iterated(double x, const MapSpec& spec);

LevelSetTable level_sets(const MapSpec& spec, std::uint64_t max_index);

// (G(x), tau(x)) with G = T^tau, obtained by stepping the base map.
InducedStep induced_apply(double x, const MapSpec& spec);
// log |G'(x)|.
double induced_log_derivative(double x, const MapSpec& spec);

namespace detail {
struct ExtendedState;
}

class Orbit;

struct InducedPassage {
  std::uint64_t tau;
  double log_derivative;
};

// Advances an orbit by one induced step (to I_1 and one step beyond) and
// returns tau; the second form also accumulates log |T'| along the way.
std::uint64_t induced_advance(Orbit& orbit);
InducedPassage induced_advance_log(Orbit& orbit);

// Forward orbit of a point under the precision policy of its map.
class Orbit {
 public:
  Orbit(const MapSpec& spec, double x0);
  Orbit(const Orbit& other);
  Orbit& operator=(const Orbit& other);
  Orbit(Orbit&&) noexcept;
  Orbit& operator=(Orbit&&) noexcept;
  ~Orbit();

  // Current point. During an ode_approx skip this stays at the entry point.
  double x() const noexcept { return x_; }
  const MapSpec& spec() const noexcept { return *spec_; }

  void step() {
    if (spec_->is_mp() && !slow_ && x_ >= threshold_) {
      const double y = x_ + r_ * power(x_);
      x_ = y <= 1.0 ? y : y - 1.0;
      return;
    }
    step_slow();
  }

  // Steps left in the current ode_approx laminar skip.
  std::uint64_t pending_skip() const noexcept { return pending_; }
  // Consumes k <= pending_skip() skipped steps at once.
  void skip(std::uint64_t k);

  bool stalled() const noexcept { return stalled_; }
  bool used_extended() const noexcept { return used_extended_; }
  bool used_ode() const noexcept { return used_ode_; }

 private:
  double power(double x) const noexcept {
    switch (integer_z_) {
      case 2: return x * x;
      case 3: return x * x * x;
      case 4: { const double s = x * x; return s * s; }
      default: return power_slow(x);
    }
  }
  double power_slow(double x) const noexcept;
  void step_slow();

  const MapSpec* spec_;
  double x_;
  double threshold_;
  double r_;
  int integer_z_;
  bool slow_ = false;  // extended or skip state active
  std::uint64_t pending_ = 0;
  bool stalled_ = false;
  bool used_extended_ = false;
  bool used_ode_ = false;
  std::unique_ptr<detail::ExtendedState> ext_;
};

}  // namespace wcc
