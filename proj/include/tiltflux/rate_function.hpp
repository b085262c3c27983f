#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tiltflux {

/// Extended-integer sentinels for an unbounded side of the support.
inline constexpr std::int64_t kMinusInfinity = std::numeric_limits<std::int64_t>::min();
inline constexpr std::int64_t kPlusInfinity = std::numeric_limits<std::int64_t>::max();

/// The discrete interval {x_min, ..., x_max} with x_min <= 0 < 1 <= x_max.
/// Either end may be infinite.
struct SupportInterval {
  std::int64_t x_min = 0;
  std::int64_t x_max = kPlusInfinity;

  bool lower_infinite() const noexcept { return x_min == kMinusInfinity; }
  bool upper_infinite() const noexcept { return x_max == kPlusInfinity; }
  bool finite() const noexcept { return !lower_infinite() && !upper_infinite(); }
  bool contains(std::int64_t x) const noexcept { return x >= x_min && x <= x_max; }
  /// Number of points, or nullopt for an infinite interval.
  std::optional<std::int64_t> size() const noexcept {
    if (!finite()) return std::nullopt;
    return x_max - x_min + 1;
  }
};

enum class RateKind { zrp, blp, generic };

const char* to_string(RateKind kind) noexcept;

/// Exact tilt-domain endpoints known in closed form for a family. When present
/// they override the numerical liminf/limsup estimate.
struct KnownThetaDomain {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// A nonnegative rate function f on a discrete support interval.
///
/// Internally f is carried as log f so that generalized factorials can be
/// accumulated in log space. Instances are immutable and cheap to copy.
class RateFunction {
 public:
  using LogRate = std::function<double(std::int64_t)>;

  /// Builds and validates a rate function from a log-rate evaluator.
  /// `log_rate(x)` returns log f(x), or -inf where f(x) = 0.
  RateFunction(SupportInterval support, RateKind kind, LogRate log_rate, std::string name,
               std::optional<KnownThetaDomain> known = std::nullopt);

  // Built-in families.
  static RateFunction zrp_constant();                 // f(x) = 1{x >= 1}
  static RateFunction zrp_linear();                   // f(x) = x
  static RateFunction zrp_power(double exponent);     // f(x) = x^p, p >= 0
  static RateFunction blp_exp(double beta);           // f(x) = exp(beta (x - 1/2)), beta >= 0
  /// Weights proportional to 1/f(x)! given directly on a finite support;
  /// the support is the (gap-free) key range of `weights`.
  static RateFunction generic_weights(const std::map<std::int64_t, double>& weights,
                                      std::string name = "generic-weights");
  /// Log-weights variant, convenient for randomized instances.
  static RateFunction generic_log_weights(std::int64_t x_min, std::vector<double> log_weights,
                                          std::string name = "generic-weights");
  /// Uniform weights on {x_min, ..., x_max}.
  static RateFunction uniform_weights(std::int64_t x_min, std::int64_t x_max);
  /// Tabulated f(x) on a finite, gap-free key range.
  static RateFunction from_rate_table(RateKind kind, const std::map<std::int64_t, double>& table,
                                      std::string name = "table");

  const SupportInterval& support() const noexcept { return support_; }
  RateKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const std::optional<KnownThetaDomain>& known_theta_domain() const noexcept { return known_; }

  double log_rate(std::int64_t x) const;
  double rate(std::int64_t x) const;

  /// True when f is nondecreasing on [from, to] (intersected with the support).
  bool nondecreasing_on(std::int64_t from, std::int64_t to) const;
  /// True when f(x) == 1 for every x in [from, to].
  bool constant_one_on(std::int64_t from, std::int64_t to) const;

  /// Points examined when validating or probing an unbounded side.
  static constexpr std::int64_t kProbeRange = 512;

 private:
  void validate() const;

  SupportInterval support_;
  RateKind kind_;
  std::shared_ptr<const LogRate> log_rate_;
  std::string name_;
  std::optional<KnownThetaDomain> known_;
};

/// log f(x)!: sum of log f(1..x) for x > 0, minus the sum of log f(x+1..0)
/// for x < 0, and 0 at x = 0. Throws DomainError off the support and
/// SingularRateError when a required factor vanishes.
double log_factorial_product(const RateFunction& f, std::int64_t x);

/// log f(x)! for every x in [lo, hi], accumulated outward from the origin so
/// adjacent entries telescope by a single floating add.
std::vector<double> log_factorial_range(const RateFunction& f, std::int64_t lo, std::int64_t hi);

}  // namespace tiltflux
