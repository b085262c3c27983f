#pragma once

#include <stdexcept>
#include <string>

namespace tiltflux {

/// Base of every error raised by the library. `kind()` is a stable short tag
/// that the command-line front end prints and that tests match against.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TILTFLUX_DEFINE_ERROR(Name, tag)                                 \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(tag, what) {}         \
  };

// measure-core
TILTFLUX_DEFINE_ERROR(DomainError, "domain")
TILTFLUX_DEFINE_ERROR(SingularRateError, "singular-rate")
TILTFLUX_DEFINE_ERROR(InadmissibleDomainError, "inadmissible-domain")
TILTFLUX_DEFINE_ERROR(TruncationFailureError, "truncation-failure")
TILTFLUX_DEFINE_ERROR(NonFiniteResultError, "non-finite-result")
TILTFLUX_DEFINE_ERROR(ValidationError, "validation")
// tilt-map
TILTFLUX_DEFINE_ERROR(RangeError, "range")
TILTFLUX_DEFINE_ERROR(DomainExhaustedError, "domain-exhausted")
TILTFLUX_DEFINE_ERROR(NonConvergenceError, "non-convergence")
// convexity-engine
TILTFLUX_DEFINE_ERROR(ConvexityViolationError, "convexity-violation")
TILTFLUX_DEFINE_ERROR(DegenerateDistributionError, "degenerate-distribution")
TILTFLUX_DEFINE_ERROR(MomentFailureError, "moment-failure")
TILTFLUX_DEFINE_ERROR(ChainMismatchError, "chain-mismatch")
// flux-nu
TILTFLUX_DEFINE_ERROR(TruncationTooCoarseError, "truncation-too-coarse")
TILTFLUX_DEFINE_ERROR(MonotonicityViolationError, "monotonicity-violation")
// zrp-sim
TILTFLUX_DEFINE_ERROR(RateTableExhaustedError, "rate-table-exhausted")
TILTFLUX_DEFINE_ERROR(CouplingUndefinedError, "coupling-undefined")
TILTFLUX_DEFINE_ERROR(GeometryError, "geometry")
TILTFLUX_DEFINE_ERROR(StatisticsError, "statistics")
// cli
TILTFLUX_DEFINE_ERROR(ConfigError, "config")

#undef TILTFLUX_DEFINE_ERROR

}  // namespace tiltflux
