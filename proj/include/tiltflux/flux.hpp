#pragma once

#include <cstdint>
#include <vector>

#include "tiltflux/convexity.hpp"
#include "tiltflux/tilt_map.hpp"

namespace tiltflux {

/// E^{theta(rho)} f(X). Requires a zrp rate.
double zrp_flux(const RateFunction& f, double rho, const TiltOptions& options = {});

/// E^{theta(rho)} f(X) + E^{theta(rho)} f(-X). Requires a blp rate. The
/// constant rate f = 1 has no stationary product measure and returns 2.
double blp_flux(const RateFunction& f, double rho, const TiltOptions& options = {});

/// Dispatches on the rate kind; generic rates are rejected.
double flux(const RateFunction& f, double rho, const TiltOptions& options = {});

/// The function whose tilted expectation is the flux: f for zrp, f(x) + f(-x) for blp.
IntFn flux_integrand(const RateFunction& f);

/// True for a blp rate equal to 1 on the probe range.
bool is_unit_blp(const RateFunction& f);

/// c H'(rho) with H' from the covariance form.
double characteristic_speed(const RateFunction& f, double rho, double c, const TiltOptions& options = {});

struct FluxProfile {
  std::vector<double> rho_grid;
  std::vector<double> H;
  std::vector<double> H_prime;
  Shape classification = Shape::indeterminate;
  std::vector<double> strict_points;  // slope jumps of the flux integrand
  std::vector<double> second_differences;
  double min_second_difference = 0.0;
  double max_abs_second_difference = 0.0;
  double scale = 0.0;
};

/// Flux, its slope and the shape classification over a density grid. An
/// empty grid means 21 points over the middle 80% of J; the unit blp rate
/// needs an explicit grid.
FluxProfile flux_profile(const RateFunction& f, std::vector<double> rho_grid = {}, const TiltOptions& options = {});

/// nu(y) = Cov(X, 1{X > y}) / Var X under mu^{theta(rho)}, on {lo, ..., hi - 1}
/// of the materialized window.
struct NuMeasure {
  double rho = 0.0;  // requested density
  double rho_realized = 0.0;
  double theta = 0.0;
  std::int64_t y_lo = 0;
  std::vector<double> probs;  // probs[i] = nu(y_lo + i)
  double variance_used = 0.0;
  double normalization_error = 0.0;  // |sum nu - 1|
  double tail_bound = 0.0;           // bound on nu mass lost to truncation

  std::int64_t y_hi() const noexcept { return y_lo + static_cast<std::int64_t>(probs.size()) - 1; }
  double prob(std::int64_t y) const noexcept;
  /// nu{Y > y}.
  double tail(std::int64_t y) const noexcept;
};

inline constexpr double kNuNormalizationTol = 1e-10;

/// Throws TruncationTooCoarseError when the normalization drift stays above
/// 1e-10 after tightening the window.
NuMeasure nu_measure(const RateFunction& f, double rho, double tail_tol = 1e-14, const TiltOptions& options = {});

/// E^nu phi(Y).
double nu_expect(const NuMeasure& nu, const IntFn& phi);

struct NuDerivativeCheck {
  double nu = 0.0;
  /// Central differences of P{X > y} over the realized densities at steps h and h/2.
  double fd = 0.0;
  double fd_half = 0.0;
  double slack = 0.0;       // |nu - fd|
  double slack_half = 0.0;  // |nu - fd_half|
  double richardson_ratio = 0.0;  // slack / slack_half, near 4 for an O(h^2) error
  double covariance_form = 0.0;   // Cov(X, 1{X > y}) / Var X
  double covariance_slack = 0.0;  // |nu - covariance_form|
};

NuDerivativeCheck nu_derivative_identity_check(const RateFunction& f, double rho, std::int64_t y, double h,
                                               const TiltOptions& options = {});

struct MonotonicityReport {
  std::vector<double> rho_grid;
  std::vector<NuMeasure> measures;
  /// Per consecutive pair: min and max over y of nu_{k+1}{Y > y} - nu_k{Y > y}.
  std::vector<double> pair_min_margin;
  std::vector<double> pair_max_margin;
  double min_margin = 0.0;
  double min_margin_rho = 0.0;  // left density of the worst pair
  std::int64_t min_margin_y = 0;
};

inline constexpr double kMonotonicityTol = 1e-10;

/// Compares nu tails for consecutive densities of an increasing grid; throws
/// MonotonicityViolationError when a tail drops by more than 1e-10.
MonotonicityReport stochastic_monotonicity_check(const RateFunction& f, const std::vector<double>& rho_grid,
                                                 const TiltOptions& options = {});

/// Phi with Phi(x+1) - Phi(x) = phi(x) and Phi(1) = 0:
/// Phi(x) = sum_{y=1}^{x-1} phi(y) - sum_{y=x}^{0} phi(y), empty sums zero.
IntFn potential_from_increments(const IntFn& phi);

}  // namespace tiltflux
