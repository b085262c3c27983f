#pragma once

#include <algorithm>
#include <cmath>

#include "tiltflux/measure.hpp"

namespace tiltflux {

struct TiltOptions {
  MeasureOptions measure;
  /// Distance kept from a finite end of the tilt domain; also defines the
  /// reported attainable-density interval.
  double domain_margin = 1e-3;
  int max_iterations = 200;
};

/// Result of inverting rho(theta) = E^theta X.
struct TiltSolution {
  double rho = 0.0;       // target density
  double theta = 0.0;
  double variance = 0.0;  // Var^theta X, the derivative d rho / d theta
  int iterations = 0;
  double residual = 0.0;  // rho(theta) - target
  TiltedMeasure measure;  // mu^theta at the returned theta
};

/// Open interval J of densities reachable from the tilt domain shrunk by the
/// domain margin; an infinite endpoint means the density is unbounded there.
struct AttainableInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double rho) const noexcept { return rho > lower && rho < upper; }
  double width() const noexcept { return upper - lower; }
};

double rho_of_theta(const RateFunction& f, double theta, const TiltOptions& options = {});

AttainableInterval attainable_interval(const RateFunction& f, const TiltOptions& options = {});

/// Safeguarded Newton iteration on rho(theta) - rho: a bracket is grown
/// geometrically from a start point inside the domain, Newton steps use
/// Var^theta X as the derivative and fall back to bisection when they leave
/// the bracket. `tol` bounds |rho(theta) - rho|.
TiltSolution theta_of_rho(const RateFunction& f, double rho, double tol, const TiltOptions& options = {});

/// d/drho E^{theta(rho)} phi(X) = Cov(phi, X) / Var X at theta(rho).
double d_drho_expectation(const RateFunction& f, double rho, const IntFn& phi, const TiltOptions& options = {});

/// Default root tolerance for a target density.
inline double default_rho_tol(double rho) { return 1e-13 * std::max(1.0, std::abs(rho)); }

}  // namespace tiltflux
