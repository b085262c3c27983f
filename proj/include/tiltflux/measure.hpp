#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tiltflux/distribution.hpp"
#include "tiltflux/rate_function.hpp"

namespace tiltflux {

using IntFn = std::function<double(std::int64_t)>;

/// The open interval (theta_lower, theta_upper) of tilts with a finite
/// normalizer, plus notes on how each side was obtained.
struct ThetaDomain {
  double theta_lower = 0.0;
  double theta_upper = 0.0;
  bool lower_estimated = false;
  bool upper_estimated = false;
  std::vector<std::string> diagnostics;

  bool contains(double theta, double margin = 0.0) const noexcept {
    return theta > theta_lower + margin && theta < theta_upper - margin;
  }
};

/// Estimates the tilt domain from the first `probe_depth` generalized
/// factorials of each unbounded side; bounded sides map to -inf / +inf.
/// Throws InadmissibleDomainError when the interval is empty.
ThetaDomain theta_domain(const RateFunction& f, std::int64_t probe_depth = 4096);

/// The family's exact domain when it is known, otherwise `theta_domain`.
ThetaDomain resolve_theta_domain(const RateFunction& f, std::int64_t probe_depth = 4096);

struct MeasureOptions {
  /// Upper bound on the omitted tail mass relative to the materialized mass.
  double tail_tol = 1e-14;
  /// Required distance between theta and a finite end of the tilt domain.
  double theta_margin = 1e-9;
  /// Hard cap on the number of materialized points.
  std::int64_t max_window = std::int64_t{1} << 24;
};

/// mu^theta(x) proportional to exp(theta x) / f(x)!, materialized on a window
/// of the support with a bound on the omitted mass.
class TiltedMeasure {
 public:
  double theta() const noexcept { return theta_; }
  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return hi_; }
  std::span<const double> probs() const noexcept { return probs_; }
  /// Probability of x; zero outside the window.
  double prob(std::int64_t x) const noexcept;
  /// log of sum_x exp(theta x) / f(x)! over the window.
  double log_normalizer() const noexcept { return log_normalizer_; }
  double truncation_error_bound() const noexcept { return truncation_error_bound_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

  /// Reweights the materialized table by exp(dtheta x).
  TiltedMeasure retilted(double dtheta) const;
  Distribution to_distribution() const;

 private:
  friend TiltedMeasure tilted_measure(const RateFunction&, double, const MeasureOptions&);
  static TiltedMeasure from_log_weights(double theta, std::int64_t lo, std::vector<double> log_weights,
                                        double tail_bound);

  double theta_ = 0.0;
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
  std::vector<double> probs_;
  double log_normalizer_ = 0.0;
  double truncation_error_bound_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

TiltedMeasure tilted_measure(const RateFunction& f, double theta, const MeasureOptions& options = {});

/// sum_x phi(x) mu(x) over the window.
double expect(const TiltedMeasure& m, const IntFn& phi);

/// E[phi psi] - E[phi] E[psi], evaluated in centered form.
double cov(const TiltedMeasure& m, const IntFn& phi, const IntFn& psi);

}  // namespace tiltflux
