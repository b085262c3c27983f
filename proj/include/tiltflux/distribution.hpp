#pragma once

#include <functional>
#include <vector>

namespace tiltflux {

using RealFn = std::function<double(double)>;

/// A finitely supported probability distribution on the real line.
///
/// Used wherever the correlation inequalities are stated "for any
/// distribution". Atoms are sorted and strictly increasing; zero-mass atoms
/// are dropped. A single-atom distribution is rejected.
class Distribution {
 public:
  Distribution(std::vector<double> values, std::vector<double> probs);

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return values_.size(); }

  double expect(const RealFn& phi) const;
  /// Centered two-pass covariance.
  double cov(const RealFn& phi, const RealFn& psi) const;
  double mean() const;
  double variance() const;
  double max_abs_value() const;

  /// Reweights by exp(theta x) and renormalizes.
  Distribution tilted(double theta) const;
  /// Distribution of X + shift.
  Distribution shifted(double shift) const;

 private:
  std::vector<double> values_;
  std::vector<double> probs_;
};

}  // namespace tiltflux
