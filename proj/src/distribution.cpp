#include "tiltflux/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tiltflux/errors.hpp"

namespace tiltflux {

Distribution::Distribution(std::vector<double> values, std::vector<double> probs) {
  if (values.size() != probs.size()) throw ValidationError("distribution: size mismatch");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  long double total = 0.0L;
  for (std::size_t i : order) {
    if (!std::isfinite(values[i]) || !(probs[i] >= 0.0) || !std::isfinite(probs[i])) {
      throw ValidationError("distribution: values must be finite and masses nonnegative");
    }
    if (probs[i] == 0.0) continue;
    if (!values_.empty() && values_.back() == values[i]) {
      throw ValidationError("distribution: repeated atom");
    }
    values_.push_back(values[i]);
    probs_.push_back(probs[i]);
    total += probs[i];
  }
  if (values_.size() < 2) {
    throw DegenerateDistributionError("distribution is supported on a single point");
  }
  for (double& p : probs_) p = static_cast<double>(p / total);
}

double Distribution::expect(const RealFn& phi) const {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += static_cast<long double>(probs_[i]) * phi(values_[i]);
  const auto out = static_cast<double>(acc);
  if (!std::isfinite(out)) throw NonFiniteResultError("distribution expectation is not finite");
  return out;
}

double Distribution::cov(const RealFn& phi, const RealFn& psi) const {
  std::vector<double> a(values_.size()), b(values_.size());
  long double ea = 0.0L, eb = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    a[i] = phi(values_[i]);
    b[i] = psi(values_[i]);
    ea += static_cast<long double>(probs_[i]) * a[i];
    eb += static_cast<long double>(probs_[i]) * b[i];
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += static_cast<long double>(probs_[i]) * (a[i] - ea) * (b[i] - eb);
  }
  const auto out = static_cast<double>(acc);
  if (!std::isfinite(out)) throw NonFiniteResultError("distribution covariance is not finite");
  return out;
}

double Distribution::mean() const {
  return expect([](double x) { return x; });
}

double Distribution::variance() const {
  const auto id = [](double x) { return x; };
  return cov(id, id);
}

double Distribution::max_abs_value() const {
  return std::max(std::abs(values_.front()), std::abs(values_.back()));
}

Distribution Distribution::tilted(double theta) const {
  std::vector<double> lw(values_.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    lw[i] = std::log(probs_[i]) + theta * values_[i];
    top = std::max(top, lw[i]);
  }
  std::vector<double> p(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) p[i] = std::exp(lw[i] - top);
  return Distribution(values_, std::move(p));
}

Distribution Distribution::shifted(double shift) const {
  std::vector<double> v(values_);
  for (double& x : v) x += shift;
  return Distribution(std::move(v), probs_);
}

}  // namespace tiltflux
