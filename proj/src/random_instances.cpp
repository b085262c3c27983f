#include "tiltflux/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "tiltflux/errors.hpp"

namespace tiltflux {

namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t instance_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix(mix(base) ^ index);
}

IntFn RandomInstance::phi() const {
  auto values = std::make_shared<const std::vector<double>>(phi_values);
  const std::int64_t lo = x_min;
  return [values, lo](std::int64_t x) {
    if (x < lo || x >= lo + static_cast<std::int64_t>(values->size())) {
      throw DomainError("random instance Phi evaluated off its support at x=" + std::to_string(x));
    }
    return (*values)[static_cast<std::size_t>(x - lo)];
  };
}

double RandomInstance::phi_scale() const {
  double s = 0.0;
  for (double v : phi_values) s = std::max(s, std::abs(v));
  return std::max(s, std::numeric_limits<double>::min());
}

RandomInstance random_instance(std::uint64_t seed, const InstanceOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(options.min_support, options.max_support);
  const int n = size_dist(rng);
  // The support must contain 0 and 1.
  std::uniform_int_distribution<std::int64_t> offset(-(n - 2), 0);
  const std::int64_t x_min = offset(rng);

  std::uniform_real_distribution<double> lw_dist(-options.log_weight_bound, options.log_weight_bound);
  std::vector<double> lw(static_cast<std::size_t>(n));
  for (double& v : lw) v = lw_dist(rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> start(-2.0, 2.0);
  std::uniform_real_distribution<double> increment(0.1, 2.0);
  const bool linear = unit(rng) < options.linear_probability;
  std::vector<double> phi(static_cast<std::size_t>(n));
  double slope = start(rng);
  phi[0] = start(rng);
  for (int i = 1; i < n; ++i) {
    phi[static_cast<std::size_t>(i)] = phi[static_cast<std::size_t>(i - 1)] + slope;
    if (!linear && unit(rng) >= options.zero_increment_probability) slope += increment(rng);
  }
  if (!linear && unit(rng) < options.kink_probability) {
    std::uniform_real_distribution<double> where(static_cast<double>(x_min), static_cast<double>(x_min + n - 1));
    const double x0 = where(rng);
    const double b = start(rng);
    const double a = b + increment(rng);
    const double c = start(rng);
    for (int i = 0; i < n; ++i) {
      const double y = static_cast<double>(x_min + i) - x0;
      phi[static_cast<std::size_t>(i)] += c + a * std::max(y, 0.0) - b * std::max(-y, 0.0);
    }
  }
  return RandomInstance{seed, RateFunction::generic_log_weights(x_min, std::move(lw)), x_min, std::move(phi)};
}

Distribution random_lattice_distribution(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, double bound) {
  std::uniform_real_distribution<double> lw(-bound, bound);
  std::vector<double> xs, ps;
  for (std::int64_t x = lo; x <= hi; ++x) {
    xs.push_back(static_cast<double>(x));
    ps.push_back(std::exp(lw(rng)));
  }
  return Distribution(std::move(xs), std::move(ps));
}

KinkInstance random_kink_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size_dist(3, 12);
  const int n = size_dist(rng);
  std::uniform_int_distribution<std::int64_t> offset(-(n - 1), 0);
  const std::int64_t lo = offset(rng);
  const std::int64_t hi = lo + n - 1;
  std::uniform_int_distribution<std::int64_t> interior(lo + 1, hi - 1);
  const auto x0 = static_cast<double>(interior(rng));
  std::uniform_real_distribution<double> slope(-2.0, 2.0), jump(0.1, 2.0);
  const double b = slope(rng);
  const double a = b + jump(rng);
  const double c = slope(rng);
  return KinkInstance{random_lattice_distribution(rng, lo, hi), x0, a, b, c};
}

}  // namespace tiltflux
