#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tiltflux/distribution.hpp"
#include "tiltflux/measure.hpp"
#include "tiltflux/rate_function.hpp"

namespace tiltflux {

/// Knobs of the randomized instance generator. A convex Phi is built from a
/// random starting value and slope plus cumulative nonnegative slope
/// increments; some instances are forced linear, and a kink
/// c + a (x - x0)^+ - b (x - x0)^- with a > b may be added on top.
struct InstanceOptions {
  int min_support = 2;
  int max_support = 12;
  double log_weight_bound = 3.0;
  double linear_probability = 0.15;
  double zero_increment_probability = 0.3;
  double kink_probability = 0.3;
};

struct RandomInstance {
  std::uint64_t seed = 0;
  RateFunction rate;
  std::int64_t x_min = 0;
  std::vector<double> phi_values;  // on x_min, ..., x_max

  std::int64_t x_max() const noexcept { return x_min + static_cast<std::int64_t>(phi_values.size()) - 1; }
  /// Phi on the support; throws DomainError elsewhere.
  IntFn phi() const;
  double phi_scale() const;
};

/// Per-instance seed derived from a base seed, so instance i is reproducible alone.
std::uint64_t instance_seed(std::uint64_t base, std::uint64_t index) noexcept;

RandomInstance random_instance(std::uint64_t seed, const InstanceOptions& options = {});

/// Random masses on the integers {lo, ..., hi}, log-uniform in [-bound, bound].
Distribution random_lattice_distribution(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, double bound = 3.0);

/// A distribution with a convex kink at an atom x0 that has mass on both sides.
struct KinkInstance {
  Distribution distribution;
  double x0 = 0.0;
  double a = 0.0;  // right slope
  double b = 0.0;  // left slope, b < a
  double c = 0.0;
};

KinkInstance random_kink_instance(std::uint64_t seed);

}  // namespace tiltflux
