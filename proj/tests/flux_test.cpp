#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tiltflux/errors.hpp"
#include "tiltflux/flux.hpp"
#include "tiltflux/random_instances.hpp"

using namespace tiltflux;

namespace {

double poisson_pmf(double lambda, std::int64_t k) {
  return std::exp(static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
}

// Under tilt 0 the blp-exp measure is proportional to exp(-beta x^2 / 2).
double blp_exp_flux_at_zero(double beta) {
  long double z = 0, s = 0;
  for (int x = -200; x <= 200; ++x) {
    const long double w = std::exp(-0.5L * beta * x * x);
    z += w;
    s += w * std::exp(static_cast<long double>(beta) * x);
  }
  return static_cast<double>(2.0L * std::exp(-0.5L * beta) * s / z);
}

}  // namespace

TEST(Flux, ConstantRateGeometric) {
  const auto f = RateFunction::zrp_constant();
  for (double rho : {0.05, 0.5, 1.0, 3.0, 20.0}) {
    EXPECT_NEAR(zrp_flux(f, rho), rho / (1 + rho), 1e-12) << rho;
    EXPECT_NEAR(characteristic_speed(f, rho, 1.0), 1.0 / ((1 + rho) * (1 + rho)), 1e-10) << rho;
  }
  EXPECT_LT(zrp_flux(f, 1e-6), 2e-6);
}

TEST(Flux, LinearRate) {
  const auto f = RateFunction::zrp_linear();
  for (double rho : {0.1, 1.0, 7.5}) {
    EXPECT_NEAR(zrp_flux(f, rho), rho, 1e-12 * std::max(1.0, rho));
    EXPECT_NEAR(characteristic_speed(f, rho, 1.0), 1.0, 1e-10);
    EXPECT_NEAR(characteristic_speed(f, rho, -2.5), -2.5, 1e-9);
  }
}

TEST(Flux, ZrpFluxApproachesZeroAtLowerEdge) {
  const auto f = RateFunction::zrp_power(2.0);
  EXPECT_LT(zrp_flux(f, 1e-5), 1e-4);
  EXPECT_GT(zrp_flux(f, 1e-5), 0.0);
}

TEST(Flux, KindMismatchRejected) {
  EXPECT_THROW(zrp_flux(RateFunction::blp_exp(1.0), 0.0), ValidationError);
  EXPECT_THROW(blp_flux(RateFunction::zrp_linear(), 1.0), ValidationError);
  EXPECT_THROW(flux(RateFunction::uniform_weights(0, 3), 1.0), ValidationError);
  EXPECT_THROW(zrp_flux(RateFunction::zrp_linear(), -1.0), RangeError);
}

TEST(Flux, BlpExpIsEvenWithMinimumAtZero) {
  for (double beta : {0.3, 1.0, 2.5}) {
    const auto f = RateFunction::blp_exp(beta);
    const double h0 = blp_flux(f, 0.0);
    EXPECT_NEAR(h0, blp_exp_flux_at_zero(beta), 1e-12 * h0) << beta;
    EXPECT_NEAR(characteristic_speed(f, 0.0, 1.0), 0.0, 1e-10) << beta;
    for (double rho : {0.4, 1.3, 3.0}) {
      const double hp = blp_flux(f, rho);
      EXPECT_NEAR(hp, blp_flux(f, -rho), 1e-11 * hp) << beta << " " << rho;
      EXPECT_GT(hp, h0);
    }
  }
}

TEST(Flux, UnitBlpRateIsConstant) {
  const auto f = RateFunction::blp_exp(0.0);
  EXPECT_TRUE(is_unit_blp(f));
  for (double rho : {-3.0, 0.0, 2.0}) EXPECT_EQ(blp_flux(f, rho), 2.0);
  EXPECT_EQ(characteristic_speed(f, 1.0, 3.0), 0.0);
  const auto p = flux_profile(f, {-1.0, 0.0, 1.0});
  EXPECT_EQ(p.classification, Shape::linear);
  EXPECT_THROW(flux_profile(f), DomainError);
}

TEST(FluxProfileTest, ZrpShapes) {
  const std::vector<double> grid = middle_grid(0.0, 6.0, 0.8, 13);
  const auto lin = flux_profile(RateFunction::zrp_linear(), grid);
  EXPECT_EQ(lin.classification, Shape::linear);
  EXPECT_LE(lin.max_abs_second_difference, 1e-9 * lin.scale);

  const auto convex = flux_profile(RateFunction::zrp_power(2.0), grid);
  EXPECT_EQ(convex.classification, Shape::strictly_convex);
  EXPECT_GT(convex.min_second_difference, 0.0);

  const auto concave = flux_profile(RateFunction::zrp_power(0.5), grid);
  EXPECT_EQ(concave.classification, Shape::strictly_concave);
  for (double d : concave.second_differences) EXPECT_LT(d, 0.0);

  const auto step = flux_profile(RateFunction::zrp_constant(), grid);
  EXPECT_EQ(step.classification, Shape::strictly_concave);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(step.H[i], grid[i] / (1 + grid[i]), 1e-12);
    EXPECT_NEAR(step.H_prime[i], 1 / ((1 + grid[i]) * (1 + grid[i])), 1e-10);
    EXPECT_GE(step.H[i], 0.0);
  }
}

TEST(FluxProfileTest, FiniteSupportZrp) {
  const auto convex = RateFunction::from_rate_table(RateKind::zrp, {{0, 0.0}, {1, 1.0}, {2, 3.0}, {3, 6.0}});
  const auto p = flux_profile(convex);
  EXPECT_EQ(p.classification, Shape::strictly_convex);
  EXPECT_GT(p.min_second_difference, 0.0);

  const auto two = RateFunction::from_rate_table(RateKind::zrp, {{0, 0.0}, {1, 2.0}});
  const auto q = flux_profile(two);
  EXPECT_EQ(q.classification, Shape::linear);
  EXPECT_LE(q.max_abs_second_difference, 1e-9 * q.scale);
}

TEST(FluxProfileTest, BlpConvexIsStrict) {
  for (double beta : {0.2, 1.0, 4.0}) {
    const auto p = flux_profile(RateFunction::blp_exp(beta), middle_grid(-4.0, 4.0, 0.75, 13));
    EXPECT_EQ(p.classification, Shape::strictly_convex) << beta;
    EXPECT_GT(p.min_second_difference, 0.0) << beta;
  }
}

TEST(Nu, TwoPointIsPointMass) {
  const auto f = RateFunction::uniform_weights(0, 1);
  for (double rho : {0.2, 0.7}) {
    const auto nu = nu_measure(f, rho);
    EXPECT_EQ(nu.y_lo, 0);
    ASSERT_EQ(nu.probs.size(), 1u);
    EXPECT_NEAR(nu.probs[0], 1.0, 1e-14);
  }
}

TEST(Nu, PoissonNuEqualsMu) {
  const auto f = RateFunction::zrp_linear();
  for (double rho : {0.3, 2.0, 15.0}) {
    const auto nu = nu_measure(f, rho);
    EXPECT_LE(nu.normalization_error, 1e-10);
    for (std::int64_t y = 0; y <= 40; ++y) EXPECT_NEAR(nu.prob(y), poisson_pmf(rho, y), 1e-13) << rho << " " << y;
  }
}

TEST(Nu, NonnegativeAndNormalized) {
  std::mt19937_64 rng(3);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto inst = random_instance(instance_seed(606, i));
    const auto j = attainable_interval(inst.rate);
    std::uniform_real_distribution<double> pick(j.lower + 0.05 * j.width(), j.upper - 0.05 * j.width());
    const auto nu = nu_measure(inst.rate, pick(rng));
    EXPECT_EQ(nu.y_lo, inst.x_min);
    EXPECT_EQ(nu.y_hi(), inst.x_max() - 1);
    double total = 0.0;
    for (double p : nu.probs) {
      EXPECT_GE(p, 0.0);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
  for (const auto& f : {RateFunction::zrp_constant(), RateFunction::zrp_power(1.7), RateFunction::blp_exp(0.8)}) {
    const auto nu = nu_measure(f, 1.5);
    for (double p : nu.probs) EXPECT_GE(p, 0.0);
    EXPECT_LE(nu.normalization_error, 1e-10);
  }
}

TEST(Nu, DerivativeIdentityPoisson) {
  const auto f = RateFunction::zrp_linear();
  for (std::int64_t y : {0, 2, 5}) {
    const auto c = nu_derivative_identity_check(f, 3.0, y, 1e-3);
    EXPECT_NEAR(c.nu, poisson_pmf(3.0, y), 1e-13);
    EXPECT_LT(c.slack, 1e-6);
    EXPECT_LT(c.covariance_slack, 1e-13);
  }
}

TEST(Nu, DerivativeIdentityAtUpperBoundary) {
  const auto f = RateFunction::uniform_weights(-2, 3);
  const auto c = nu_derivative_identity_check(f, 0.5, 2, 1e-3);
  EXPECT_NEAR(c.nu, c.covariance_form, 1e-14);
  EXPECT_LT(c.slack, 1e-5);
  const auto out = nu_derivative_identity_check(f, 0.5, 3, 1e-3);
  EXPECT_EQ(out.nu, 0.0);
  EXPECT_NEAR(out.fd, 0.0, 1e-14);
}

TEST(Nu, DerivativeIdentityIsSecondOrder) {
  std::mt19937_64 rng(8);
  int checked = 0;
  for (std::uint64_t i = 0; i < 60; ++i) {
    const auto inst = random_instance(instance_seed(707, i));
    if (inst.x_max() - inst.x_min < 2) continue;
    const auto j = attainable_interval(inst.rate);
    const double rho = 0.5 * (j.lower + j.upper);
    const std::int64_t y = inst.x_min + static_cast<std::int64_t>((inst.x_max() - inst.x_min) / 2);
    const auto c = nu_derivative_identity_check(inst.rate, rho, y, 1e-2 * j.width());
    EXPECT_LT(c.covariance_slack, 1e-12) << inst.seed;
    if (c.slack > 1e-9) {
      EXPECT_GT(c.richardson_ratio, 3.0) << inst.seed;
      EXPECT_LT(c.richardson_ratio, 5.0) << inst.seed;
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Monotonicity, TwoPointMarginsAreZero) {
  const auto r = stochastic_monotonicity_check(RateFunction::uniform_weights(0, 1), {0.1, 0.5, 0.9});
  EXPECT_NEAR(r.min_margin, 0.0, 1e-14);
  for (double m : r.pair_max_margin) EXPECT_NEAR(m, 0.0, 1e-14);
}

TEST(Monotonicity, PoissonTailsIncrease) {
  const auto r = stochastic_monotonicity_check(RateFunction::zrp_linear(), {0.5, 1.0, 2.0, 4.0});
  EXPECT_GE(r.min_margin, -1e-10);
  for (double m : r.pair_max_margin) EXPECT_GT(m, 1e-3);
  // Brute-force check against Poisson tails.
  for (std::int64_t y = 0; y < 10; ++y) {
    double t1 = 0, t2 = 0;
    for (std::int64_t k = y + 1; k < 80; ++k) {
      t1 += poisson_pmf(1.0, k);
      t2 += poisson_pmf(2.0, k);
    }
    EXPECT_NEAR(r.measures[1].tail(y), t1, 1e-12);
    EXPECT_LE(t1, t2);
  }
}

TEST(Monotonicity, ConstantRateTails) {
  const auto r = stochastic_monotonicity_check(RateFunction::zrp_constant(), middle_grid(0.0, 5.0, 0.9, 10));
  EXPECT_GE(r.min_margin, -1e-10);
  // Tails against direct double summation over the geometric law.
  for (const auto& nu : r.measures) {
    const double q = nu.rho_realized / (1 + nu.rho_realized);
    for (std::int64_t y = 0; y < 10; ++y) {
      double tail = 0.0;
      for (std::int64_t z = y + 1; z < 2000; ++z) {
        double s = 0.0;
        const double mean = nu.rho_realized;
        for (std::int64_t x = z + 1; x < 2000; ++x) s += (x - mean) * (1 - q) * std::pow(q, x);
        tail += s / (mean * (1 + mean));
        if (s < 1e-18) break;
      }
      EXPECT_NEAR(nu.tail(y), tail, 1e-9);
    }
  }
}

TEST(Monotonicity, InputValidation) {
  EXPECT_THROW(stochastic_monotonicity_check(RateFunction::zrp_linear(), {1.0}), ValidationError);
  EXPECT_THROW(stochastic_monotonicity_check(RateFunction::zrp_linear(), {2.0, 1.0}), ValidationError);
}

TEST(Potential, IncrementsAndConvention) {
  const IntFn phi = [](std::int64_t y) { return static_cast<double>(y); };
  const IntFn Phi = potential_from_increments(phi);
  EXPECT_EQ(Phi(1), 0.0);
  EXPECT_EQ(Phi(0), -0.0);
  for (std::int64_t x = -5; x <= 5; ++x) EXPECT_EQ(Phi(x + 1) - Phi(x), phi(x));
}

TEST(Potential, MonotoneTestEquivalence) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t i = 0; i < 40; ++i) {
    const auto inst = random_instance(instance_seed(808, i));
    // bounded nondecreasing phi: a random staircase on the support
    std::vector<double> steps;
    double level = u(rng) - 0.5;
    for (std::int64_t y = inst.x_min; y <= inst.x_max(); ++y) {
      steps.push_back(level);
      level += u(rng) < 0.5 ? 0.0 : u(rng);
    }
    const std::int64_t lo = inst.x_min;
    const IntFn phi = [steps, lo](std::int64_t y) {
      const auto k = std::clamp<std::int64_t>(y - lo, 0, static_cast<std::int64_t>(steps.size()) - 1);
      return steps[static_cast<std::size_t>(k)];
    };
    const IntFn Phi = potential_from_increments(phi);
    const auto j = attainable_interval(inst.rate);
    const double rho = j.lower + (0.3 + 0.4 * u(rng)) * j.width();
    const double h = 1e-3 * j.width();
    const auto up = nu_measure(inst.rate, rho + h);
    const auto dn = nu_measure(inst.rate, rho - h);
    const double lhs = (nu_expect(up, phi) - nu_expect(dn, phi)) / (up.rho_realized - dn.rho_realized);
    const double rhs = G_second_analytic(inst.rate, Phi, rho);
    EXPECT_NEAR(lhs, rhs, 1e-4 * std::max(1.0, std::abs(rhs))) << inst.seed;
  }
}
