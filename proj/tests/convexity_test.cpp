#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tiltflux/convexity.hpp"
#include "tiltflux/errors.hpp"
#include "tiltflux/random_instances.hpp"

using namespace tiltflux;

namespace {

const IntFn kSquare = [](std::int64_t x) { return static_cast<double>(x * x); };
const RealFn kSq = [](double x) { return x * x; };
const RealFn kId = [](double x) { return x; };

// Closed form for uniform weights on {-1, 0, 1}, obtained by eliminating the
// tilt between E X = (q - 1/q) / (q + 1 + 1/q) and E X^2 = (q + 1/q) / (q + 1 + 1/q).
double three_point_square(double rho) { return (4.0 - std::sqrt(4.0 - 3.0 * rho * rho)) / 3.0; }

// Covariance of u and v conditioned on an event, computed directly from the atoms.
double conditional_cov(const Distribution& d, const std::function<bool(double)>& event, const RealFn& u,
                       const RealFn& v) {
  long double mass = 0, eu = 0, ev = 0, euv = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = d.values()[i];
    if (!event(x)) continue;
    const long double p = d.probs()[i];
    mass += p;
    eu += p * u(x);
    ev += p * v(x);
    euv += p * u(x) * v(x);
  }
  if (mass == 0) return 0.0;
  return static_cast<double>(euv / mass - (eu / mass) * (ev / mass));
}

}  // namespace

TEST(ExtendPiecewise, LinearHasNoStrictPoints) {
  const auto pw = extend_piecewise(0, 2, [](std::int64_t x) { return static_cast<double>(x); });
  EXPECT_EQ(pw.slopes, (std::vector<double>{1.0, 1.0}));
  EXPECT_TRUE(pw.strict_points.empty());
  EXPECT_TRUE(pw.linear());
}

TEST(ExtendPiecewise, SquareJumpsAtZero) {
  const auto pw = extend_piecewise(-1, 1, kSquare);
  EXPECT_EQ(pw.slopes, (std::vector<double>{-1.0, 1.0}));
  EXPECT_EQ(pw.strict_points, (std::vector<double>{0.0}));
  EXPECT_EQ(pw.slopes_at(0.0), (std::pair<double, double>{-1.0, 1.0}));
  EXPECT_DOUBLE_EQ(pw(0.5), 0.5);
}

TEST(ExtendPiecewise, KinkHasOneStrictPoint) {
  const RealFn kink = kink_function(0.3, 2.0, 1.0, 1.0);
  std::vector<double> xs, vs;
  for (int x = -3; x <= 4; ++x) {
    xs.push_back(x);
    vs.push_back(kink(x));
  }
  const auto pw = extend_piecewise(xs, vs);
  EXPECT_EQ(pw.strict_points, (std::vector<double>{1.0}));
}

TEST(ExtendPiecewise, RejectsNonConvex) {
  try {
    extend_piecewise(-2, 2, [](std::int64_t x) { return -static_cast<double>(x * x); });
    FAIL() << "expected a convexity violation";
  } catch (const ConvexityViolationError& e) {
    EXPECT_NE(std::string(e.what()).find("x=-1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(extend_piecewise(0, 0, kSquare), ValidationError);
}

TEST(ExtendPiecewise, TinyRoundoffJumpIsNotStrict) {
  const std::vector<double> xs{0, 1, 2};
  const std::vector<double> vs{0.1, 0.1 + 1e6, 0.1 + 2e6 + 1e-7};
  EXPECT_TRUE(extend_piecewise(xs, vs).linear());
}

TEST(GTest, TwoPointIsLinearInterpolation) {
  const auto f = RateFunction::generic_weights({{0, 1.0}, {1, 3.0}});
  const IntFn phi = [](std::int64_t x) { return x == 0 ? 1.5 : -0.25; };
  for (double rho : {0.1, 0.5, 0.93}) EXPECT_NEAR(G(f, phi, rho), 1.5 + rho * (-0.25 - 1.5), 1e-13);
}

TEST(GTest, ThreePointClosedForm) {
  const auto f = RateFunction::uniform_weights(-1, 1);
  EXPECT_NEAR(G(f, kSquare, 0.0), 2.0 / 3.0, 1e-15);
  for (double rho = -0.9; rho <= 0.9 + 1e-12; rho += 0.05) {
    EXPECT_NEAR(G(f, kSquare, rho), three_point_square(rho), 1e-12) << rho;
  }
  EXPECT_NEAR(G_second_analytic(f, kSquare, 0.0), 0.5, 1e-12);
}

TEST(GSecondSlack, Examples) {
  const auto poisson = RateFunction::zrp_linear();
  EXPECT_NEAR(G_second_slack(poisson, [](std::int64_t x) { return 3.0 * static_cast<double>(x) - 1.0; }, 2.0), 0.0,
              1e-11);
  EXPECT_GT(G_second_slack(RateFunction::uniform_weights(-1, 1), kSquare, 0.0), 0.0);
  EXPECT_NEAR(G_second_slack(RateFunction::uniform_weights(0, 1), kSquare, 0.3), 0.0, 1e-15);
}

TEST(InequalitySlacksTest, PositiveSupportZeroesNegativeParts) {
  const Distribution d({1.0, 2.0, 5.0}, {0.2, 0.5, 0.3});
  const auto s = inequality_slacks(d, kSq);
  EXPECT_EQ(s.split.N, (std::array<double, 3>{0.0, 0.0, 0.0}));
  EXPECT_EQ(s.split.terms[1], 0.0);
  EXPECT_EQ(s.split.terms[2], 0.0);
  EXPECT_EQ(s.split.terms[3], 0.0);
  EXPECT_GE(s.split.terms[0], 0.0);
  // The positive-part Schwarz term on its own.
  const double p1 = s.split.P[0], p2 = s.split.P[1], p3 = s.split.P[2];
  EXPECT_GE(p3 * p1 - p2 * p2, 0.0);
}

TEST(InequalitySlacksTest, SymmetricTwoPointHasZeroAbsSlack) {
  const auto s = inequality_slacks(Distribution({-1.0, 1.0}, {0.5, 0.5}), kSq);
  EXPECT_EQ(s.absolute.value(), 0.0);
}

TEST(InequalitySlacksTest, ThreePointHasPositiveAbsSlack) {
  const Distribution d({-1.0, 0.0, 1.0}, {0.2, 0.5, 0.3});
  const auto s = inequality_slacks(d, kSq);
  // For Y in {-1, 0, 1} with masses p, q, r the |Y| slack is 4 p q r.
  EXPECT_NEAR(s.absolute.value(), 4 * 0.2 * 0.5 * 0.3, 1e-15);
  EXPECT_GT(s.absolute.value(), 0.0);
}

TEST(InequalitySlacksTest, AbsSlackIsTwiceTheSplitTerms) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> xs(2 + i % 9), ps(xs.size());
    for (auto& x : xs) x = nd(rng);
    for (auto& p : ps) p = ud(rng) + 1e-3;
    const Distribution d(xs, ps);
    const auto s = split_terms(d);
    const double sum = s.terms[0] + s.terms[1] + s.terms[2] + s.terms[3];
    const double scale = s.scales[0] + s.scales[1] + s.scales[2] + s.scales[3];
    EXPECT_NEAR(abs_slack(d).value(), 2 * sum, 1e-12 * (scale + abs_slack(d).scale));
  }
}

TEST(HatTransformTest, Examples) {
  const Distribution d({-2.0, 0.0, 1.0, 3.0}, {0.1, 0.4, 0.3, 0.2});
  const auto h = hat_transform(d, kId);
  EXPECT_NEAR(h.coefficient, 1.0, 1e-15);
  EXPECT_NEAR(d.cov(h.fn, kId), 0.0, 1e-15);
  EXPECT_NEAR(d.variance() * 0 + (h.fn(3.0) - h.fn(-2.0)), 0.0, 1e-15);

  const Distribution sym({-1.0, 0.0, 1.0}, {0.25, 0.5, 0.25});
  const auto hs = hat_transform(sym, kSq);
  EXPECT_NEAR(hs.coefficient, 0.0, 1e-16);
  for (double x : {-1.0, 0.0, 1.0}) EXPECT_NEAR(hs.fn(x), x * x, 1e-16);

  const RealFn odd = [](double x) { return x * x * x * x; };  // uncorrelated with X under sym
  const auto ho = hat_transform(sym, odd);
  EXPECT_NEAR(ho.coefficient, 0.0, 1e-16);
}

TEST(DistributionTest, DegenerateRejected) {
  EXPECT_THROW(Distribution({2.0}, {1.0}), DegenerateDistributionError);
  EXPECT_THROW(Distribution({1.0, 2.0}, {1.0, 0.0}), DegenerateDistributionError);
}

TEST(ClassifyTest, TwoPointIsLinear) {
  const auto r = classify(RateFunction::uniform_weights(0, 1), kSquare);
  EXPECT_EQ(r.classification, Shape::linear);
  EXPECT_LE(r.max_abs_second_difference, 1e-9 * r.scale);
}

TEST(ClassifyTest, LinearRateFlux) {
  const auto f = RateFunction::zrp_linear();
  ClassifyOptions opt;
  opt.rho_grid = middle_grid(0.0, 5.0, 0.8, 11);
  const auto r = classify(f, [&](std::int64_t x) { return f.rate(x); }, opt);
  EXPECT_EQ(r.classification, Shape::linear);
  for (std::size_t i = 0; i < r.rho_grid.size(); ++i) EXPECT_NEAR(r.G_values[i], r.rho_grid[i], 1e-12);
}

TEST(ClassifyTest, ThreePointSquare) {
  const auto r = classify(RateFunction::uniform_weights(-1, 1), kSquare);
  EXPECT_EQ(r.classification, Shape::strictly_convex);
  EXPECT_EQ(r.strict_points, (std::vector<double>{0.0}));
  ASSERT_EQ(r.rho_grid.size(), 21u);
  EXPECT_NEAR(r.rho_grid[10], 0.0, 1e-15);
  EXPECT_NEAR(r.G_second_fd[10], 0.5, 2e-3);
  EXPECT_NEAR(r.G_second_analytic[10], 0.5, 1e-12);
  EXPECT_GT(r.min_second_difference, 0.0);
  for (std::size_t i = 0; i < r.rho_grid.size(); ++i) {
    EXPECT_NEAR(r.G_values[i], three_point_square(r.rho_grid[i]), 1e-12);
  }
}

TEST(ClassifyTest, ConcaveRateIsStrictlyConcave) {
  const auto f = RateFunction::zrp_constant();
  ClassifyOptions opt;
  opt.rho_grid = middle_grid(0.0, 4.0, 0.8, 9);
  const auto r = classify(f, [&](std::int64_t x) { return f.rate(x); }, opt);
  EXPECT_EQ(r.classification, Shape::strictly_concave);
  EXPECT_EQ(r.strict_points, (std::vector<double>{1.0}));
}

TEST(ReductionChain, LinearPhiIsTriviallyConsistent) {
  const Distribution d({-1.0, 0.0, 2.0, 3.0}, {0.3, 0.2, 0.4, 0.1});
  const auto rep = verify_reduction_chain(d, [](double x) { return 2.0 * x - 1.0; });
  for (const auto& s : rep.steps) {
    EXPECT_TRUE(s.passed) << s.name;
  }
  EXPECT_NEAR(curvature_slack(d, [](double x) { return 2.0 * x - 1.0; }).value(), 0.0, 1e-14);
}

TEST(ReductionChain, DerivativeIdentityConvergesQuadratically) {
  const Distribution d({-1.0, 0.0, 1.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  const auto rep = verify_reduction_chain(d, kSq);
  ASSERT_EQ(rep.fd_errors.size(), 2u);
  EXPECT_GT(rep.fd_errors[0] / rep.fd_errors[1], 50.0);
  EXPECT_LT(rep.fd_errors[0] / rep.fd_errors[1], 200.0);
  EXPECT_LT(rep.fd_errors[0], 1e-5);
}

TEST(ReductionChain, KinkMapsToAbsoluteValueSlack) {
  const Distribution d({-1.0, 0.0, 1.0}, {0.2, 0.45, 0.35});
  const RealFn kink = kink_function(0.0, 2.0, 1.0, 0.0);
  const auto rep = verify_reduction_chain(d, kink);
  bool saw_kink = false;
  for (const auto& s : rep.steps) {
    if (s.name.rfind("kink-to-absolute-value", 0) == 0) {
      saw_kink = true;
      EXPECT_LE(s.error, 1e-9);
      // A = 2 / (a - b) = 2
      EXPECT_NEAR(s.lhs, 2.0 * square_slack(d, kink).value(), 1e-15);
    }
  }
  EXPECT_TRUE(saw_kink);
}

TEST(ReductionChain, BrokenIdentityIsReported) {
  // A non-convex Phi is rejected before the chain runs.
  const Distribution d({-1.0, 0.0, 1.0}, {0.2, 0.45, 0.35});
  EXPECT_THROW(verify_reduction_chain(d, [](double x) { return -x * x; }), ConvexityViolationError);
  // A chain with an impossible finite-difference drop requirement fails at step one.
  ChainOptions strict;
  strict.min_fd_drop = 1e6;
  strict.fd_floor = 0.0;
  try {
    verify_reduction_chain(d, kSq, strict);
    FAIL();
  } catch (const ChainMismatchError& e) {
    EXPECT_NE(std::string(e.what()).find("derivative-identity"), std::string::npos);
  }
}

// Randomized properties over the instance generator.

TEST(ConvexityProperties, SecondDifferencesNonnegativeAndClassifierAgrees) {
  for (std::uint64_t i = 0; i < 150; ++i) {
    const auto inst = random_instance(instance_seed(101, i));
    const auto r = classify(inst.rate, inst.phi());
    const double scale = inst.phi_scale();
    EXPECT_GE(r.min_second_difference, -1e-9 * scale) << "seed " << inst.seed;
    if (r.classification == Shape::linear) {
      EXPECT_LE(r.max_abs_second_difference, 1e-9 * scale) << "seed " << inst.seed;
    } else {
      ASSERT_EQ(r.classification, Shape::strictly_convex) << "seed " << inst.seed;
      EXPECT_GT(r.min_second_difference, 0.0) << "seed " << inst.seed;
      EXPECT_GT(r.max_abs_second_difference, 1e-9 * scale) << "seed " << inst.seed;
    }
  }
}

TEST(ConvexityProperties, InequalitySuiteAndConditionalSigns) {
  std::mt19937_64 rng(17);
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto inst = random_instance(instance_seed(202, i));
    const auto j = attainable_interval(inst.rate);
    std::uniform_real_distribution<double> pick(j.lower + 0.1 * j.width(), j.upper - 0.1 * j.width());
    const auto m = theta_of_rho(inst.rate, pick(rng), 1e-12).measure;
    const auto s = inequality_slacks(m, inst.phi());
    EXPECT_GE(s.curvature.value(), -1e-10 * s.curvature.scale) << inst.seed;
    EXPECT_GE(s.square.value(), -1e-10 * s.square.scale) << inst.seed;
    EXPECT_GE(s.absolute.value(), -1e-10 * s.absolute.scale) << inst.seed;
    for (int k = 0; k < 4; ++k) EXPECT_GE(s.split.terms[k], -1e-12 * s.split.scales[k]) << inst.seed;

    const Distribution d = m.to_distribution();
    EXPECT_LE(conditional_cov(d, [](double x) { return x > 0; }, kId, [](double x) { return 1.0 / x; }), 1e-15);
    EXPECT_GE(conditional_cov(d, [](double x) { return x <= 0; }, kSq, [](double x) { return std::abs(x); }), -1e-12);
  }
}

TEST(ConvexityProperties, SquareSlackTransformInvariance) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), amp(0.1, 4.0);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto inst = random_instance(instance_seed(303, i));
    const Distribution d = tilted_measure(inst.rate, 0.0).to_distribution();
    const auto phi = inst.phi();
    const RealFn base = [&](double x) { return phi(static_cast<std::int64_t>(std::llround(x))); };
    const double A = amp(rng), B = coef(rng), C = coef(rng);
    const RealFn moved = [&](double x) { return A * base(x) + B * x + C; };
    const Slack s0 = square_slack(d, base);
    const Slack s1 = square_slack(d, moved);
    EXPECT_NEAR(s1.value(), A * s0.value(), 1e-10 * std::max(s1.scale, A * s0.scale)) << inst.seed;
  }
}

TEST(ConvexityProperties, StrictnessTrigger) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto k = random_kink_instance(instance_seed(404, i));
    const Slack s = abs_slack(k.distribution.shifted(-k.x0));
    EXPECT_GT(s.value(), 1e-12 * s.scale) << i;
  }
}

TEST(ConvexityProperties, ReductionChainHoldsOnRandomInstances) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto inst = random_instance(instance_seed(505, i));
    const Distribution d = tilted_measure(inst.rate, 0.0).to_distribution();
    const auto phi = inst.phi();
    EXPECT_NO_THROW(verify_reduction_chain(d, [&](double x) { return phi(static_cast<std::int64_t>(std::llround(x))); }))
        << inst.seed;
  }
}
