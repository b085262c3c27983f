#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tiltflux/distribution.hpp"
#include "tiltflux/tilt_map.hpp"

namespace tiltflux {

/// A function given on an increasing list of support points, extended
/// between them by line segments. Construction through `extend_piecewise`
/// guarantees the extension is convex.
struct PiecewiseConvexFn {
  std::vector<double> xs;
  std::vector<double> values;
  std::vector<double> slopes;         // slopes[i] between xs[i] and xs[i+1]
  std::vector<double> strict_points;  // interior xs where the slope jumps up

  bool linear() const noexcept { return strict_points.empty(); }
  /// Value of the extension at x; throws DomainError outside [xs.front(), xs.back()].
  double operator()(double x) const;
  /// Left and right slopes at an interior support point.
  std::pair<double, double> slopes_at(double x) const;
};

/// Slope jumps below rel_eps times the local slope scale are treated as zero.
inline constexpr double kSlopeJumpRelEps = 1e-9;

PiecewiseConvexFn extend_piecewise(std::span<const double> xs, std::span<const double> values,
                                   double rel_eps = kSlopeJumpRelEps);
PiecewiseConvexFn extend_piecewise(std::int64_t lo, std::int64_t hi, const IntFn& phi,
                                   double rel_eps = kSlopeJumpRelEps);

/// Kink function c + a (x - x0)^+ - b (x - x0)^-, convex when a > b.
RealFn kink_function(double c, double a, double b, double x0);

/// G(rho) = E^{theta(rho)} Phi(X).
double G(const RateFunction& f, const IntFn& phi, double rho, const TiltOptions& options = {});

/// Cov(Phi~ X, X) Var X - Cov(Phi, X) Cov(X~ X, X) at theta(rho), with ~
/// denoting centering. Equals Var^3 times d^2 G / d rho^2.
double G_second_slack(const RateFunction& f, const IntFn& phi, double rho, const TiltOptions& options = {});

/// d^2 G / d rho^2 from the covariance form.
double G_second_analytic(const RateFunction& f, const IntFn& phi, double rho, const TiltOptions& options = {});

/// Slack of a product-of-covariances inequality lhs >= rhs, together with the
/// magnitude it should be judged against: the same products built from
/// absolute centered moments E|u~||v~|.
struct Slack {
  double lhs = 0.0;
  double rhs = 0.0;
  double scale = 0.0;
  double value() const noexcept { return lhs - rhs; }
};

/// Cov(Phi~ X, X) Cov(X, X) >= Cov(Phi, X) Cov(X~ X, X).
Slack curvature_slack(const Distribution& d, const RealFn& phi);
/// Cov(Phi, X^2) Cov(X, X) >= Cov(Phi, X) Cov(X^2, X).
Slack square_slack(const Distribution& d, const RealFn& phi);
/// Cov(|X|, X^2) Cov(X, X) >= Cov(|X|, X) Cov(X^2, X).
Slack abs_slack(const Distribution& d);

/// Positive/negative part moments P_i = E (X^+)^i, N_i = E (X^-)^i, i = 1..3,
/// and the four nonnegative terms whose sum is half the |X| slack.
struct SplitTerms {
  std::array<double, 3> P{};
  std::array<double, 3> N{};
  /// N1 (P3 P1 - P2^2), P1 (N3 N1 - N2^2), P2 N3 - P1^2 N3 - P2 N2 N1,
  /// P3 N2 - P3 N1^2 - P2 P1 N2.
  std::array<double, 4> terms{};
  /// Sum of absolute monomials of each term.
  std::array<double, 4> scales{};
};

SplitTerms split_terms(const Distribution& d);

struct InequalitySlacks {
  Slack curvature;  // centered form, for Phi
  Slack square;     // for Phi
  Slack absolute;   // for |X|
  SplitTerms split;
};

InequalitySlacks inequality_slacks(const Distribution& d, const RealFn& phi);
InequalitySlacks inequality_slacks(const TiltedMeasure& m, const IntFn& phi);

/// Phi^ = Phi - C X with C = Cov(Phi, X) / Var X, uncorrelated with X.
struct HatTransform {
  double coefficient = 0.0;
  RealFn fn;
};

HatTransform hat_transform(const Distribution& d, const RealFn& phi);

enum class Shape { linear, strictly_convex, strictly_concave, indeterminate };

const char* to_string(Shape shape) noexcept;

/// Grid of `count` points spanning the middle `fraction` of an interval.
std::vector<double> middle_grid(double lower, double upper, double fraction, int count);

struct ClassifyOptions {
  TiltOptions tilt;
  /// Densities to profile; empty means 21 points over the middle 80% of J.
  std::vector<double> rho_grid;
  double rel_eps = kSlopeJumpRelEps;
  /// Half-width of the window probed for slope jumps on an unbounded support.
  std::int64_t probe_half_width = RateFunction::kProbeRange;
};

struct ConvexityReport {
  Shape classification = Shape::indeterminate;
  std::int64_t support_points = 0;  // -1 for an infinite support
  std::vector<double> strict_points;
  std::vector<double> rho_grid;          // requested densities
  std::vector<double> rho_realized;      // E^theta X at the solved theta
  std::vector<double> G_values;
  std::vector<double> G_prime;           // Cov(Phi, X) / Var X
  std::vector<double> G_second_fd;       // second divided differences (NaN at the ends)
  std::vector<double> G_second_analytic;
  std::vector<double> curvature_slack;
  /// Second differences rescaled to the nominal grid step.
  std::vector<double> second_differences;
  double min_second_difference = 0.0;
  double max_abs_second_difference = 0.0;
  /// max |Phi| over the materialized windows.
  double scale = 0.0;
};

/// Classifies rho -> E^{theta(rho)} Phi(X) from the slope structure of Phi on
/// the support and fills a numeric profile over the density grid.
ConvexityReport classify(const RateFunction& f, const IntFn& phi, const ClassifyOptions& options = {});

struct ChainStep {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ChainReport {
  std::vector<ChainStep> steps;
  /// Finite-difference errors of the derivative identity at each step size.
  std::vector<double> fd_steps;
  std::vector<double> fd_errors;
};

struct ChainOptions {
  std::vector<double> fd_steps{1e-3, 1e-4};
  /// Relative tolerance for the exact algebraic steps.
  double rel_tol = 1e-9;
  /// Required error reduction between consecutive finite-difference steps.
  double min_fd_drop = 50.0;
  /// Finite-difference errors below this (times the slack scale) count as converged.
  double fd_floor = 1e-10;
};

/// Checks the reduction chain on one instance: the covariance slack is the
/// theta-derivative identity (by finite differences), it is unchanged by the
/// hat transform, it equals Var Cov(Phi^, X^2) and the square-form slack,
/// and for each slope jump of Phi the kink's square-form slack maps onto the
/// |Y| slack of Y = X - x0. Throws ChainMismatchError naming the failing step.
ChainReport verify_reduction_chain(const Distribution& d, const RealFn& phi, const ChainOptions& options = {});

}  // namespace tiltflux
