#include "tiltflux/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tiltflux/errors.hpp"

namespace tiltflux {

namespace {

const RealFn kId = [](double x) { return x; };
const RealFn kSq = [](double x) { return x * x; };
const RealFn kAbs = [](double x) { return std::abs(x); };

// Covariance and absolute centered cross moment of two functions under d.
struct CovPair {
  double cov;
  double abs;
};

CovPair cov_pair(const Distribution& d, const RealFn& u, const RealFn& v) {
  const auto& xs = d.values();
  const auto& ps = d.probs();
  std::vector<long double> a(xs.size()), b(xs.size());
  long double ea = 0.0L, eb = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    a[i] = u(xs[i]);
    b[i] = v(xs[i]);
    ea += ps[i] * a[i];
    eb += ps[i] * b[i];
  }
  long double c = 0.0L, s = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const long double prod = (a[i] - ea) * (b[i] - eb);
    c += ps[i] * prod;
    s += ps[i] * std::abs(prod);
  }
  const CovPair out{static_cast<double>(c), static_cast<double>(s)};
  if (!std::isfinite(out.cov) || !std::isfinite(out.abs)) {
    throw MomentFailureError("covariance is not finite; moments of the distribution do not exist numerically");
  }
  return out;
}

Slack product_slack(const CovPair& a, const CovPair& b, const CovPair& c, const CovPair& d) {
  return Slack{a.cov * b.cov, c.cov * d.cov, a.abs * b.abs + c.abs * d.abs};
}

RealFn on_lattice(const IntFn& phi) {
  return [phi](double x) { return phi(static_cast<std::int64_t>(std::llround(x))); };
}

const IntFn kIntId = [](std::int64_t x) { return static_cast<double>(x); };

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double PiecewiseConvexFn::operator()(double x) const {
  if (x < xs.front() || x > xs.back()) {
    throw DomainError("piecewise function evaluated outside [" + num(xs.front()) + ", " + num(xs.back()) + "]");
  }
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const auto i = static_cast<std::size_t>(it - xs.begin());
  if (xs[i] == x) return values[i];
  return values[i - 1] + slopes[i - 1] * (x - xs[i - 1]);
}

std::pair<double, double> PiecewiseConvexFn::slopes_at(double x) const {
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.end() || *it != x || it == xs.begin() || it + 1 == xs.end()) {
    throw DomainError("slopes_at: " + num(x) + " is not an interior support point");
  }
  const auto i = static_cast<std::size_t>(it - xs.begin());
  return {slopes[i - 1], slopes[i]};
}

PiecewiseConvexFn extend_piecewise(std::span<const double> xs, std::span<const double> values, double rel_eps) {
  if (xs.size() != values.size()) throw ValidationError("extend_piecewise: size mismatch");
  if (xs.size() < 2) throw ValidationError("extend_piecewise: need at least two support points");
  PiecewiseConvexFn out;
  out.xs.assign(xs.begin(), xs.end());
  out.values.assign(values.begin(), values.end());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(values[i])) throw ValidationError("extend_piecewise: non-finite input");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw ValidationError("extend_piecewise: support points must increase");
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    out.slopes.push_back((values[i + 1] - values[i]) / (xs[i + 1] - xs[i]));
  }
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    const double jump = out.slopes[i] - out.slopes[i - 1];
    const double dx = std::min(xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
    const double scale = std::max({std::abs(out.slopes[i - 1]), std::abs(out.slopes[i]),
                                   std::abs(values[i - 1]) / dx, std::abs(values[i]) / dx,
                                   std::abs(values[i + 1]) / dx});
    if (jump < -rel_eps * scale) {
      throw ConvexityViolationError("slope decreases by " + num(-jump) + " at x=" + num(xs[i]));
    }
    if (jump > rel_eps * scale) out.strict_points.push_back(xs[i]);
  }
  return out;
}

PiecewiseConvexFn extend_piecewise(std::int64_t lo, std::int64_t hi, const IntFn& phi, double rel_eps) {
  if (hi <= lo) throw ValidationError("extend_piecewise: need at least two support points");
  std::vector<double> xs, vs;
  xs.reserve(static_cast<std::size_t>(hi - lo + 1));
  vs.reserve(xs.capacity());
  for (std::int64_t x = lo; x <= hi; ++x) {
    xs.push_back(static_cast<double>(x));
    vs.push_back(phi(x));
  }
  return extend_piecewise(xs, vs, rel_eps);
}

RealFn kink_function(double c, double a, double b, double x0) {
  return [=](double x) {
    const double y = x - x0;
    return c + a * std::max(y, 0.0) - b * std::max(-y, 0.0);
  };
}

double G(const RateFunction& f, const IntFn& phi, double rho, const TiltOptions& options) {
  return expect(theta_of_rho(f, rho, default_rho_tol(rho), options).measure, phi);
}

double G_second_slack(const RateFunction& f, const IntFn& phi, double rho, const TiltOptions& options) {
  const auto s = theta_of_rho(f, rho, default_rho_tol(rho), options);
  return curvature_slack(s.measure.to_distribution(), on_lattice(phi)).value();
}

double G_second_analytic(const RateFunction& f, const IntFn& phi, double rho, const TiltOptions& options) {
  const auto s = theta_of_rho(f, rho, default_rho_tol(rho), options);
  const double slack = curvature_slack(s.measure.to_distribution(), on_lattice(phi)).value();
  return slack / (s.variance * s.variance * s.variance);
}

Slack curvature_slack(const Distribution& d, const RealFn& phi) {
  const double ephi = d.expect(phi);
  const double ex = d.mean();
  const RealFn phi_tilde_x = [&](double x) { return (phi(x) - ephi) * x; };
  const RealFn x_tilde_x = [&](double x) { return (x - ex) * x; };
  return product_slack(cov_pair(d, phi_tilde_x, kId), cov_pair(d, kId, kId), cov_pair(d, phi, kId),
                       cov_pair(d, x_tilde_x, kId));
}

Slack square_slack(const Distribution& d, const RealFn& phi) {
  return product_slack(cov_pair(d, phi, kSq), cov_pair(d, kId, kId), cov_pair(d, phi, kId), cov_pair(d, kSq, kId));
}

Slack abs_slack(const Distribution& d) {
  return product_slack(cov_pair(d, kAbs, kSq), cov_pair(d, kId, kId), cov_pair(d, kAbs, kId), cov_pair(d, kSq, kId));
}

SplitTerms split_terms(const Distribution& d) {
  SplitTerms s;
  long double P[4] = {}, N[4] = {};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const long double x = d.values()[i];
    const long double p = d.probs()[i];
    const long double pos = x > 0 ? x : 0.0L;
    const long double neg = x < 0 ? -x : 0.0L;
    for (int k = 1; k <= 3; ++k) {
      P[k] += p * std::pow(pos, k);
      N[k] += p * std::pow(neg, k);
    }
  }
  for (int k = 0; k < 3; ++k) {
    s.P[k] = static_cast<double>(P[k + 1]);
    s.N[k] = static_cast<double>(N[k + 1]);
  }
  const long double p1 = P[1], p2 = P[2], p3 = P[3], n1 = N[1], n2 = N[2], n3 = N[3];
  s.terms = {static_cast<double>(n1 * (p3 * p1 - p2 * p2)), static_cast<double>(p1 * (n3 * n1 - n2 * n2)),
             static_cast<double>(p2 * n3 - p1 * p1 * n3 - p2 * n2 * n1),
             static_cast<double>(p3 * n2 - p3 * n1 * n1 - p2 * p1 * n2)};
  s.scales = {static_cast<double>(n1 * (p3 * p1 + p2 * p2)), static_cast<double>(p1 * (n3 * n1 + n2 * n2)),
              static_cast<double>(p2 * n3 + p1 * p1 * n3 + p2 * n2 * n1),
              static_cast<double>(p3 * n2 + p3 * n1 * n1 + p2 * p1 * n2)};
  return s;
}

InequalitySlacks inequality_slacks(const Distribution& d, const RealFn& phi) {
  return InequalitySlacks{curvature_slack(d, phi), square_slack(d, phi), abs_slack(d), split_terms(d)};
}

InequalitySlacks inequality_slacks(const TiltedMeasure& m, const IntFn& phi) {
  return inequality_slacks(m.to_distribution(), on_lattice(phi));
}

HatTransform hat_transform(const Distribution& d, const RealFn& phi) {
  const double var = d.variance();
  if (!(var > 0.0)) throw DegenerateDistributionError("hat_transform: Var X = 0");
  const double c = d.cov(phi, kId) / var;
  return HatTransform{c, [phi, c](double x) { return phi(x) - c * x; }};
}

const char* to_string(Shape shape) noexcept {
  switch (shape) {
    case Shape::linear: return "linear";
    case Shape::strictly_convex: return "strictly_convex";
    case Shape::strictly_concave: return "strictly_concave";
    case Shape::indeterminate: return "indeterminate";
  }
  return "?";
}

std::vector<double> middle_grid(double lower, double upper, double fraction, int count) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower)) {
    throw ConfigError("middle_grid: interval must be finite and nonempty");
  }
  if (count < 1 || !(fraction > 0.0 && fraction < 1.0)) throw ConfigError("middle_grid: bad count or fraction");
  const double mid = 0.5 * (lower + upper);
  const double half = 0.5 * fraction * (upper - lower);
  std::vector<double> grid;
  if (count == 1) return {mid};
  for (int i = 0; i < count; ++i) grid.push_back(mid - half + 2 * half * i / (count - 1));
  return grid;
}

ConvexityReport classify(const RateFunction& f, const IntFn& phi, const ClassifyOptions& options) {
  ConvexityReport r;
  const SupportInterval& s = f.support();
  const std::int64_t lo = s.lower_infinite() ? -options.probe_half_width : s.x_min;
  const std::int64_t hi = s.upper_infinite() ? options.probe_half_width : s.x_max;
  r.support_points = s.finite() ? *s.size() : -1;

  try {
    const auto pw = extend_piecewise(lo, hi, phi, options.rel_eps);
    r.strict_points = pw.strict_points;
    r.classification = pw.linear() ? Shape::linear : Shape::strictly_convex;
  } catch (const ConvexityViolationError&) {
    try {
      const auto pw = extend_piecewise(lo, hi, [&](std::int64_t x) { return -phi(x); }, options.rel_eps);
      r.strict_points = pw.strict_points;
      r.classification = pw.linear() ? Shape::linear : Shape::strictly_concave;
    } catch (const ConvexityViolationError&) {
      r.classification = Shape::indeterminate;
    }
  }
  if (r.support_points >= 0 && r.support_points < 3) r.classification = Shape::linear;

  r.rho_grid = options.rho_grid;
  if (r.rho_grid.empty()) {
    const auto j = attainable_interval(f, options.tilt);
    r.rho_grid = middle_grid(j.lower, j.upper, 0.8, 21);
  }
  const std::size_t n = r.rho_grid.size();
  const RealFn phi_real = on_lattice(phi);
  for (double rho : r.rho_grid) {
    const auto sol = theta_of_rho(f, rho, default_rho_tol(rho), options.tilt);
    const auto& m = sol.measure;
    r.rho_realized.push_back(m.mean());
    r.G_values.push_back(expect(m, phi));
    r.G_prime.push_back(cov(m, phi, kIntId) / sol.variance);
    const double slack = curvature_slack(m.to_distribution(), phi_real).value();
    r.curvature_slack.push_back(slack);
    r.G_second_analytic.push_back(slack / (sol.variance * sol.variance * sol.variance));
    for (std::int64_t x = m.lo(); x <= m.hi(); ++x) r.scale = std::max(r.scale, std::abs(phi(x)));
  }
  r.scale = std::max(r.scale, std::numeric_limits<double>::min());

  r.G_second_fd.assign(n, std::numeric_limits<double>::quiet_NaN());
  r.min_second_difference = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    // Divided differences on the realized densities remove the inversion error.
    const auto& x = r.rho_realized;
    const auto& g = r.G_values;
    const double left = (g[i] - g[i - 1]) / (x[i] - x[i - 1]);
    const double right = (g[i + 1] - g[i]) / (x[i + 1] - x[i]);
    const double dd2 = 2.0 * (right - left) / (x[i + 1] - x[i - 1]);
    r.G_second_fd[i] = dd2;
    const double h = 0.5 * (r.rho_grid[i + 1] - r.rho_grid[i - 1]);
    const double second = dd2 * h * h;
    r.second_differences.push_back(second);
    r.min_second_difference = std::min(r.min_second_difference, second);
    r.max_abs_second_difference = std::max(r.max_abs_second_difference, std::abs(second));
  }
  if (r.second_differences.empty()) r.min_second_difference = 0.0;
  return r;
}

ChainReport verify_reduction_chain(const Distribution& d, const RealFn& phi, const ChainOptions& options) {
  ChainReport report;
  auto record = [&](ChainStep step) {
    step.passed = step.error <= step.tolerance;
    report.steps.push_back(step);
    if (!step.passed) {
      throw ChainMismatchError("reduction chain step '" + step.name + "' failed: lhs=" + num(step.lhs) +
                               " rhs=" + num(step.rhs) + " error=" + num(step.error) + " tol=" +
                               num(step.tolerance) + (step.detail.empty() ? "" : " (" + step.detail + ")"));
    }
  };

  const Slack base = curvature_slack(d, phi);
  const double var = d.variance();
  const double cov_phi_x = d.cov(phi, kId);

  // (i) slack = Var d/dtheta Cov(Phi, X) - Cov(Phi, X) d/dtheta Var, by central differences.
  {
    ChainStep step{"derivative-identity", base.value(), 0.0, 0.0, 0.0, false, ""};
    double prev = std::numeric_limits<double>::quiet_NaN();
    bool drop_ok = true;
    std::ostringstream detail;
    for (double h : options.fd_steps) {
      const Distribution up = d.tilted(h);
      const Distribution dn = d.tilted(-h);
      const double dcov = (up.cov(phi, kId) - dn.cov(phi, kId)) / (2 * h);
      const double dvar = (up.variance() - dn.variance()) / (2 * h);
      const double fd = var * dcov - cov_phi_x * dvar;
      const double err = std::abs(fd - base.value());
      report.fd_steps.push_back(h);
      report.fd_errors.push_back(err);
      detail << "h=" << h << " err=" << err << "; ";
      if (std::isfinite(prev) && prev > options.fd_floor * base.scale && err * options.min_fd_drop > prev) {
        drop_ok = false;
      }
      prev = err;
      step.rhs = fd;
    }
    step.detail = detail.str();
    step.error = drop_ok ? 0.0 : prev;
    step.tolerance = drop_ok ? 0.0 : options.fd_floor * base.scale;
    record(step);
  }

  // (ii) the slack is unchanged by Phi -> Phi^.
  const HatTransform hat = hat_transform(d, phi);
  const Slack hatted = curvature_slack(d, hat.fn);
  record(ChainStep{"hat-invariance", base.value(), hatted.value(), std::abs(base.value() - hatted.value()),
                   options.rel_tol * std::max(base.scale, hatted.scale), false, ""});

  // (iii) Phi^ is uncorrelated with X, and both slack forms reduce to Var Cov(Phi^, X^2).
  {
    const CovPair c = cov_pair(d, hat.fn, kId);
    // Judged against the correlation that was removed; Phi^ may be constant up to roundoff.
    const double removed = cov_pair(d, phi, kId).abs;
    record(ChainStep{"hat-uncorrelated", c.cov, 0.0, std::abs(c.cov), options.rel_tol * std::max(c.abs, removed),
                     false, ""});
    const CovPair c2 = cov_pair(d, hat.fn, kSq);
    const double reduced = var * c2.cov;
    const Slack sq_hat = square_slack(d, hat.fn);
    const Slack sq = square_slack(d, phi);
    const double tol = options.rel_tol * std::max({base.scale, sq.scale, sq_hat.scale});
    record(ChainStep{"hat-reduces-to-square-covariance", base.value(), reduced, std::abs(base.value() - reduced),
                     tol, false, ""});
    record(ChainStep{"square-form-for-hat", sq_hat.value(), reduced, std::abs(sq_hat.value() - reduced), tol, false,
                     ""});
    record(ChainStep{"square-form-equals-curvature", sq.value(), base.value(), std::abs(sq.value() - base.value()),
                     tol, false, ""});
  }

  // (iv) every slope jump of Phi: kink -> |X - x0| -> |Y| slack of Y = X - x0.
  std::vector<double> vals(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) vals[i] = phi(d.values()[i]);
  const PiecewiseConvexFn pw = extend_piecewise(d.values(), vals);
  for (double x0 : pw.strict_points) {
    const auto [b, a] = pw.slopes_at(x0);
    const RealFn kink = kink_function(phi(x0), a, b, x0);
    const double scale_factor = 2.0 / (a - b);  // |x - x0| = A kink + B x + C
    const Slack kink_sq = square_slack(d, kink);
    const Distribution y = d.shifted(-x0);
    const RealFn shifted_sq = [x0](double v) { return (v + x0) * (v + x0); };
    const CovPair abs_shifted_sq = cov_pair(y, kAbs, shifted_sq);
    const CovPair var_y = cov_pair(y, kId, kId);
    const CovPair abs_y = cov_pair(y, kAbs, kId);
    const CovPair shifted_sq_y = cov_pair(y, shifted_sq, kId);
    const double before_lhs = abs_shifted_sq.cov * var_y.cov;
    const double before_rhs = abs_y.cov * shifted_sq_y.cov;
    const double shift = 2 * x0 * abs_y.cov * var_y.cov;
    const Slack target = abs_slack(y);
    const double scale = std::max({scale_factor * kink_sq.scale, target.scale,
                                   abs_shifted_sq.abs * var_y.abs + abs_y.abs * shifted_sq_y.abs});
    record(ChainStep{"kink-to-absolute-value@" + num(x0), scale_factor * kink_sq.value(), before_lhs - before_rhs,
                     std::abs(scale_factor * kink_sq.value() - (before_lhs - before_rhs)), options.rel_tol * scale,
                     false, "A=" + num(scale_factor)});
    record(ChainStep{"shift-subtraction@" + num(x0), (before_lhs - shift) - (before_rhs - shift), target.value(),
                     std::abs((before_lhs - shift) - (before_rhs - shift) - target.value()), options.rel_tol * scale,
                     false, "2 x0 Cov(|Y|,Y) Var(Y)=" + num(shift)});
  }
  return report;
}

}  // namespace tiltflux
