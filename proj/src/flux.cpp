#include "tiltflux/flux.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tiltflux/errors.hpp"

namespace tiltflux {

namespace {

const IntFn kIntId = [](std::int64_t x) { return static_cast<double>(x); };

void require_kind(const RateFunction& f, RateKind kind, const char* op) {
  if (f.kind() != kind) {
    throw ValidationError(std::string(op) + ": rate " + f.name() + " has the wrong kind");
  }
}

// Largest probe half-width (up to the default) on which the integrand stays finite.
std::int64_t finite_probe_width(const IntFn& phi, const SupportInterval& s) {
  std::int64_t w = RateFunction::kProbeRange;
  auto ok = [&](std::int64_t x) {
    if (!s.contains(x)) return true;
    const double v = phi(x);
    return std::isfinite(v) && std::abs(v) < 1e300;
  };
  while (w > 4 && !(ok(w) && ok(-w))) w /= 2;
  return w;
}

}  // namespace

bool is_unit_blp(const RateFunction& f) {
  return f.kind() == RateKind::blp && f.constant_one_on(-RateFunction::kProbeRange, RateFunction::kProbeRange);
}

IntFn flux_integrand(const RateFunction& f) {
  switch (f.kind()) {
    case RateKind::zrp:
      return [f](std::int64_t x) { return f.rate(x); };
    case RateKind::blp:
      return [f](std::int64_t x) { return f.rate(x) + f.rate(-x); };
    case RateKind::generic:
      break;
  }
  throw ValidationError("flux: rate " + f.name() + " is neither zrp nor blp");
}

double zrp_flux(const RateFunction& f, double rho, const TiltOptions& options) {
  require_kind(f, RateKind::zrp, "zrp_flux");
  return expect(theta_of_rho(f, rho, default_rho_tol(rho), options).measure, flux_integrand(f));
}

double blp_flux(const RateFunction& f, double rho, const TiltOptions& options) {
  require_kind(f, RateKind::blp, "blp_flux");
  if (!std::isfinite(rho)) throw RangeError("blp_flux: rho must be finite");
  if (is_unit_blp(f)) return 2.0;
  return expect(theta_of_rho(f, rho, default_rho_tol(rho), options).measure, flux_integrand(f));
}

double flux(const RateFunction& f, double rho, const TiltOptions& options) {
  return f.kind() == RateKind::blp ? blp_flux(f, rho, options) : zrp_flux(f, rho, options);
}

double characteristic_speed(const RateFunction& f, double rho, double c, const TiltOptions& options) {
  const IntFn h = flux_integrand(f);
  if (is_unit_blp(f)) return 0.0;
  return c * d_drho_expectation(f, rho, h, options);
}

FluxProfile flux_profile(const RateFunction& f, std::vector<double> rho_grid, const TiltOptions& options) {
  const IntFn h = flux_integrand(f);
  FluxProfile p;
  if (is_unit_blp(f)) {
    if (rho_grid.empty()) throw DomainError("flux_profile: the unit blp rate has no density interval; pass a grid");
    p.rho_grid = std::move(rho_grid);
    p.H.assign(p.rho_grid.size(), 2.0);
    p.H_prime.assign(p.rho_grid.size(), 0.0);
    p.classification = Shape::linear;
    if (p.rho_grid.size() >= 3) p.second_differences.assign(p.rho_grid.size() - 2, 0.0);
    p.scale = 2.0;
    return p;
  }
  ClassifyOptions co;
  co.tilt = options;
  co.rho_grid = std::move(rho_grid);
  co.probe_half_width = finite_probe_width(h, f.support());
  const ConvexityReport r = classify(f, h, co);
  p.rho_grid = r.rho_grid;
  p.H = r.G_values;
  p.H_prime = r.G_prime;
  p.classification = r.classification;
  p.strict_points = r.strict_points;
  p.second_differences = r.second_differences;
  p.min_second_difference = r.min_second_difference;
  p.max_abs_second_difference = r.max_abs_second_difference;
  p.scale = r.scale;
  return p;
}

double NuMeasure::prob(std::int64_t y) const noexcept {
  if (y < y_lo || y > y_hi()) return 0.0;
  return probs[static_cast<std::size_t>(y - y_lo)];
}

double NuMeasure::tail(std::int64_t y) const noexcept {
  if (y < y_lo) return 1.0;
  long double s = 0.0L;
  for (std::int64_t z = std::max(y + 1, y_lo); z <= y_hi(); ++z) s += probs[static_cast<std::size_t>(z - y_lo)];
  return static_cast<double>(s);
}

NuMeasure nu_measure(const RateFunction& f, double rho, double tail_tol, const TiltOptions& options) {
  if (!(tail_tol > 0.0)) throw ValidationError("nu_measure: tail_tol must be positive");
  TiltOptions opts = options;
  opts.measure.tail_tol = tail_tol;
  NuMeasure nu;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const TiltSolution sol = theta_of_rho(f, rho, default_rho_tol(rho), opts);
    const TiltedMeasure& m = sol.measure;
    const auto ps = m.probs();
    const std::size_t n = ps.size();
    if (n < 2 || !(m.variance() > 0.0)) throw DegenerateDistributionError("nu_measure: tilted measure is degenerate");
    const long double mean = m.mean();
    // Suffix sums above the mean and negated prefix sums below it; every
    // accumulated term then has the same sign.
    std::vector<long double> s(n - 1, 0.0L);
    long double acc = 0.0L;
    for (std::size_t i = n - 1; i >= 1; --i) {
      const long double x = static_cast<long double>(m.lo() + static_cast<std::int64_t>(i));
      if (x - 1 < mean) break;
      acc += (x - mean) * ps[i];
      s[i - 1] = acc;
    }
    acc = 0.0L;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const long double x = static_cast<long double>(m.lo() + static_cast<std::int64_t>(i));
      if (x >= mean) break;
      acc -= (x - mean) * ps[i];
      s[i] = acc;
    }
    nu.rho = rho;
    nu.rho_realized = m.mean();
    nu.theta = m.theta();
    nu.y_lo = m.lo();
    nu.variance_used = m.variance();
    nu.probs.assign(n - 1, 0.0);
    long double total = 0.0L;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      nu.probs[i] = static_cast<double>(s[i] / static_cast<long double>(m.variance()));
      total += nu.probs[i];
    }
    nu.normalization_error = static_cast<double>(std::abs(total - 1.0L));
    const double span = static_cast<double>(m.hi() - m.lo());
    nu.tail_bound = m.truncation_error_bound() * span / m.variance();
    if (nu.normalization_error <= kNuNormalizationTol) return nu;
    opts.measure.tail_tol *= 1e-3;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "nu_measure: normalization error " << nu.normalization_error << " at rho=" << rho;
  throw TruncationTooCoarseError(msg.str());
}

double nu_expect(const NuMeasure& nu, const IntFn& phi) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < nu.probs.size(); ++i) {
    s += static_cast<long double>(nu.probs[i]) * phi(nu.y_lo + static_cast<std::int64_t>(i));
  }
  return static_cast<double>(s);
}

NuDerivativeCheck nu_derivative_identity_check(const RateFunction& f, double rho, std::int64_t y, double h,
                                               const TiltOptions& options) {
  if (!(h > 0.0)) throw ValidationError("nu_derivative_identity_check: h must be positive");
  NuDerivativeCheck c;
  const NuMeasure nu = nu_measure(f, rho, options.measure.tail_tol, options);
  c.nu = nu.prob(y);

  const IntFn above = [y](std::int64_t x) { return x > y ? 1.0 : 0.0; };
  auto fd_at = [&](double step) {
    const auto up = theta_of_rho(f, rho + step, default_rho_tol(rho + step), options).measure;
    const auto dn = theta_of_rho(f, rho - step, default_rho_tol(rho - step), options).measure;
    return (expect(up, above) - expect(dn, above)) / (up.mean() - dn.mean());
  };
  c.fd = fd_at(h);
  c.fd_half = fd_at(0.5 * h);
  c.slack = std::abs(c.nu - c.fd);
  c.slack_half = std::abs(c.nu - c.fd_half);
  c.richardson_ratio = c.slack_half > 0.0 ? c.slack / c.slack_half : std::numeric_limits<double>::infinity();

  const auto m = theta_of_rho(f, rho, default_rho_tol(rho), options).measure;
  c.covariance_form = cov(m, kIntId, above) / m.variance();
  c.covariance_slack = std::abs(c.nu - c.covariance_form);
  return c;
}

MonotonicityReport stochastic_monotonicity_check(const RateFunction& f, const std::vector<double>& rho_grid,
                                                 const TiltOptions& options) {
  if (rho_grid.size() < 2) throw ValidationError("stochastic_monotonicity_check: need at least two densities");
  for (std::size_t i = 1; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > rho_grid[i - 1])) {
      throw ValidationError("stochastic_monotonicity_check: grid must be increasing");
    }
  }
  MonotonicityReport r;
  r.rho_grid = rho_grid;
  for (double rho : rho_grid) r.measures.push_back(nu_measure(f, rho, options.measure.tail_tol, options));
  r.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < r.measures.size(); ++k) {
    const NuMeasure& a = r.measures[k];
    const NuMeasure& b = r.measures[k + 1];
    const std::int64_t lo = std::min(a.y_lo, b.y_lo) - 1;
    const std::int64_t hi = std::max(a.y_hi(), b.y_hi());
    // Tails by a single backward sweep.
    std::vector<double> ta, tb;
    long double sa = 0.0L, sb = 0.0L;
    for (std::int64_t y = hi; y >= lo; --y) {
      ta.push_back(static_cast<double>(sa));
      tb.push_back(static_cast<double>(sb));
      sa += a.prob(y);
      sb += b.prob(y);
    }
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    std::int64_t arg = lo;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      const double d = tb[i] - ta[i];
      if (d < mn) {
        mn = d;
        arg = hi - static_cast<std::int64_t>(i);
      }
      mx = std::max(mx, d);
    }
    r.pair_min_margin.push_back(mn);
    r.pair_max_margin.push_back(mx);
    if (mn < r.min_margin) {
      r.min_margin = mn;
      r.min_margin_rho = rho_grid[k];
      r.min_margin_y = arg;
    }
  }
  if (r.min_margin < -kMonotonicityTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "nu tail decreases by " << -r.min_margin << " at y=" << r.min_margin_y << " between rho="
        << r.min_margin_rho << " and the next grid density";
    throw MonotonicityViolationError(msg.str());
  }
  return r;
}

IntFn potential_from_increments(const IntFn& phi) {
  return [phi](std::int64_t x) {
    long double s = 0.0L;
    if (x >= 1) {
      for (std::int64_t y = 1; y <= x - 1; ++y) s += phi(y);
    } else {
      for (std::int64_t y = x; y <= 0; ++y) s -= phi(y);
    }
    return static_cast<double>(s);
  };
}

}  // namespace tiltflux
