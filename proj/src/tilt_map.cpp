#include "tiltflux/tilt_map.hpp"

#include <sstream>

#include "tiltflux/errors.hpp"

namespace tiltflux {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBracketSteps = 64;

struct Probe {
  double theta;
  TiltedMeasure m;
  double residual;
};

}  // namespace

double rho_of_theta(const RateFunction& f, double theta, const TiltOptions& options) {
  return tilted_measure(f, theta, options.measure).mean();
}

AttainableInterval attainable_interval(const RateFunction& f, const TiltOptions& options) {
  const ThetaDomain dom = resolve_theta_domain(f);
  const SupportInterval& s = f.support();
  AttainableInterval j;
  if (std::isfinite(dom.theta_lower)) {
    j.lower = rho_of_theta(f, dom.theta_lower + options.domain_margin, options);
  } else {
    j.lower = s.lower_infinite() ? -kInf : static_cast<double>(s.x_min);
  }
  if (std::isfinite(dom.theta_upper)) {
    j.upper = rho_of_theta(f, dom.theta_upper - options.domain_margin, options);
  } else {
    j.upper = s.upper_infinite() ? kInf : static_cast<double>(s.x_max);
  }
  return j;
}

TiltSolution theta_of_rho(const RateFunction& f, double rho, double tol, const TiltOptions& options) {
  if (!std::isfinite(rho)) throw RangeError("theta_of_rho: rho must be finite");
  if (!(tol > 0.0)) throw ValidationError("theta_of_rho: tol must be positive");
  const AttainableInterval j = attainable_interval(f, options);
  if (!j.contains(rho)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "rho=" << rho << " outside attainable interval (" << j.lower << ", " << j.upper << ") of " << f.name();
    throw RangeError(msg.str());
  }
  const ThetaDomain dom = resolve_theta_domain(f);
  const double t_min = dom.theta_lower + options.domain_margin;
  const double t_max = dom.theta_upper - options.domain_margin;

  auto probe = [&](double theta) {
    TiltedMeasure m = tilted_measure(f, theta, options.measure);
    const double r = m.mean() - rho;
    return Probe{theta, std::move(m), r};
  };

  double start = 0.0;
  if (!(start > t_min && start < t_max)) {
    start = std::isfinite(t_max) ? t_max - 1.0 : t_min + 1.0;
    if (std::isfinite(t_min) && std::isfinite(t_max)) start = 0.5 * (t_min + t_max);
  }
  Probe cur = probe(start);
  if (cur.residual == 0.0) {
    return TiltSolution{rho, cur.theta, cur.m.variance(), 0, 0.0, std::move(cur.m)};
  }

  // Grow a bracket [a, b] with residual(a) < 0 < residual(b).
  double a = start, b = start;
  const bool go_up = cur.residual < 0.0;
  double step = 1.0;
  for (int k = 0;; ++k) {
    if (k >= kMaxBracketSteps) throw DomainExhaustedError("theta_of_rho: bracket not found for " + f.name());
    const double edge = go_up ? t_max : t_min;
    double next = go_up ? a + step : b - step;
    bool at_edge = false;
    if (std::isfinite(edge) && (go_up ? next >= edge : next <= edge)) {
      // Halve the remaining gap to a finite domain end, stopping at the margin.
      const double from = go_up ? a : b;
      next = 0.5 * (from + edge);
      if (std::abs(edge - from) <= options.domain_margin) {
        next = edge;
        at_edge = true;
      }
    }
    Probe p = probe(next);
    if (go_up) {
      if (p.residual >= 0.0) {
        b = next;
        cur = std::move(p);
        break;
      }
      a = next;
    } else {
      if (p.residual <= 0.0) {
        a = next;
        cur = std::move(p);
        break;
      }
      b = next;
    }
    if (at_edge) throw DomainExhaustedError("theta_of_rho: domain edge reached before bracketing rho");
    step *= 2.0;
  }

  // Safeguarded Newton inside [a, b].
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (std::abs(cur.residual) <= tol) break;
    if (cur.residual < 0.0) a = cur.theta;
    else b = cur.theta;
    const double var = cur.m.variance();
    double next = cur.theta - cur.residual / var;
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (next == cur.theta || b - a <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(next))) {
      break;
    }
    cur = probe(next);
  }
  if (!(std::abs(cur.residual) <= tol)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "theta_of_rho: residual " << cur.residual << " above tol " << tol << " at rho=" << rho;
    throw NonConvergenceError(msg.str());
  }
  // One polishing step when it helps; keeps the inverse at rounding level.
  if (cur.residual != 0.0) {
    const double next = cur.theta - cur.residual / cur.m.variance();
    if (next > t_min && next < t_max && std::isfinite(next)) {
      Probe p = probe(next);
      if (std::abs(p.residual) < std::abs(cur.residual)) cur = std::move(p);
    }
  }
  const double var = cur.m.variance();
  return TiltSolution{rho, cur.theta, var, it, cur.residual, std::move(cur.m)};
}

double d_drho_expectation(const RateFunction& f, double rho, const IntFn& phi, const TiltOptions& options) {
  const TiltSolution s = theta_of_rho(f, rho, default_rho_tol(rho), options);
  const IntFn id = [](std::int64_t x) { return static_cast<double>(x); };
  return cov(s.measure, phi, id) / s.variance;
}

}  // namespace tiltflux
