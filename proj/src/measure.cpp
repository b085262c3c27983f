#include "tiltflux/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tiltflux/errors.hpp"

namespace tiltflux {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp(x) underflows to zero below this.
constexpr double kUnderflowLog = -745.0;

struct SideEstimate {
  double value;
  std::string note;
};

// Estimates lim of seq(x) as x -> infinity given seq at D/4, D/2 and D, where
// `sign` is +1 when the infimum side (upper theta) is wanted and -1 for the
// supremum side. Divergence is declared when the increments do not shrink.
SideEstimate extrapolate(double quarter, double half, double full, double sign, const char* label) {
  const double d1 = sign * (half - quarter);
  const double d2 = sign * (full - half);
  std::ostringstream note;
  note << label << ": increments over the last two octaves " << sign * d1 << ", " << sign * d2;
  if (d2 > 1e-9 * std::max(1.0, std::abs(full)) && d2 >= 0.75 * d1) {
    note << "; not stabilizing, taken as " << (sign > 0 ? "+inf" : "-inf");
    return {sign * kInf, note.str()};
  }
  // Richardson step for a c/x correction, clamped to the conservative side.
  const double richardson = 2.0 * full - half;
  const double value = sign > 0 ? std::min(full, richardson) : std::max(full, richardson);
  note << "; estimate " << value;
  return {value, note.str()};
}

}  // namespace

ThetaDomain theta_domain(const RateFunction& f, std::int64_t probe_depth) {
  if (probe_depth < 8) throw ValidationError("theta_domain: probe_depth must be at least 8");
  const SupportInterval& s = f.support();
  ThetaDomain dom;
  dom.theta_upper = kInf;
  dom.theta_lower = -kInf;

  if (s.upper_infinite()) {
    const auto lf = log_factorial_range(f, 0, probe_depth);
    auto a = [&](std::int64_t x) { return lf[static_cast<std::size_t>(x)] / static_cast<double>(x); };
    auto est = extrapolate(a(probe_depth / 4), a(probe_depth / 2), a(probe_depth), +1.0, "upper");
    dom.theta_upper = est.value;
    dom.upper_estimated = true;
    dom.diagnostics.push_back(std::move(est.note));
  } else {
    dom.diagnostics.emplace_back("upper: finite support, +inf");
  }

  if (s.lower_infinite()) {
    const auto lf = log_factorial_range(f, -probe_depth, 0);
    // lf[i] = log f(-probe_depth + i)!
    auto b = [&](std::int64_t x) {
      return -lf[static_cast<std::size_t>(probe_depth - x)] / static_cast<double>(x);
    };
    auto est = extrapolate(b(probe_depth / 4), b(probe_depth / 2), b(probe_depth), -1.0, "lower");
    dom.theta_lower = est.value;
    dom.lower_estimated = true;
    dom.diagnostics.push_back(std::move(est.note));
  } else {
    dom.diagnostics.emplace_back("lower: finite support, -inf");
  }

  if (!(dom.theta_lower < dom.theta_upper)) {
    std::ostringstream msg;
    msg << "tilt domain of " << f.name() << " is empty: (" << dom.theta_lower << ", " << dom.theta_upper << ")";
    throw InadmissibleDomainError(msg.str());
  }
  if (!dom.contains(0.0)) {
    dom.diagnostics.emplace_back("domain excludes theta = 0; only tilted measures exist");
  }
  return dom;
}

ThetaDomain resolve_theta_domain(const RateFunction& f, std::int64_t probe_depth) {
  if (const auto& known = f.known_theta_domain()) {
    ThetaDomain dom;
    dom.theta_lower = known->lower;
    dom.theta_upper = known->upper;
    dom.diagnostics.emplace_back("exact domain of family " + f.name());
    if (!(dom.theta_lower < dom.theta_upper)) {
      throw InadmissibleDomainError("tilt domain of " + f.name() + " is empty");
    }
    return dom;
  }
  if (f.support().finite()) {
    ThetaDomain dom;
    dom.theta_lower = -kInf;
    dom.theta_upper = kInf;
    dom.diagnostics.emplace_back("finite support");
    return dom;
  }
  return theta_domain(f, probe_depth);
}

double TiltedMeasure::prob(std::int64_t x) const noexcept {
  if (x < lo_ || x > hi_) return 0.0;
  return probs_[static_cast<std::size_t>(x - lo_)];
}

TiltedMeasure TiltedMeasure::from_log_weights(double theta, std::int64_t lo, std::vector<double> log_weights,
                                              double tail_bound) {
  // Drop ends whose weight underflows; their mass joins the truncation bound.
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::size_t first = 0;
  std::size_t last = log_weights.size();
  while (first + 1 < last && log_weights[first] - top < kUnderflowLog) ++first;
  while (last - 1 > first && log_weights[last - 1] - top < kUnderflowLog) --last;
  const double dropped = static_cast<double>(log_weights.size() - (last - first)) * std::exp(kUnderflowLog);

  TiltedMeasure m;
  m.theta_ = theta;
  m.lo_ = lo + static_cast<std::int64_t>(first);
  m.hi_ = lo + static_cast<std::int64_t>(last) - 1;
  m.probs_.resize(last - first);
  long double total = 0.0L;
  for (std::size_t i = first; i < last; ++i) {
    const double w = std::exp(log_weights[i] - top);
    m.probs_[i - first] = w;
    total += w;
  }
  for (double& p : m.probs_) p = static_cast<double>(p / total);
  m.log_normalizer_ = top + std::log(static_cast<double>(total));
  m.truncation_error_bound_ = tail_bound + dropped;

  long double mean = 0.0L;
  for (std::size_t i = 0; i < m.probs_.size(); ++i) {
    mean += static_cast<long double>(m.probs_[i]) * static_cast<long double>(m.lo_ + static_cast<std::int64_t>(i));
  }
  long double var = 0.0L;
  for (std::size_t i = 0; i < m.probs_.size(); ++i) {
    const long double d = static_cast<long double>(m.lo_ + static_cast<std::int64_t>(i)) - mean;
    var += static_cast<long double>(m.probs_[i]) * d * d;
  }
  m.mean_ = static_cast<double>(mean);
  m.variance_ = static_cast<double>(var);
  return m;
}

TiltedMeasure TiltedMeasure::retilted(double dtheta) const {
  std::vector<double> lw(probs_.size());
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    lw[i] = std::log(probs_[i]) + dtheta * static_cast<double>(lo_ + static_cast<std::int64_t>(i));
  }
  return from_log_weights(theta_ + dtheta, lo_, std::move(lw), truncation_error_bound_);
}

Distribution TiltedMeasure::to_distribution() const {
  std::vector<double> values(probs_.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(lo_ + static_cast<std::int64_t>(i));
  return Distribution(std::move(values), probs_);
}

TiltedMeasure tilted_measure(const RateFunction& f, double theta, const MeasureOptions& options) {
  if (!std::isfinite(theta)) throw DomainError("tilted_measure: theta must be finite");
  if (!(options.tail_tol > 0.0)) throw ValidationError("tilted_measure: tail_tol must be positive");
  const ThetaDomain dom = resolve_theta_domain(f);
  if (!dom.contains(theta, options.theta_margin)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "theta=" << theta << " not inside (" << dom.theta_lower << ", " << dom.theta_upper
        << ") with margin " << options.theta_margin << " for " << f.name();
    throw DomainError(msg.str());
  }

  const SupportInterval& s = f.support();
  const bool monotone_tails = f.kind() != RateKind::generic;
  constexpr std::int64_t kInitialHalfWidth = 32;
  std::int64_t lo = s.lower_infinite() ? -kInitialHalfWidth : std::max(s.x_min, -kInitialHalfWidth);
  std::int64_t hi = s.upper_infinite() ? kInitialHalfWidth : std::min(s.x_max, kInitialHalfWidth);
  if (s.finite() && *s.size() <= options.max_window) {
    lo = s.x_min;
    hi = s.x_max;
  }

  for (;;) {
    const auto lf = log_factorial_range(f, lo, hi);
    std::vector<double> lw(lf.size());
    for (std::size_t i = 0; i < lw.size(); ++i) {
      lw[i] = theta * static_cast<double>(lo + static_cast<std::int64_t>(i)) - lf[i];
    }
    const double top = *std::max_element(lw.begin(), lw.end());
    long double sum = 0.0L;
    for (double v : lw) sum += std::exp(v - top);
    const double log_mass = top + std::log(static_cast<double>(sum));

    // Omitted mass beyond each end, relative to the window mass.
    double upper_tail = 0.0;
    if (hi < s.x_max) {
      double log_ratio = theta - f.log_rate(hi + 1);
      double log_lead = lw.back();
      if (!monotone_tails && std::isfinite(dom.theta_upper)) {
        // weight(x) <= exp(x (theta - theta_upper + margin)) beyond the window
        log_ratio = theta - dom.theta_upper + options.theta_margin;
        log_lead = static_cast<double>(hi) * log_ratio;
      }
      upper_tail = log_ratio < 0.0 ? std::exp(log_lead - log_mass + log_ratio) / -std::expm1(log_ratio) : kInf;
    }
    double lower_tail = 0.0;
    if (lo > s.x_min) {
      double log_ratio = -theta + f.log_rate(lo);
      double log_lead = lw.front();
      if (!monotone_tails && std::isfinite(dom.theta_lower)) {
        log_ratio = dom.theta_lower + options.theta_margin - theta;
        log_lead = static_cast<double>(-lo) * log_ratio;
      }
      lower_tail = log_ratio < 0.0 ? std::exp(log_lead - log_mass + log_ratio) / -std::expm1(log_ratio) : kInf;
    }

    if (upper_tail + lower_tail <= options.tail_tol) {
      return TiltedMeasure::from_log_weights(theta, lo, std::move(lw), upper_tail + lower_tail);
    }
    const std::int64_t width = hi - lo + 1;
    if (width >= options.max_window) {
      std::ostringstream msg;
      msg << "tilted_measure: window [" << lo << ", " << hi << "] reached the cap of " << options.max_window
          << " points with tail bound " << upper_tail + lower_tail << " at theta=" << theta;
      throw TruncationFailureError(msg.str());
    }
    const std::int64_t step = std::min(width, options.max_window - width);
    if (upper_tail > 0.5 * options.tail_tol && hi < s.x_max) {
      hi = s.upper_infinite() ? hi + step : std::min(s.x_max, hi + step);
    }
    if (lower_tail > 0.5 * options.tail_tol && lo > s.x_min) {
      lo = s.lower_infinite() ? lo - step : std::max(s.x_min, lo - step);
    }
  }
}

double expect(const TiltedMeasure& m, const IntFn& phi) {
  long double acc = 0.0L;
  const auto p = m.probs();
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += static_cast<long double>(p[i]) * phi(m.lo() + static_cast<std::int64_t>(i));
  }
  const auto out = static_cast<double>(acc);
  if (!std::isfinite(out)) throw NonFiniteResultError("expect: result is not finite");
  return out;
}

double cov(const TiltedMeasure& m, const IntFn& phi, const IntFn& psi) {
  const auto p = m.probs();
  std::vector<double> a(p.size()), b(p.size());
  long double ea = 0.0L, eb = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::int64_t x = m.lo() + static_cast<std::int64_t>(i);
    a[i] = phi(x);
    b[i] = psi(x);
    ea += static_cast<long double>(p[i]) * a[i];
    eb += static_cast<long double>(p[i]) * b[i];
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) acc += static_cast<long double>(p[i]) * (a[i] - ea) * (b[i] - eb);
  const auto out = static_cast<double>(acc);
  if (!std::isfinite(out)) throw NonFiniteResultError("cov: result is not finite");
  return out;
}

}  // namespace tiltflux
