#include "tiltflux/rate_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tiltflux/errors.hpp"

namespace tiltflux {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBlpRelTol = 1e-12;

std::string fmt_x(std::int64_t x) {
  if (x == kMinusInfinity) return "-inf";
  if (x == kPlusInfinity) return "+inf";
  return std::to_string(x);
}

void require_gap_free(const std::map<std::int64_t, double>& table, const char* what) {
  if (table.size() < 2) throw ValidationError(std::string(what) + ": need at least two entries");
  std::int64_t expect = table.begin()->first;
  for (const auto& [x, v] : table) {
    if (x != expect) {
      throw ValidationError(std::string(what) + ": gap in keys before x=" + std::to_string(x));
    }
    if (!std::isfinite(v)) {
      throw ValidationError(std::string(what) + ": non-finite value at x=" + std::to_string(x));
    }
    ++expect;
  }
  if (table.begin()->first > 0 || table.rbegin()->first < 1) {
    throw ValidationError(std::string(what) + ": key range must contain 0 and 1");
  }
}

}  // namespace

const char* to_string(RateKind kind) noexcept {
  switch (kind) {
    case RateKind::zrp: return "zrp";
    case RateKind::blp: return "blp";
    case RateKind::generic: return "generic";
  }
  return "?";
}

RateFunction::RateFunction(SupportInterval support, RateKind kind, LogRate log_rate,
                           std::string name, std::optional<KnownThetaDomain> known)
    : support_(support),
      kind_(kind),
      log_rate_(std::make_shared<const LogRate>(std::move(log_rate))),
      name_(std::move(name)),
      known_(known) {
  validate();
}

void RateFunction::validate() const {
  if (support_.x_min > 0 || support_.x_max < 1) {
    throw ValidationError("support must satisfy x_min <= 0 and x_max >= 1, got {" +
                          fmt_x(support_.x_min) + ".." + fmt_x(support_.x_max) + "}");
  }
  const std::int64_t lo = support_.lower_infinite() ? -kProbeRange : support_.x_min;
  const std::int64_t hi = support_.upper_infinite() ? kProbeRange : support_.x_max;

  switch (kind_) {
    case RateKind::zrp: {
      if (support_.x_min != 0) throw ValidationError("zrp rate function needs x_min = 0");
      if (rate(0) != 0.0) throw ValidationError("zrp rate function needs f(0) = 0");
      if (!(rate(1) > 0.0)) throw ValidationError("zrp rate function needs f(1) > 0");
      if (!nondecreasing_on(0, hi)) throw ValidationError("zrp rate function must be nondecreasing");
      for (std::int64_t x = 1; x <= hi; ++x) {
        if (!(rate(x) > 0.0)) throw ValidationError("zrp rate vanishes at x=" + std::to_string(x));
      }
      break;
    }
    case RateKind::blp: {
      if (!support_.lower_infinite() || !support_.upper_infinite()) {
        throw ValidationError("blp rate function needs the full integer line as support");
      }
      if (!nondecreasing_on(lo, hi)) throw ValidationError("blp rate function must be nondecreasing");
      for (std::int64_t x = lo; x <= hi; ++x) {
        // f(x) f(1-x) = 1  <=>  log f(x) + log f(1-x) = 0
        const double a = log_rate(x);
        const double b = log_rate(1 - x);
        const double scale = std::max({1.0, std::abs(a), std::abs(b)});
        if (!(std::abs(a + b) <= kBlpRelTol * scale)) {
          throw ValidationError("blp constraint f(x) f(1-x) = 1 violated at x=" + std::to_string(x));
        }
      }
      break;
    }
    case RateKind::generic: {
      // f(x_min) never enters a generalized factorial, so only the rest is checked.
      const std::int64_t first = support_.lower_infinite() ? lo : support_.x_min + 1;
      for (std::int64_t x = first; x <= hi; ++x) {
        if (!(rate(x) > 0.0) || !std::isfinite(log_rate(x))) {
          throw ValidationError("generic rate function must be positive and finite, fails at x=" +
                                std::to_string(x));
        }
      }
      break;
    }
  }
}

double RateFunction::log_rate(std::int64_t x) const {
  if (!support_.contains(x)) {
    throw DomainError("x=" + std::to_string(x) + " outside support {" + fmt_x(support_.x_min) +
                      ".." + fmt_x(support_.x_max) + "} of rate function " + name_);
  }
  return (*log_rate_)(x);
}

double RateFunction::rate(std::int64_t x) const {
  const double lr = log_rate(x);
  return lr == -kInf ? 0.0 : std::exp(lr);
}

bool RateFunction::nondecreasing_on(std::int64_t from, std::int64_t to) const {
  from = std::max(from, support_.x_min);
  to = std::min(to, support_.x_max);
  for (std::int64_t x = from; x < to; ++x) {
    if (log_rate(x + 1) < log_rate(x)) return false;
  }
  return true;
}

bool RateFunction::constant_one_on(std::int64_t from, std::int64_t to) const {
  from = std::max(from, support_.x_min);
  to = std::min(to, support_.x_max);
  for (std::int64_t x = from; x <= to; ++x) {
    if (log_rate(x) != 0.0) return false;
  }
  return true;
}

RateFunction RateFunction::zrp_constant() {
  return RateFunction({0, kPlusInfinity}, RateKind::zrp,
                      [](std::int64_t x) { return x >= 1 ? 0.0 : -kInf; }, "zrp-constant",
                      KnownThetaDomain{-kInf, 0.0});
}

RateFunction RateFunction::zrp_linear() {
  return RateFunction({0, kPlusInfinity}, RateKind::zrp,
                      [](std::int64_t x) { return x >= 1 ? std::log(static_cast<double>(x)) : -kInf; },
                      "zrp-linear", KnownThetaDomain{-kInf, kInf});
}

RateFunction RateFunction::zrp_power(double exponent) {
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) {
    throw ValidationError("zrp-power exponent must be finite and >= 0");
  }
  std::ostringstream name;
  name << "zrp-power(" << exponent << ")";
  const double upper = exponent > 0.0 ? kInf : 0.0;
  return RateFunction(
      {0, kPlusInfinity}, RateKind::zrp,
      [exponent](std::int64_t x) {
        return x >= 1 ? exponent * std::log(static_cast<double>(x)) : -kInf;
      },
      name.str(), KnownThetaDomain{-kInf, upper});
}

RateFunction RateFunction::blp_exp(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw ValidationError("blp-exp beta must be finite and >= 0");
  }
  std::ostringstream name;
  name << "blp-exp(" << beta << ")";
  const KnownThetaDomain known = beta > 0.0 ? KnownThetaDomain{-kInf, kInf} : KnownThetaDomain{0.0, 0.0};
  return RateFunction(
      {kMinusInfinity, kPlusInfinity}, RateKind::blp,
      [beta](std::int64_t x) { return beta * (static_cast<double>(x) - 0.5); }, name.str(), known);
}

RateFunction RateFunction::generic_weights(const std::map<std::int64_t, double>& weights,
                                           std::string name) {
  require_gap_free(weights, "generic weights");
  std::vector<double> lw;
  lw.reserve(weights.size());
  for (const auto& [x, w] : weights) {
    if (!(w > 0.0)) throw ValidationError("generic weights must be positive, fails at x=" + std::to_string(x));
    lw.push_back(std::log(w));
  }
  return generic_log_weights(weights.begin()->first, std::move(lw), std::move(name));
}

RateFunction RateFunction::generic_log_weights(std::int64_t x_min, std::vector<double> log_weights,
                                               std::string name) {
  if (log_weights.size() < 2) throw ValidationError("generic weights: need at least two points");
  const std::int64_t x_max = x_min + static_cast<std::int64_t>(log_weights.size()) - 1;
  for (double v : log_weights) {
    if (!std::isfinite(v)) throw ValidationError("generic weights: log-weights must be finite");
  }
  auto table = std::make_shared<const std::vector<double>>(std::move(log_weights));
  // weight(x) = weight(0) / f(x)!  =>  log f(x) = lw(x-1) - lw(x)
  return RateFunction(
      {x_min, x_max}, RateKind::generic,
      [table, x_min](std::int64_t x) {
        if (x == x_min) return 0.0;
        const auto i = static_cast<std::size_t>(x - x_min);
        return (*table)[i - 1] - (*table)[i];
      },
      std::move(name));
}

RateFunction RateFunction::uniform_weights(std::int64_t x_min, std::int64_t x_max) {
  if (x_max <= x_min) throw ValidationError("uniform weights need at least two points");
  std::ostringstream name;
  name << "uniform(" << x_min << "," << x_max << ")";
  return generic_log_weights(x_min, std::vector<double>(static_cast<std::size_t>(x_max - x_min + 1), 0.0),
                             name.str());
}

RateFunction RateFunction::from_rate_table(RateKind kind, const std::map<std::int64_t, double>& table,
                                           std::string name) {
  require_gap_free(table, "rate table");
  std::vector<double> lr;
  lr.reserve(table.size());
  for (const auto& [x, v] : table) {
    if (v < 0.0) throw ValidationError("rate table: negative rate at x=" + std::to_string(x));
    lr.push_back(v == 0.0 ? -kInf : std::log(v));
  }
  const std::int64_t x_min = table.begin()->first;
  const std::int64_t x_max = table.rbegin()->first;
  auto values = std::make_shared<const std::vector<double>>(std::move(lr));
  return RateFunction(
      {x_min, x_max}, kind,
      [values, x_min](std::int64_t x) { return (*values)[static_cast<std::size_t>(x - x_min)]; },
      std::move(name));
}

double log_factorial_product(const RateFunction& f, std::int64_t x) {
  if (!f.support().contains(x)) {
    throw DomainError("log_factorial_product: x=" + std::to_string(x) + " outside support");
  }
  double acc = 0.0;
  if (x > 0) {
    for (std::int64_t y = 1; y <= x; ++y) {
      const double lr = f.log_rate(y);
      if (lr == -kInf) throw SingularRateError("f(" + std::to_string(y) + ") = 0 in f(x)! product");
      acc += lr;
    }
  } else if (x < 0) {
    for (std::int64_t y = 0; y > x; --y) {
      const double lr = f.log_rate(y);
      if (lr == -kInf) throw SingularRateError("f(" + std::to_string(y) + ") = 0 in f(x)! product");
      acc -= lr;
    }
  }
  return acc;
}

std::vector<double> log_factorial_range(const RateFunction& f, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) return {};
  if (!f.support().contains(lo) || !f.support().contains(hi)) {
    throw DomainError("log_factorial_range: [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] not inside support");
  }
  std::vector<double> out(static_cast<std::size_t>(hi - lo + 1));
  // Walk upward from 0 for the nonnegative part and downward for the rest.
  double acc = 0.0;
  const std::int64_t up_end = hi;
  for (std::int64_t x = 0; x <= up_end; ++x) {
    if (x > 0) {
      const double lr = f.log_rate(x);
      if (lr == -kInf) throw SingularRateError("f(" + std::to_string(x) + ") = 0 in f(x)! product");
      acc += lr;
    }
    if (x >= lo) out[static_cast<std::size_t>(x - lo)] = acc;
  }
  acc = 0.0;
  for (std::int64_t x = -1; x >= lo; --x) {
    const double lr = f.log_rate(x + 1);
    if (lr == -kInf) throw SingularRateError("f(" + std::to_string(x + 1) + ") = 0 in f(x)! product");
    acc -= lr;
    if (x <= hi) out[static_cast<std::size_t>(x - lo)] = acc;
  }
  return out;
}

}  // namespace tiltflux
