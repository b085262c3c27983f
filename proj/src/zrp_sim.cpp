#include "tiltflux/zrp_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "tiltflux/errors.hpp"
#include "tiltflux/random_instances.hpp"

namespace tiltflux {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t ring_index(std::int64_t j, std::int64_t L) noexcept { return ((j % L) + L) % L; }

// Inverse-CDF sampler over a probability table starting at `lo`.
class TableSampler {
 public:
  TableSampler(std::int64_t lo, std::span<const double> probs) : lo_(lo), cdf_(probs.size()) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      cdf_[i] = static_cast<double>(acc);
    }
    cdf_.back() = std::max(cdf_.back(), 1.0);
  }
  std::int64_t operator()(std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u * cdf_.back());
    return lo_ + static_cast<std::int64_t>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
  }

 private:
  std::int64_t lo_;
  std::vector<double> cdf_;
};

void require_zrp(const RateFunction& f, const char* op) {
  if (f.kind() != RateKind::zrp) throw ValidationError(std::string(op) + ": the simulator handles zrp rates only");
}

// Event-driven ring dynamics with per-site exponential clocks and lazy
// deletion of stale heap entries. Optionally carries one second-class
// particle under the basic coupling.
class Engine {
 public:
  Engine(const RateFunction& f, std::vector<std::int64_t> occ, std::uint64_t seed, bool second_class)
      : f_(f), occ_(std::move(occ)), L_(static_cast<std::int64_t>(occ_.size())), rng_(seed),
        stamp_(occ_.size(), 0), second_(second_class) {
    total_ = std::accumulate(occ_.begin(), occ_.end(), std::int64_t{0});
    for (std::int64_t i = 0; i < L_; ++i) schedule(i);
  }

  // Processes every event with time <= t, then sets the clock to t.
  void advance_to(double t, bool check, std::vector<SimEvent>* log) {
    while (!heap_.empty() && heap_.top().time <= t) {
      const Entry e = heap_.top();
      heap_.pop();
      if (e.stamp != stamp_[static_cast<std::size_t>(e.site)]) continue;
      now_ = e.time;
      fire(e.site, log);
      if (check) verify_count();
    }
    now_ = std::max(now_, t);
  }

  const std::vector<std::int64_t>& occ() const noexcept { return occ_; }
  double now() const noexcept { return now_; }
  std::int64_t jumps() const noexcept { return jumps_; }
  std::int64_t bond_flux() const noexcept { return bond_flux_; }
  std::int64_t Q() const noexcept { return q_; }

  // Current across the observer at lattice bond ([Vt], [Vt]+1), counted from
  // the flux through bond (0, 1) and the occupancies in between.
  std::int64_t observer_current(std::int64_t n) const {
    std::int64_t j = bond_flux_;
    if (n >= 0) {
      for (std::int64_t k = 1; k <= n; ++k) j -= occ_[static_cast<std::size_t>(ring_index(k, L_))];
    } else {
      for (std::int64_t k = n + 1; k <= 0; ++k) j += occ_[static_cast<std::size_t>(ring_index(k, L_))];
    }
    return j;
  }

  void verify_count() const {
    const auto n = std::accumulate(occ_.begin(), occ_.end(), std::int64_t{0});
    if (n != total_) throw ValidationError("particle count changed from " + std::to_string(total_) + " to " +
                                           std::to_string(n));
  }

 private:
  struct Entry {
    double time;
    std::int64_t site;
    std::uint64_t stamp;
    bool operator>(const Entry& o) const noexcept { return time > o.time || (time == o.time && site > o.site); }
  };

  double rate(std::int64_t x) {
    if (x < 0) throw ValidationError("negative occupancy");
    const auto k = static_cast<std::size_t>(x);
    while (rates_.size() <= k) {
      const auto y = static_cast<std::int64_t>(rates_.size());
      if (!f_.support().contains(y)) {
        throw RateTableExhaustedError("occupancy " + std::to_string(y) + " is beyond the rate table of " + f_.name());
      }
      const double r = f_.rate(y);
      if (!std::isfinite(r)) throw RateTableExhaustedError("rate overflow at occupancy " + std::to_string(y));
      rates_.push_back(r);
    }
    return rates_[k];
  }

  bool holds_second(std::int64_t i) const noexcept { return second_ && i == ring_index(q_, L_); }

  void schedule(std::int64_t i) {
    const auto k = static_cast<std::size_t>(i);
    ++stamp_[k];
    const double r = rate(occ_[k] + (holds_second(i) ? 1 : 0));
    if (r > 0.0) heap_.push(Entry{now_ + std::exponential_distribution<double>(r)(rng_), i, stamp_[k]});
  }

  void fire(std::int64_t i, std::vector<SimEvent>* log) {
    const std::int64_t j = ring_index(i + 1, L_);
    bool second_jumps = false;
    if (holds_second(i)) {
      const std::int64_t x = occ_[static_cast<std::size_t>(i)];
      const double ordinary = rate(x);
      const double total = rate(x + 1);
      second_jumps = std::uniform_real_distribution<double>(0.0, total)(rng_) >= ordinary;
    }
    if (second_jumps) {
      ++q_;
    } else {
      --occ_[static_cast<std::size_t>(i)];
      ++occ_[static_cast<std::size_t>(j)];
      if (i == 0) ++bond_flux_;
    }
    ++jumps_;
    if (log) log->push_back(SimEvent{now_, i, second_jumps});
    schedule(i);
    if (j != i) schedule(j);
  }

  const RateFunction& f_;
  std::vector<std::int64_t> occ_;
  std::int64_t L_;
  std::mt19937_64 rng_;
  std::vector<std::uint64_t> stamp_;
  std::vector<double> rates_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  bool second_;
  double now_ = 0.0;
  std::int64_t total_ = 0;
  std::int64_t jumps_ = 0;
  std::int64_t bond_flux_ = 0;
  std::int64_t q_ = 0;
};

double sample_variance(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (n - 1);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double stddev_of(const std::vector<double>& v) { return std::sqrt(sample_variance(v)); }

std::vector<std::int64_t> sample_with_origin(const TiltedMeasure& mu, const NuMeasure& nu, std::int64_t L,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const TableSampler from_mu(mu.lo(), mu.probs());
  const TableSampler from_nu(nu.y_lo, nu.probs);
  std::vector<std::int64_t> occ(static_cast<std::size_t>(L));
  occ[0] = from_nu(rng);
  for (std::size_t i = 1; i < occ.size(); ++i) occ[i] = from_mu(rng);
  return occ;
}

}  // namespace

std::int64_t RingState::particles() const noexcept { return std::accumulate(occ.begin(), occ.end(), std::int64_t{0}); }

RingState sample_stationary(const RateFunction& f, double rho, std::int64_t L, std::uint64_t seed,
                            const TiltOptions& options) {
  if (L < 1) throw GeometryError("ring needs at least one site");
  const auto sol = theta_of_rho(f, rho, default_rho_tol(rho), options);
  const TableSampler draw(sol.measure.lo(), sol.measure.probs());
  std::mt19937_64 rng(seed);
  RingState s;
  s.occ.resize(static_cast<std::size_t>(L));
  for (auto& x : s.occ) x = draw(rng);
  return s;
}

SimulationResult simulate(const RateFunction& f, RingState state, double horizon, std::uint64_t seed,
                          const SimulateOptions& options) {
  require_zrp(f, "simulate");
  if (state.occ.empty()) throw GeometryError("simulate: empty ring");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ValidationError("simulate: horizon must be finite and >= 0");
  for (std::int64_t x : state.occ) {
    if (!f.support().contains(x)) throw ValidationError("simulate: occupancy outside the support of the rate");
  }
  SimulationResult r;
  Engine e(f, std::move(state.occ), seed, false);
  e.advance_to(horizon, options.check_every_event, options.record_log ? &r.log : nullptr);
  e.verify_count();
  r.state.occ = e.occ();
  r.state.time = state.time + horizon;
  r.jumps = e.jumps();
  return r;
}

SecondClassTrajectory run_second_class(const RateFunction& f, double rho, std::int64_t L, double horizon,
                                       std::uint64_t seed, std::vector<double> checkpoints,
                                       const TiltOptions& options) {
  const std::int64_t probe_hi = std::min(f.support().x_max, RateFunction::kProbeRange);
  if (!f.nondecreasing_on(0, probe_hi)) {
    throw CouplingUndefinedError("basic coupling needs a nondecreasing rate; " + f.name() + " decreases");
  }
  require_zrp(f, "run_second_class");
  if (L < 2) throw GeometryError("run_second_class: ring needs at least two sites");
  std::sort(checkpoints.begin(), checkpoints.end());
  for (double t : checkpoints) {
    if (!(t >= 0.0 && t <= horizon)) throw ValidationError("run_second_class: checkpoint outside [0, horizon]");
  }
  const auto mu = theta_of_rho(f, rho, default_rho_tol(rho), options).measure;
  const NuMeasure nu = nu_measure(f, rho, options.measure.tail_tol, options);
  auto occ = sample_with_origin(mu, nu, L, instance_seed(seed, 0));

  SecondClassTrajectory tr;
  tr.origin_occupancy = occ[0];
  Engine e(f, std::move(occ), instance_seed(seed, 1), true);
  auto record = [&](double t) {
    if (2 * std::abs(e.Q()) >= L) {
      throw GeometryError("second-class particle travelled " + std::to_string(e.Q()) + " sites on a ring of " +
                          std::to_string(L));
    }
    tr.times.push_back(t);
    tr.states.push_back(SecondClassState{e.Q(), ring_index(e.Q(), L)});
  };
  for (double t : checkpoints) {
    e.advance_to(t, false, nullptr);
    record(t);
  }
  e.advance_to(horizon, false, nullptr);
  if (2 * std::abs(e.Q()) >= L) throw GeometryError("second-class particle wrapped the ring");
  e.verify_count();
  tr.final_state.occ = e.occ();
  tr.final_state.time = horizon;
  tr.jumps = e.jumps();
  return tr;
}

std::int64_t truncate_toward_zero(double v) noexcept { return static_cast<std::int64_t>(std::trunc(v)); }

std::int64_t minimal_ring_size(double speed, double horizon) noexcept {
  const double reach = std::abs(speed) * horizon + 4.0 * std::sqrt(std::max(horizon, 0.0)) + 4.0;
  return static_cast<std::int64_t>(std::ceil(2.0 * reach));
}

ExperimentStats current_variance_experiment(const RateFunction& f, const ExperimentConfig& c,
                                            const TiltOptions& options) {
  require_zrp(f, "current_variance_experiment");
  if (c.replicas < 100) throw StatisticsError("current_variance_experiment: need at least 100 replicas");
  if (c.t_grid.empty()) throw ValidationError("current_variance_experiment: empty checkpoint grid");
  if (c.bootstrap < 2) throw StatisticsError("current_variance_experiment: need at least two bootstrap draws");
  std::vector<double> grid = c.t_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.front() < 0.0) throw ValidationError("current_variance_experiment: negative checkpoint");
  const double horizon = grid.back();
  const double speed = characteristic_speed(f, c.rho, 1.0, options);
  const std::int64_t need = minimal_ring_size(std::max(std::abs(c.V), std::abs(speed)), horizon);
  if (c.L < need) {
    std::ostringstream msg;
    msg << "ring of " << c.L << " sites is too small for horizon " << horizon << " (need L >= " << need << ")";
    throw GeometryError(msg.str());
  }

  ExperimentStats s;
  s.replicas = c.replicas;
  s.L = c.L;
  s.rho = c.rho;
  s.V = c.V;
  s.t_grid = grid;
  for (double t : grid) s.observer.push_back(truncate_toward_zero(c.V * t));
  const std::size_t k = grid.size();
  const auto n = static_cast<std::size_t>(c.replicas);

  const auto mu_sol = theta_of_rho(f, c.rho, default_rho_tol(c.rho), options);
  s.marginal_variance = mu_sol.variance;
  const TableSampler from_mu(mu_sol.measure.lo(), mu_sol.measure.probs());

  // J[t][replica], D[t][replica]
  std::vector<std::vector<double>> J(k, std::vector<double>(n)), D(k, std::vector<double>(n)),
      Qs(k, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint64_t base = instance_seed(c.seed, 2 * r);
    std::mt19937_64 init(instance_seed(base, 0));
    std::vector<std::int64_t> occ(static_cast<std::size_t>(c.L));
    for (auto& x : occ) x = from_mu(init);
    Engine e(f, std::move(occ), instance_seed(base, 1), false);
    for (std::size_t i = 0; i < k; ++i) {
      e.advance_to(grid[i], false, nullptr);
      J[i][r] = static_cast<double>(e.observer_current(s.observer[i]));
    }
    e.verify_count();
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto tr = run_second_class(f, c.rho, c.L, horizon, instance_seed(c.seed, 2 * r + 1), grid, options);
    for (std::size_t i = 0; i < k; ++i) {
      Qs[i][r] = static_cast<double>(tr.states[i].Q);
      D[i][r] = std::abs(static_cast<double>(tr.states[i].Q - s.observer[i]));
    }
  }

  auto ratio_of = [](double v, double d) { return d > 0.0 ? v / d : kNaN; };
  for (std::size_t i = 0; i < k; ++i) {
    s.mean_J.push_back(mean_of(J[i]));
    s.var_J.push_back(sample_variance(J[i]));
    s.mean_absdev_Q.push_back(mean_of(D[i]));
    s.mean_Q.push_back(mean_of(Qs[i]));
    s.ratio.push_back(ratio_of(s.var_J[i], s.mean_absdev_Q[i]));
  }

  std::mt19937_64 boot(instance_seed(c.seed, 0xb00));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::vector<double>> bv(k), bd(k), br(k);
  std::vector<double> tmp_j(n), tmp_d(n);
  for (int b = 0; b < c.bootstrap; ++b) {
    std::vector<std::size_t> idx_j(n), idx_d(n);
    for (auto& x : idx_j) x = pick(boot);
    for (auto& x : idx_d) x = pick(boot);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t r = 0; r < n; ++r) {
        tmp_j[r] = J[i][idx_j[r]];
        tmp_d[r] = D[i][idx_d[r]];
      }
      const double v = sample_variance(tmp_j);
      const double d = mean_of(tmp_d);
      bv[i].push_back(v);
      bd[i].push_back(d);
      const double q = ratio_of(v, d);
      if (std::isfinite(q)) br[i].push_back(q);
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    s.var_J_stderr.push_back(stddev_of(bv[i]));
    s.mean_absdev_Q_stderr.push_back(stddev_of(bd[i]));
    s.ratio_stderr.push_back(br[i].size() >= 2 ? stddev_of(br[i]) : kNaN);
  }

  std::vector<double> finite;
  for (double q : s.ratio) {
    if (std::isfinite(q)) finite.push_back(q);
  }
  if (finite.empty()) {
    if (horizon > 0.0) throw StatisticsError("current_variance_experiment: no checkpoint has a nonzero deviation");
    s.mean_ratio = kNaN;
    s.ratio_spread = 0.0;
    return s;
  }
  s.mean_ratio = mean_of(finite);
  if (!(s.mean_ratio > 0.0)) throw StatisticsError("current_variance_experiment: degenerate current variance");
  for (double q : finite) s.ratio_spread = std::max(s.ratio_spread, std::abs(q - s.mean_ratio) / s.mean_ratio);
  return s;
}

StationarityStats stationarity_experiment(const RateFunction& f, double rho, std::int64_t L, double T, int replicas,
                                          std::uint64_t seed, const TiltOptions& options) {
  require_zrp(f, "stationarity_experiment");
  if (replicas < 2) throw StatisticsError("stationarity_experiment: need at least two replicas");
  const auto sol = theta_of_rho(f, rho, default_rho_tol(rho), options);
  const auto& mu = sol.measure;
  StationarityStats s;
  s.lo = mu.lo();
  s.expected.assign(mu.probs().begin(), mu.probs().end());
  s.flux = expect(mu, flux_integrand(f));

  std::vector<double> counts;
  std::vector<double> rates;
  std::int64_t total = 0;
  for (int r = 0; r < replicas; ++r) {
    const std::uint64_t base = instance_seed(seed, static_cast<std::uint64_t>(r));
    RingState init = sample_stationary(f, rho, L, instance_seed(base, 0), options);
    SimulateOptions so;
    so.record_log = false;
    so.check_every_event = false;
    const auto res = simulate(f, std::move(init), T, instance_seed(base, 1), so);
    rates.push_back(static_cast<double>(res.jumps) / (static_cast<double>(L) * T));
    for (std::int64_t x : res.state.occ) {
      const std::int64_t k = x - s.lo;
      if (k < 0) throw ValidationError("stationarity_experiment: occupancy below the tabulated window");
      if (static_cast<std::size_t>(k) >= counts.size()) counts.resize(static_cast<std::size_t>(k) + 1, 0.0);
      counts[static_cast<std::size_t>(k)] += 1.0;
      ++total;
    }
  }
  const std::size_t m = std::max(counts.size(), s.expected.size());
  counts.resize(m, 0.0);
  s.expected.resize(m, 0.0);
  s.empirical.resize(m);
  double tv = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    s.empirical[i] = counts[i] / static_cast<double>(total);
    tv += std::abs(s.empirical[i] - s.expected[i]);
  }
  s.tv_distance = 0.5 * tv;
  s.jump_rate = mean_of(rates);
  s.jump_rate_stderr = stddev_of(rates) / std::sqrt(static_cast<double>(replicas));
  return s;
}

VelocityStats second_class_velocity(const RateFunction& f, double rho, std::int64_t L, double T, int replicas,
                                    std::uint64_t seed, const TiltOptions& options) {
  if (replicas < 2) throw StatisticsError("second_class_velocity: need at least two replicas");
  if (!(T > 0.0)) throw ValidationError("second_class_velocity: T must be positive");
  VelocityStats v;
  v.speed = characteristic_speed(f, rho, 1.0, options);
  std::vector<double> vel;
  for (int r = 0; r < replicas; ++r) {
    const auto tr = run_second_class(f, rho, L, T, instance_seed(seed, static_cast<std::uint64_t>(r)), {T}, options);
    vel.push_back(static_cast<double>(tr.states.back().Q) / T);
  }
  v.mean_velocity = mean_of(vel);
  v.stderr_velocity = stddev_of(vel) / std::sqrt(static_cast<double>(replicas));
  return v;
}

}  // namespace tiltflux
