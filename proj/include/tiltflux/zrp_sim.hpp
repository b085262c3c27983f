#pragma once

#include <cstdint>
#include <vector>

#include "tiltflux/flux.hpp"
#include "tiltflux/rate_function.hpp"

namespace tiltflux {

/// Occupancies of a ring of L sites; lattice site j sits at ring index j mod L.
struct RingState {
  std::vector<std::int64_t> occ;
  double time = 0.0;

  std::int64_t size() const noexcept { return static_cast<std::int64_t>(occ.size()); }
  std::int64_t particles() const noexcept;
};

/// iid draws from mu^{theta(rho)} by inverse CDF on the materialized table.
RingState sample_stationary(const RateFunction& f, double rho, std::int64_t L, std::uint64_t seed,
                            const TiltOptions& options = {});

struct SimEvent {
  double time = 0.0;
  std::int64_t site = 0;      // ring index the jump leaves
  bool second_class = false;  // the jumper was the second-class particle
  bool operator==(const SimEvent&) const = default;
};

struct SimulateOptions {
  bool record_log = true;
  /// Recount the particles after every event.
  bool check_every_event = true;
};

struct SimulationResult {
  RingState state;
  std::vector<SimEvent> log;
  std::int64_t jumps = 0;
};

/// Totally asymmetric zero-range dynamics on the ring up to `horizon`: a site
/// holding x particles sends one to its right neighbour at rate f(x).
/// Throws RateTableExhaustedError when an occupancy leaves the support of f.
SimulationResult simulate(const RateFunction& f, RingState state, double horizon, std::uint64_t seed,
                          const SimulateOptions& options = {});

struct SecondClassState {
  std::int64_t Q = 0;              // unwrapped lattice position
  std::int64_t attached_site = 0;  // Q mod L
};

struct SecondClassTrajectory {
  std::vector<double> times;
  std::vector<SecondClassState> states;
  std::int64_t origin_occupancy = 0;  // ordinary particles at the origin at time 0
  RingState final_state;
  std::int64_t jumps = 0;
};

/// Basic coupling with one second-class particle started at the origin. The
/// ordinary occupancy is mu^{theta(rho)} off the origin and nu^{theta(rho)} at
/// the origin. With x ordinary particles at its site the second-class particle
/// jumps right at rate f(x+1) - f(x); arrivals do not move it. Q is recorded at
/// each checkpoint (sorted, within [0, horizon]). Throws CouplingUndefinedError
/// for a rate that decreases somewhere and GeometryError if |Q| reaches L/2.
SecondClassTrajectory run_second_class(const RateFunction& f, double rho, std::int64_t L, double horizon,
                                       std::uint64_t seed, std::vector<double> checkpoints = {},
                                       const TiltOptions& options = {});

/// [Vt]: the integer between 0 and Vt closest to Vt.
std::int64_t truncate_toward_zero(double v) noexcept;

/// Smallest ring keeping tracked displacements below L/2 with a margin:
/// 2 (max(|V|, |H'|) t + 4 sqrt(t) + 4), rounded up.
std::int64_t minimal_ring_size(double speed, double horizon) noexcept;

struct ExperimentConfig {
  double rho = 1.0;
  double V = 1.0;
  std::vector<double> t_grid;
  std::int64_t L = 128;
  int replicas = 2000;
  std::uint64_t seed = 1;
  int bootstrap = 200;
};

struct ExperimentStats {
  int replicas = 0;
  std::int64_t L = 0;
  double rho = 0.0;
  double V = 0.0;
  std::vector<double> t_grid;
  std::vector<std::int64_t> observer;  // [Vt]
  std::vector<double> mean_J;
  std::vector<double> var_J;
  std::vector<double> var_J_stderr;
  std::vector<double> mean_absdev_Q;  // E|Q(t) - [Vt]|
  std::vector<double> mean_absdev_Q_stderr;
  std::vector<double> mean_Q;
  std::vector<double> ratio;  // var_J / mean_absdev_Q; NaN where the deviation is zero
  std::vector<double> ratio_stderr;
  /// max |r_i - mean r| / mean r over the finite ratios.
  double ratio_spread = 0.0;
  double mean_ratio = 0.0;
  /// Var^{theta(rho)} X, printed next to the ratio for comparison only.
  double marginal_variance = 0.0;
};

/// Two independent ensembles: stationary runs for Var J^(V)(t), and
/// nu-initialized second-class runs for E|Q(t) - [Vt]|. Bootstrap standard
/// errors. Throws GeometryError when L is below `minimal_ring_size` and
/// StatisticsError for fewer than 100 replicas or an all-degenerate ratio.
ExperimentStats current_variance_experiment(const RateFunction& f, const ExperimentConfig& config,
                                            const TiltOptions& options = {});

struct StationarityStats {
  std::int64_t lo = 0;  // first occupancy in the tables
  std::vector<double> empirical;  // pooled over sites and replicas at time T
  std::vector<double> expected;   // mu^{theta(rho)}
  double tv_distance = 0.0;
  double jump_rate = 0.0;  // jumps per site per unit time
  double jump_rate_stderr = 0.0;
  double flux = 0.0;  // E f(X)
};

StationarityStats stationarity_experiment(const RateFunction& f, double rho, std::int64_t L, double T, int replicas,
                                          std::uint64_t seed, const TiltOptions& options = {});

struct VelocityStats {
  double mean_velocity = 0.0;  // E Q(T) / T
  double stderr_velocity = 0.0;
  double speed = 0.0;  // H'(rho)
};

VelocityStats second_class_velocity(const RateFunction& f, double rho, std::int64_t L, double T, int replicas,
                                    std::uint64_t seed, const TiltOptions& options = {});

}  // namespace tiltflux
