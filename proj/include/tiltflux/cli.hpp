#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tiltflux/measure.hpp"
#include "tiltflux/rate_function.hpp"

namespace tiltflux::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
  // rate: zrp-constant | zrp-linear | zrp-power:P | blp-exp:BETA | uniform:A:B
  std::string rate;
  std::string rate_file;
  std::string rate_kind = "zrp";
  std::string weights_file;
  // phi: x2 | identity | rate | abs:X0 | kink:A:B:X0
  std::string phi = "x2";
  std::string phi_file;
  double rho_min = std::numeric_limits<double>::quiet_NaN();
  double rho_max = std::numeric_limits<double>::quiet_NaN();
  int rho_steps = 21;
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string out;
  double tol = 1e-9;

  // verify
  int instances = 1000;
  std::string verify_mode = "random";  // random | positive | kinks

  // simulate
  double rho = 1.0;
  std::int64_t L = 128;
  double V = 1.0;
  int replicas = 2000;
  std::vector<double> t_grid{4.0, 8.0, 12.0, 16.0, 20.0};
  int bootstrap = 200;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct CommandResult {
  std::string command;
  Table table;
  std::vector<std::pair<std::string, Cell>> summary;
  int exit_code = kExitOk;
};

/// Two-column CSV (x,value; an optional header line) or a JSON object
/// {"x": value}. Keys must be consecutive integers.
std::map<std::int64_t, double> read_table_file(const std::string& path);

RateFunction make_rate(const RunConfig& config);
IntFn make_phi(const RunConfig& config, const RateFunction& f);
/// Explicit grid from --rho-min/--rho-max, else the middle 80% of J.
std::vector<double> make_rho_grid(const RunConfig& config, const RateFunction& f);

CommandResult cmd_flux(const RunConfig& config);
CommandResult cmd_convexity(const RunConfig& config);
CommandResult cmd_nu(const RunConfig& config);
CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_simulate(const RunConfig& config);

void write_csv(const CommandResult& result, std::ostream& os);
void write_json(const CommandResult& result, std::ostream& os);

/// Parses arguments, runs one subcommand and writes its output. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tiltflux::cli
