#include "tiltflux/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "tiltflux/convexity.hpp"
#include "tiltflux/errors.hpp"
#include "tiltflux/flux.hpp"
#include "tiltflux/random_instances.hpp"
#include "tiltflux/zrp_sim.hpp"

namespace tiltflux::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

ojson cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? ojson(*d) : ojson(nullptr);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return ojson(*i);
  return ojson(std::get<std::string>(c));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "' as a number");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "' as an integer");
  }
}

std::map<std::int64_t, double> check_consecutive(std::map<std::int64_t, double> table, const std::string& path) {
  if (table.empty()) throw ConfigError(path + ": empty table");
  std::int64_t expect = table.begin()->first;
  for (const auto& [x, v] : table) {
    if (x != expect) throw ConfigError(path + ": gap in table before x=" + std::to_string(x));
    if (!std::isfinite(v)) throw ConfigError(path + ": non-finite value at x=" + std::to_string(x));
    ++expect;
  }
  return table;
}

RateKind parse_kind(const std::string& s) {
  if (s == "zrp") return RateKind::zrp;
  if (s == "blp") return RateKind::blp;
  if (s == "generic") return RateKind::generic;
  throw ConfigError("unknown rate kind '" + s + "' (zrp, blp, generic)");
}

// Shape check shared by flux and convexity; tol is relative to the scale.
bool shape_consistent(Shape shape, const std::vector<double>& second, double scale, double tol) {
  if (second.empty()) return true;
  const auto [lo, hi] = std::minmax_element(second.begin(), second.end());
  switch (shape) {
    case Shape::linear:
      return std::max(std::abs(*lo), std::abs(*hi)) <= tol * scale;
    case Shape::strictly_convex:
      return *lo > 0.0;
    case Shape::strictly_concave:
      return *hi < 0.0;
    case Shape::indeterminate:
      break;
  }
  return true;
}

}  // namespace

std::map<std::int64_t, double> read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::int64_t, double> table;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    ojson j;
    try {
      j = ojson::parse(body);
    } catch (const std::exception& e) {
      throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    for (const auto& [k, v] : j.items()) {
      if (!v.is_number()) throw ConfigError(path + ": value for key " + k + " is not a number");
      if (!table.emplace(parse_int(k, "table key"), v.get<double>()).second) {
        throw ConfigError(path + ": duplicate key " + k);
      }
    }
    return check_consecutive(std::move(table), path);
  }
  std::istringstream lines(text);
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw ConfigError(path + ": expected two columns in line '" + line + "'");
    if (first && !parts[0].empty() && !(std::isdigit(static_cast<unsigned char>(parts[0][0])) || parts[0][0] == '-' ||
                                        parts[0][0] == '+')) {
      first = false;  // header
      continue;
    }
    first = false;
    const std::int64_t x = parse_int(parts[0], "table key");
    if (!table.emplace(x, parse_double(parts[1], "table value")).second) {
      throw ConfigError(path + ": duplicate key " + parts[0]);
    }
  }
  return check_consecutive(std::move(table), path);
}

RateFunction make_rate(const RunConfig& c) {
  const int given = !c.rate.empty() + !c.rate_file.empty() + !c.weights_file.empty();
  if (given != 1) throw ConfigError("give exactly one of --rate, --rate-file, --weights-file");
  if (!c.rate_file.empty()) return RateFunction::from_rate_table(parse_kind(c.rate_kind), read_table_file(c.rate_file));
  if (!c.weights_file.empty()) return RateFunction::generic_weights(read_table_file(c.weights_file));
  const auto parts = split(c.rate, ':');
  const std::string& name = parts[0];
  auto arity = [&](std::size_t n) {
    if (parts.size() != n + 1) throw ConfigError("rate '" + c.rate + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (name == "zrp-constant") {
    arity(0);
    return RateFunction::zrp_constant();
  }
  if (name == "zrp-linear") {
    arity(0);
    return RateFunction::zrp_linear();
  }
  if (name == "zrp-power") {
    arity(1);
    return RateFunction::zrp_power(parse_double(parts[1], "power"));
  }
  if (name == "blp-exp") {
    arity(1);
    return RateFunction::blp_exp(parse_double(parts[1], "beta"));
  }
  if (name == "uniform") {
    arity(2);
    return RateFunction::uniform_weights(parse_int(parts[1], "lower end"), parse_int(parts[2], "upper end"));
  }
  throw ConfigError("unknown rate '" + c.rate + "'");
}

IntFn make_phi(const RunConfig& c, const RateFunction& f) {
  if (!c.phi_file.empty()) {
    auto table = std::make_shared<const std::map<std::int64_t, double>>(read_table_file(c.phi_file));
    return [table](std::int64_t x) {
      const auto it = table->find(x);
      if (it == table->end()) throw DomainError("phi table has no value at x=" + std::to_string(x));
      return it->second;
    };
  }
  const auto parts = split(c.phi, ':');
  const std::string& name = parts[0];
  auto arity = [&](std::size_t n) {
    if (parts.size() != n + 1) throw ConfigError("phi '" + c.phi + "' expects " + std::to_string(n) + " parameter(s)");
  };
  if (name == "x2") {
    arity(0);
    return [](std::int64_t x) { return static_cast<double>(x) * static_cast<double>(x); };
  }
  if (name == "identity") {
    arity(0);
    return [](std::int64_t x) { return static_cast<double>(x); };
  }
  if (name == "rate") {
    arity(0);
    return [f](std::int64_t x) { return f.rate(x); };
  }
  if (name == "abs") {
    arity(1);
    const double x0 = parse_double(parts[1], "x0");
    return [x0](std::int64_t x) { return std::abs(static_cast<double>(x) - x0); };
  }
  if (name == "kink") {
    arity(3);
    const RealFn k = kink_function(0.0, parse_double(parts[1], "a"), parse_double(parts[2], "b"),
                                   parse_double(parts[3], "x0"));
    return [k](std::int64_t x) { return k(static_cast<double>(x)); };
  }
  throw ConfigError("unknown phi '" + c.phi + "'");
}

std::vector<double> make_rho_grid(const RunConfig& c, const RateFunction& f) {
  if (c.rho_steps < 1) throw ConfigError("--rho-steps must be positive");
  const bool has_min = !std::isnan(c.rho_min), has_max = !std::isnan(c.rho_max);
  if (has_min != has_max) throw ConfigError("give both --rho-min and --rho-max or neither");
  double lo = c.rho_min, hi = c.rho_max;
  if (!has_min) {
    if (is_unit_blp(f)) {
      lo = -1.0;
      hi = 1.0;
    } else {
      const auto j = attainable_interval(f);
      if (!std::isfinite(j.lower) || !std::isfinite(j.upper)) {
        throw ConfigError("the density interval of " + f.name() + " is unbounded; pass --rho-min and --rho-max");
      }
      return middle_grid(j.lower, j.upper, 0.8, c.rho_steps);
    }
  }
  if (!(hi >= lo) || (c.rho_steps > 1 && !(hi > lo))) throw ConfigError("--rho-max must exceed --rho-min");
  std::vector<double> grid;
  if (c.rho_steps == 1) return {lo};
  for (int i = 0; i < c.rho_steps; ++i) grid.push_back(lo + (hi - lo) * i / (c.rho_steps - 1));
  return grid;
}

CommandResult cmd_flux(const RunConfig& c) {
  const RateFunction f = make_rate(c);
  const FluxProfile p = flux_profile(f, make_rho_grid(c, f));
  CommandResult r;
  r.command = "flux";
  r.table.columns = {"rho", "H", "H_prime", "classification"};
  for (std::size_t i = 0; i < p.rho_grid.size(); ++i) {
    r.table.rows.push_back({p.rho_grid[i], p.H[i], p.H_prime[i], std::string(to_string(p.classification))});
  }
  const bool ok = shape_consistent(p.classification, p.second_differences, p.scale, c.tol);
  r.summary = {{"rate", f.name()},
               {"classification", std::string(to_string(p.classification))},
               {"strict_points", static_cast<std::int64_t>(p.strict_points.size())},
               {"min_second_difference", p.min_second_difference},
               {"max_abs_second_difference", p.max_abs_second_difference},
               {"scale", p.scale},
               {"check", std::string(ok ? "pass" : "fail")}};
  r.exit_code = ok ? kExitOk : kExitViolation;
  return r;
}

CommandResult cmd_convexity(const RunConfig& c) {
  const RateFunction f = make_rate(c);
  const IntFn phi = make_phi(c, f);
  ClassifyOptions opt;
  opt.rho_grid = make_rho_grid(c, f);
  const ConvexityReport rep = classify(f, phi, opt);
  CommandResult r;
  r.command = "convexity";
  r.table.columns = {"rho", "G", "G_prime", "G_second_fd", "slack_2_3"};
  double worst = std::numeric_limits<double>::infinity();
  bool slack_ok = true;
  const RealFn phi_real = [phi](double x) { return phi(static_cast<std::int64_t>(std::llround(x))); };
  for (std::size_t i = 0; i < rep.rho_grid.size(); ++i) {
    const double rho = rep.rho_grid[i];
    const Slack s = curvature_slack(theta_of_rho(f, rho, default_rho_tol(rho)).measure.to_distribution(), phi_real);
    if (s.value() < -c.tol * s.scale) slack_ok = false;
    worst = std::min(worst, s.value() / std::max(s.scale, std::numeric_limits<double>::min()));
    r.table.rows.push_back({rho, rep.G_values[i], rep.G_prime[i], rep.G_second_fd[i], s.value()});
  }
  const bool sd_ok = rep.min_second_difference >= -c.tol * rep.scale;
  const bool shape_ok = shape_consistent(rep.classification, rep.second_differences, rep.scale, c.tol);
  const bool ok = slack_ok && sd_ok && shape_ok && rep.classification != Shape::indeterminate;
  r.summary = {{"rate", f.name()},
               {"classification", std::string(to_string(rep.classification))},
               {"strict_points", static_cast<std::int64_t>(rep.strict_points.size())},
               {"min_second_difference", rep.min_second_difference},
               {"max_abs_second_difference", rep.max_abs_second_difference},
               {"min_relative_slack", worst},
               {"scale", rep.scale},
               {"check", std::string(ok ? "pass" : "fail")}};
  r.exit_code = ok ? kExitOk : kExitViolation;
  return r;
}

CommandResult cmd_nu(const RunConfig& c) {
  const RateFunction f = make_rate(c);
  const auto grid = make_rho_grid(c, f);
  CommandResult r;
  r.command = "nu";
  r.table.columns = {"rho", "y", "nu", "mu"};
  double worst_norm = 0.0;
  bool ok = true;
  for (double rho : grid) {
    const NuMeasure nu = nu_measure(f, rho);
    const auto mu = theta_of_rho(f, rho, default_rho_tol(rho)).measure;
    worst_norm = std::max(worst_norm, nu.normalization_error);
    for (std::int64_t y = nu.y_lo; y <= nu.y_hi(); ++y) {
      if (nu.prob(y) < 0.0) ok = false;
      r.table.rows.push_back({rho, y, nu.prob(y), mu.prob(y)});
    }
  }
  std::string verdict = "not-tested";
  double margin = std::numeric_limits<double>::quiet_NaN();
  if (grid.size() >= 2) {
    try {
      const auto m = stochastic_monotonicity_check(f, grid);
      margin = m.min_margin;
      verdict = "monotone";
    } catch (const MonotonicityViolationError&) {
      verdict = "violated";
      ok = false;
    }
  }
  r.summary = {{"rate", f.name()},
               {"monotonicity", verdict},
               {"min_margin", margin},
               {"max_normalization_error", worst_norm},
               {"check", std::string(ok ? "pass" : "fail")}};
  r.exit_code = ok ? kExitOk : kExitViolation;
  return r;
}

CommandResult cmd_verify(const RunConfig& c) {
  if (c.instances < 1) throw ConfigError("--instances must be positive");
  CommandResult r;
  r.command = "verify";
  r.table.columns = {"index", "seed", "slack_2_3", "slack_2_4", "slack_2_5", "line_2_8",
                     "line_2_9", "line_2_10", "line_2_11", "chain"};
  std::mt19937_64 rng(c.seed);
  const RealFn sq = [](double x) { return x * x; };
  int violations = 0;
  double min_rel = std::numeric_limits<double>::infinity();
  double min_line = std::numeric_limits<double>::infinity();
  auto rel = [](const Slack& s) { return s.value() / std::max(s.scale, std::numeric_limits<double>::min()); };

  for (int i = 0; i < c.instances; ++i) {
    const std::uint64_t seed = instance_seed(c.seed, static_cast<std::uint64_t>(i));
    std::vector<Cell> row{static_cast<std::int64_t>(i), std::to_string(seed)};
    bool ok = true;
    std::string chain = "-";
    InequalitySlacks s;
    if (c.verify_mode == "random") {
      const auto inst = random_instance(seed);
      const auto j = attainable_interval(inst.rate);
      std::uniform_real_distribution<double> pick(j.lower + 0.1 * j.width(), j.upper - 0.1 * j.width());
      const double rho = pick(rng);
      const auto m = theta_of_rho(inst.rate, rho, default_rho_tol(rho)).measure;
      s = inequality_slacks(m, inst.phi());
      try {
        const IntFn phi = inst.phi();
        verify_reduction_chain(m.to_distribution(),
                               [phi](double x) { return phi(static_cast<std::int64_t>(std::llround(x))); });
        chain = "ok";
      } catch (const ChainMismatchError&) {
        chain = "mismatch";
        ok = false;
      }
    } else if (c.verify_mode == "positive") {
      std::mt19937_64 g(seed);
      std::uniform_int_distribution<int> size(2, 12), start(0, 3);
      const std::int64_t lo = start(g);
      const Distribution d = random_lattice_distribution(g, lo, lo + size(g) - 1);
      s = inequality_slacks(d, sq);
      if (s.split.terms[1] != 0.0 || s.split.terms[2] != 0.0 || s.split.terms[3] != 0.0) ok = false;
    } else if (c.verify_mode == "kinks") {
      const auto k = random_kink_instance(seed);
      s = inequality_slacks(k.distribution.shifted(-k.x0), kink_function(k.c, k.a, k.b, 0.0));
      if (!(s.absolute.value() > 1e-12 * s.absolute.scale)) ok = false;
    } else {
      throw ConfigError("unknown --mode '" + c.verify_mode + "' (random, positive, kinks)");
    }
    for (const Slack* sl : {&s.curvature, &s.square, &s.absolute}) {
      if (sl->value() < -1e-10 * sl->scale) ok = false;
      min_rel = std::min(min_rel, rel(*sl));
    }
    for (int k = 0; k < 4; ++k) {
      if (s.split.terms[k] < -1e-12 * s.split.scales[k]) ok = false;
      min_line = std::min(min_line, s.split.terms[k] / std::max(s.split.scales[k], std::numeric_limits<double>::min()));
    }
    if (!ok) ++violations;
    row.insert(row.end(), {s.curvature.value(), s.square.value(), s.absolute.value(), s.split.terms[0],
                           s.split.terms[1], s.split.terms[2], s.split.terms[3], chain});
    r.table.rows.push_back(std::move(row));
  }
  r.summary = {{"mode", c.verify_mode},
               {"instances", static_cast<std::int64_t>(c.instances)},
               {"violations", static_cast<std::int64_t>(violations)},
               {"min_relative_slack", min_rel},
               {"min_relative_line", min_line},
               {"check", std::string(violations == 0 ? "pass" : "fail")}};
  r.exit_code = violations == 0 ? kExitOk : kExitViolation;
  return r;
}

CommandResult cmd_simulate(const RunConfig& c) {
  const RateFunction f = make_rate(c);
  ExperimentConfig e;
  e.rho = c.rho;
  e.V = c.V;
  e.t_grid = c.t_grid;
  e.L = c.L;
  e.replicas = c.replicas;
  e.seed = c.seed;
  e.bootstrap = c.bootstrap;
  const ExperimentStats s = current_variance_experiment(f, e);
  CommandResult r;
  r.command = "simulate";
  r.table.columns = {"t",           "observer",           "mean_J", "var_J",        "var_J_stderr",
                     "mean_absdev_Q", "mean_absdev_Q_stderr", "mean_Q", "ratio", "ratio_stderr"};
  for (std::size_t i = 0; i < s.t_grid.size(); ++i) {
    r.table.rows.push_back({s.t_grid[i], s.observer[i], s.mean_J[i], s.var_J[i], s.var_J_stderr[i],
                            s.mean_absdev_Q[i], s.mean_absdev_Q_stderr[i], s.mean_Q[i], s.ratio[i],
                            s.ratio_stderr[i]});
  }
  r.summary = {{"rate", f.name()},
               {"rho", s.rho},
               {"V", s.V},
               {"L", s.L},
               {"replicas", static_cast<std::int64_t>(s.replicas)},
               {"mean_ratio", s.mean_ratio},
               {"ratio_spread", s.ratio_spread},
               {"marginal_variance", s.marginal_variance}};
  return r;
}

void write_csv(const CommandResult& r, std::ostream& os) {
  for (const auto& [k, v] : r.summary) os << "# " << k << "=" << cell_text(v) << "\n";
  for (std::size_t i = 0; i < r.table.columns.size(); ++i) os << (i ? "," : "") << r.table.columns[i];
  os << "\n";
  for (const auto& row : r.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << "\n";
  }
}

void write_json(const CommandResult& r, std::ostream& os) {
  ojson j;
  j["command"] = r.command;
  ojson summary = ojson::object();
  for (const auto& [k, v] : r.summary) summary[k] = cell_json(v);
  j["summary"] = summary;
  j["columns"] = r.table.columns;
  ojson rows = ojson::array();
  for (const auto& row : r.table.rows) {
    ojson jr = ojson::array();
    for (const auto& cell : row) jr.push_back(cell_json(cell));
    rows.push_back(jr);
  }
  j["rows"] = rows;
  os << j.dump(2) << "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tiltflux: tilted measures, flux convexity and zero-range simulation"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* sub, bool with_phi, bool with_grid) {
    sub->add_option("--rate", c.rate, "zrp-constant | zrp-linear | zrp-power:P | blp-exp:BETA | uniform:A:B");
    sub->add_option("--rate-file", c.rate_file, "rate table (CSV x,f(x) or JSON {x: f(x)})");
    sub->add_option("--rate-kind", c.rate_kind, "kind of a --rate-file table: zrp | blp | generic");
    sub->add_option("--weights-file", c.weights_file, "table of weights 1/f(x)!");
    if (with_phi) {
      sub->add_option("--phi", c.phi, "x2 | identity | rate | abs:X0 | kink:A:B:X0");
      sub->add_option("--phi-file", c.phi_file, "phi table (CSV or JSON)");
    }
    if (with_grid) {
      sub->add_option("--rho-min", c.rho_min);
      sub->add_option("--rho-max", c.rho_max);
      sub->add_option("--rho-steps", c.rho_steps);
    }
    sub->add_option("--seed", c.seed);
    sub->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out, "output path (default stdout)");
    sub->add_option("--tol", c.tol, "relative tolerance for shape checks")->check(CLI::PositiveNumber);
  };

  auto* flux_cmd = app.add_subcommand("flux", "hydrodynamic flux table and shape");
  common(flux_cmd, false, true);
  auto* conv_cmd = app.add_subcommand("convexity", "profile of rho -> E Phi(X) and its shape");
  common(conv_cmd, true, true);
  auto* nu_cmd = app.add_subcommand("nu", "nu tables and their stochastic monotonicity");
  common(nu_cmd, false, true);
  auto* verify_cmd = app.add_subcommand("verify", "randomized correlation-inequality suite");
  common(verify_cmd, false, false);
  verify_cmd->add_option("--instances", c.instances);
  verify_cmd->add_option("--mode", c.verify_mode)->check(CLI::IsMember({"random", "positive", "kinks"}));
  auto* sim_cmd = app.add_subcommand("simulate", "current variance versus second-class deviation");
  common(sim_cmd, false, false);
  sim_cmd->add_option("--rho", c.rho);
  sim_cmd->add_option("--L", c.L);
  sim_cmd->add_option("--V", c.V);
  sim_cmd->add_option("--replicas", c.replicas);
  sim_cmd->add_option("--t", c.t_grid, "checkpoint times")->delimiter(',');
  sim_cmd->add_option("--bootstrap", c.bootstrap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CommandResult result;
  try {
    if (*flux_cmd) result = cmd_flux(c);
    if (*conv_cmd) result = cmd_convexity(c);
    if (*nu_cmd) result = cmd_nu(c);
    if (*verify_cmd) result = cmd_verify(c);
    if (*sim_cmd) result = cmd_simulate(c);
  } catch (const MonotonicityViolationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const ChainMismatchError& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const TruncationTooCoarseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::ofstream file;
  std::ostream* os = &out;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) {
      err << "error: cannot write " << c.out << "\n";
      return kExitConfig;
    }
    os = &file;
  }
  if (c.format == "json") {
    write_json(result, *os);
  } else {
    write_csv(result, *os);
  }
  if (result.exit_code != kExitOk) err << result.command << ": property check failed\n";
  return result.exit_code;
}

}  // namespace tiltflux::cli
