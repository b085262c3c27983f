#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tiltflux/cli.hpp"
#include "tiltflux/errors.hpp"

using namespace tiltflux;
using namespace tiltflux::cli;

namespace {

double num(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  return static_cast<double>(std::get<std::int64_t>(c));
}

std::string text(const Cell& c) { return std::get<std::string>(c); }

const Cell& summary(const CommandResult& r, const std::string& key) {
  for (const auto& [k, v] : r.summary) {
    if (k == key) return v;
  }
  throw std::runtime_error("missing summary key " + key);
}

RunConfig grid_config(const std::string& rate, double lo, double hi, int steps) {
  RunConfig c;
  c.rate = rate;
  c.rho_min = lo;
  c.rho_max = hi;
  c.rho_steps = steps;
  return c;
}

int run_args(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "tiltflux");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto p = std::filesystem::temp_directory_path() / ("tiltflux_cli_test_" + name);
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST(CmdFlux, ConstantRateConcaveIncreasing) {
  const auto r = cmd_flux(grid_config("zrp-constant", 0.2, 4.0, 9));
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(text(summary(r, "classification")), "strictly_concave");
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const double rho = num(r.table.rows[i][0]);
    EXPECT_NEAR(num(r.table.rows[i][1]), rho / (1 + rho), 1e-12);
    if (i > 0) EXPECT_GT(num(r.table.rows[i][1]), num(r.table.rows[i - 1][1]));
  }
}

TEST(CmdFlux, LinearRateEqualsDensity) {
  const auto r = cmd_flux(grid_config("zrp-linear", 0.1, 10.0, 12));
  EXPECT_EQ(r.exit_code, kExitOk);
  for (const auto& row : r.table.rows) EXPECT_NEAR(num(row[1]), num(row[0]), 1e-8);
  EXPECT_EQ(text(summary(r, "classification")), "linear");
}

TEST(CmdFlux, UnitBlpIsLinear) {
  RunConfig c;
  c.rate = "blp-exp:0";
  const auto r = cmd_flux(c);
  EXPECT_EQ(text(summary(r, "classification")), "linear");
  for (const auto& row : r.table.rows) EXPECT_EQ(num(row[1]), 2.0);
}

TEST(CmdConvexity, Fixtures) {
  RunConfig two;
  two.rate = "uniform:0:1";
  EXPECT_EQ(text(summary(cmd_convexity(two), "classification")), "linear");

  auto three = grid_config("uniform:-1:1", -0.5, 0.5, 11);
  const auto r = cmd_convexity(three);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(text(summary(r, "classification")), "strictly_convex");
  EXPECT_NEAR(num(r.table.rows[5][0]), 0.0, 1e-15);
  EXPECT_NEAR(num(r.table.rows[5][1]), 2.0 / 3.0, 1e-14);
  for (const auto& row : r.table.rows) EXPECT_GE(num(row[4]), 0.0);
  EXPECT_EQ(r.table.columns, (std::vector<std::string>{"rho", "G", "G_prime", "G_second_fd", "slack_2_3"}));
}

TEST(CmdConvexity, ConcavePhiIsAViolation) {
  auto c = grid_config("uniform:-2:2", -1.0, 1.0, 9);
  c.phi = "kink:1:2:0";
  EXPECT_EQ(cmd_convexity(c).exit_code, kExitViolation);
  EXPECT_EQ(run_args({"convexity", "--rate", "uniform:-2:2", "--phi", "kink:1:2:0"}), kExitViolation);
}

TEST(CmdNu, TwoPointAndPoisson) {
  const auto two = cmd_nu(grid_config("uniform:0:1", 0.2, 0.8, 4));
  EXPECT_EQ(two.exit_code, kExitOk);
  for (const auto& row : two.table.rows) {
    EXPECT_EQ(num(row[1]), 0.0);
    EXPECT_NEAR(num(row[2]), 1.0, 1e-14);
  }
  const auto pois = cmd_nu(grid_config("zrp-linear", 0.5, 5.0, 5));
  EXPECT_EQ(pois.exit_code, kExitOk);
  for (const auto& row : pois.table.rows) EXPECT_NEAR(num(row[2]), num(row[3]), 1e-9);
  const auto geo = cmd_nu(grid_config("zrp-constant", 0.2, 6.0, 21));
  EXPECT_EQ(text(summary(geo, "monotonicity")), "monotone");
  EXPECT_GE(num(summary(geo, "min_margin")), -1e-10);
}

TEST(CmdVerify, RandomSuiteIsClean) {
  RunConfig c;
  c.instances = 1000;
  c.seed = 99;
  const auto r = cmd_verify(c);
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(num(summary(r, "violations")), 0.0);
  EXPECT_GE(num(summary(r, "min_relative_slack")), -1e-10);
}

TEST(CmdVerify, PositiveSupportZeroesLines) {
  RunConfig c;
  c.instances = 200;
  c.verify_mode = "positive";
  const auto r = cmd_verify(c);
  EXPECT_EQ(r.exit_code, kExitOk);
  for (const auto& row : r.table.rows) {
    EXPECT_EQ(num(row[6]), 0.0);
    EXPECT_EQ(num(row[7]), 0.0);
    EXPECT_EQ(num(row[8]), 0.0);
  }
}

TEST(CmdVerify, KinksGiveStrictSlack) {
  RunConfig c;
  c.instances = 200;
  c.verify_mode = "kinks";
  const auto r = cmd_verify(c);
  EXPECT_EQ(r.exit_code, kExitOk);
  for (const auto& row : r.table.rows) EXPECT_GT(num(row[4]), 0.0);
}

TEST(CmdVerify, Deterministic) {
  RunConfig c;
  c.instances = 30;
  c.seed = 5;
  std::ostringstream a, b;
  write_csv(cmd_verify(c), a);
  write_csv(cmd_verify(c), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(CmdSimulate, ZeroCheckpoint) {
  RunConfig c;
  c.rate = "zrp-linear";
  c.t_grid = {0.0};
  c.L = 16;
  c.replicas = 100;
  c.bootstrap = 10;
  const auto r = cmd_simulate(c);
  EXPECT_EQ(num(r.table.rows[0][3]), 0.0);
  EXPECT_EQ(num(r.table.rows[0][5]), 0.0);
}

TEST(CmdSimulate, BadGeometryExitsWithConfigCode) {
  std::string err;
  EXPECT_EQ(run_args({"simulate", "--rate", "zrp-linear", "--t", "10,20", "--L", "20", "--replicas", "100"}, nullptr,
                     &err),
            kExitConfig);
  EXPECT_NE(err.find("too small"), std::string::npos);
}

TEST(Run, ConfigErrors) {
  EXPECT_EQ(run_args({}), kExitConfig);
  EXPECT_EQ(run_args({"flux", "--rate", "bogus"}), kExitConfig);
  EXPECT_EQ(run_args({"flux"}), kExitConfig);
  EXPECT_EQ(run_args({"flux", "--rate", "zrp-linear"}), kExitConfig);  // unbounded J needs a grid
  EXPECT_EQ(run_args({"flux", "--rate", "zrp-linear", "--rho-min", "-1", "--rho-max", "1"}), kExitConfig);
  EXPECT_EQ(run_args({"flux", "--rate", "zrp-linear", "--format", "xml"}), kExitConfig);
  EXPECT_EQ(run_args({"--help"}), kExitOk);
}

TEST(Run, JsonAndCsvCarryTheSameNumbers) {
  std::string csv, json;
  const std::vector<std::string> base{"convexity", "--rate", "uniform:-1:2", "--phi", "abs:0", "--rho-steps", "7"};
  auto with = [&](const std::string& f) {
    auto a = base;
    a.push_back("--format");
    a.push_back(f);
    return a;
  };
  ASSERT_EQ(run_args(with("csv"), &csv), kExitOk);
  ASSERT_EQ(run_args(with("json"), &json), kExitOk);
  const auto j = nlohmann::json::parse(json);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  ASSERT_EQ(rows.size(), j["rows"].size() + 1);
  for (std::size_t i = 0; i < j["rows"].size(); ++i) {
    for (std::size_t k = 0; k < j["rows"][i].size(); ++k) {
      const auto& v = j["rows"][i][k];
      if (v.is_null()) {
        EXPECT_EQ(rows[i + 1][k], "nan");
      } else {
        EXPECT_EQ(std::stod(rows[i + 1][k]), v.get<double>());
      }
    }
  }
}

TEST(Run, WritesToFile) {
  const auto p = std::filesystem::temp_directory_path() / "tiltflux_cli_test_out.csv";
  ASSERT_EQ(run_args({"flux", "--rate", "zrp-constant", "--out", p.string()}), kExitOk);
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  EXPECT_NE(s.str().find("rho,H,H_prime,classification"), std::string::npos);
}

TEST(TableFiles, CsvJsonAndGaps) {
  const auto csv = temp_file("rate.csv", "x,f\n0,0\n1,1\n2,2\n3,3\n");
  const auto t = read_table_file(csv.string());
  EXPECT_EQ(t.size(), 4u);
  EXPECT_EQ(t.at(3), 3.0);
  const auto js = temp_file("rate.json", R"({"-1": 0.5, "0": 1, "1": 2})");
  EXPECT_EQ(read_table_file(js.string()).at(-1), 0.5);
  EXPECT_THROW(read_table_file(temp_file("gap.csv", "0,1\n2,3\n").string()), ConfigError);
  EXPECT_THROW(read_table_file(temp_file("gap.json", R"({"0": 1, "2": 3})").string()), ConfigError);
  EXPECT_THROW(read_table_file(temp_file("bad.csv", "0,1,2\n").string()), ConfigError);
  EXPECT_THROW(read_table_file("/nonexistent/table.csv"), ConfigError);

  RunConfig c;
  c.rate_file = csv.string();
  c.rate_kind = "zrp";
  const auto r = cmd_flux(c);
  EXPECT_EQ(text(summary(r, "classification")), "linear");

  RunConfig w;
  w.weights_file = temp_file("weights.csv", "-1,1\n0,1\n1,1\n").string();
  w.phi_file = temp_file("phi.json", R"({"-1": 1, "0": 0, "1": 1})").string();
  const auto conv = cmd_convexity(w);
  EXPECT_EQ(text(summary(conv, "classification")), "strictly_convex");
}
