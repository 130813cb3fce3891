#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

using namespace risnet;
using namespace risnet::app;
using nlohmann::json;

namespace {

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

int column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

TEST(Config, DefaultsMatchLibraryDefaults) {
  auto c = parse_config(json::object());
  auto p = reconstructed_defaults();
  EXPECT_EQ(c.system.lambda_bs, p.lambda_bs);
  EXPECT_EQ(c.system.lambda_ris, p.lambda_ris);
  EXPECT_EQ(c.cost.cost_ratio_j(), 10.0);
}

TEST(Config, HumanUnitsAreConverted) {
  auto c = parse_config(json::parse(R"({
    "system": {"lambda_bs_per_km2": 15, "ris_per_ring": 3, "p0_dbm": 20, "noise_dbm": -90,
               "carrier_ghz": 3.5, "rician_k": 5, "penalty_k_db": 3, "scenario": "coverage_hole"},
    "cost": {"cost_ratio_j": 5, "budget_bs_per_km2": 1},
    "sweep": {"thresholds_db": [0, 10]}
  })"));
  EXPECT_NEAR(c.system.lambda_bs, 15e-6, 1e-18);
  EXPECT_NEAR(c.system.lambda_ris * c.system.ring_area(), 3.0, 1e-12);
  EXPECT_NEAR(c.system.p0, 0.1, 1e-15);
  EXPECT_NEAR(c.system.noise_power, 1e-12, 1e-24);
  EXPECT_NEAR(c.system.beta, beta_from_carrier(3.5e9), 1e-18);
  EXPECT_NEAR(c.system.zeta_mean, rician_product_moments(5, 5).mean, 1e-15);
  EXPECT_NEAR(c.system.penalty_k, db_to_linear(3), 1e-15);
  EXPECT_EQ(c.system.scenario, Scenario::CoverageHole);
  EXPECT_EQ(c.cost.cost_ratio_j(), 5.0);
  ASSERT_EQ(c.sweep.thresholds.size(), 2u);
  EXPECT_NEAR(c.sweep.thresholds[1], 10.0, 1e-12);
}

TEST(Config, RoundTripIsLossless) {
  auto c = parse_config(json::parse(R"({
    "system": {"lambda_bs_per_km2": 7, "ris_per_ring": 2.5, "carrier_ghz": 60, "penalty_k_db": 2},
    "cost": {"c_bs_total": 12, "c_ris_total": 1.5},
    "mc": {"n_samples": 1234, "seed": 99, "overlap_p": 0.01},
    "plan": {"n_rounds": 4, "stagnation": "force_ris", "ris_gain_convention": "ring_scaled"},
    "guard_convention": "conditional"
  })"));
  auto d = parse_config(to_json(c));
  EXPECT_EQ(to_json(c), to_json(d));
  EXPECT_EQ(d.system.lambda_bs, c.system.lambda_bs);
  EXPECT_EQ(d.system.lambda_ris, c.system.lambda_ris);
  EXPECT_EQ(d.system.beta, c.system.beta);
  EXPECT_EQ(d.mc.seed, 99u);
  EXPECT_EQ(d.plan.ris_gain, RisGainConvention::RingScaled);
  EXPECT_EQ(d.guard, GuardConvention::Conditional);
}

TEST(Config, ErrorsNameTheField) {
  auto msg = [](const char* text) {
    try {
      parse_config(json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg(R"({"system": {"lamda_bs_per_km2": 3}})").find("system.lamda_bs_per_km2"), std::string::npos);
  EXPECT_NE(msg(R"({"sytem": {}})").find("config.sytem"), std::string::npos);
  EXPECT_NE(msg(R"({"system": {"alpha": "four"}})").find("system.alpha"), std::string::npos);
  EXPECT_NE(msg(R"({"system": {"alpha": 2}})").find("alpha"), std::string::npos);
  EXPECT_NE(msg(R"({"system": {"p0_dbm": 30, "p0_w": 1}})").find("only one"), std::string::npos);
  EXPECT_NE(msg(R"({"cost": {"cost_ratio_j": 0.5}})").find("cost"), std::string::npos);
  EXPECT_NE(msg(R"({"system": {"scenario": "indoor"}})").find("throughput"), std::string::npos);
  // annotations are allowed anywhere
  EXPECT_EQ(msg(R"({"_comment": "x", "system": {"_note": 1}})"), "");
}

TEST(Config, ParseErrorReportsLine) {
  auto path = std::filesystem::temp_directory_path() / "risnet_bad_config.json";
  {
    std::ofstream f(path);
    f << "{\n  \"system\": {\n    \"alpha\": 4,,\n  }\n}\n";
  }
  try {
    load_config(path.string());
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Config, ExampleConfigsLoad) {
  for (const auto& entry : std::filesystem::directory_iterator(RISNET_EXAMPLES_DIR))
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
}

TEST(Commands, CoverageTable) {
  ScenarioConfig c;
  c.sweep.thresholds = {0.0, 1.0, 10.0};
  c.sweep.distances_m = {60.0, 150.0};
  auto r = cmd_coverage(c, {2, false});
  ASSERT_TRUE(r.table);
  EXPECT_EQ(r.failures, 0);
  ASSERT_EQ(r.table->rows.size(), 6u);
  int cov = column(*r.table, "coverage");
  EXPECT_NEAR(std::stod(r.table->rows[0][cov]), 1.0, 1e-7);
  EXPECT_NEAR(std::stod(r.table->rows[1][cov]), coverage_probability(1.0, 60.0, c.system), 1e-9);
  EXPECT_EQ(r.table->rows[0][column(*r.table, "status")], "ok");
}

TEST(Commands, EmptyGridGivesHeaderOnly) {
  ScenarioConfig c;
  auto r = cmd_coverage(c, {});
  EXPECT_EQ(csv(*r.table), "threshold,threshold_db,distance_m,serve_dist_m,coverage,status\n");
  c.sweep.lambda_bs_per_km2.clear();
  EXPECT_EQ(cmd_rate(c, {}).table->rows.size(), 0u);
}

TEST(Commands, PointFailuresStayInTheirRow) {
  ScenarioConfig c;
  c.sweep.thresholds = {1.0, -1.0};
  c.sweep.distances_m = {60.0};
  auto r = cmd_coverage(c, {});
  EXPECT_EQ(r.failures, 1);
  int st = column(*r.table, "status");
  EXPECT_EQ(r.table->rows[0][st], "ok");
  EXPECT_EQ(r.table->rows[1][st].rfind("error:", 0), 0u);
}

TEST(Commands, CoverageHoleRateAndPlan) {
  ScenarioConfig c;
  c.system.scenario = Scenario::CoverageHole;
  c.system.penalty_k = db_to_linear(3.0);
  c.sweep.lambda_bs_per_km2 = {10.0};
  c.sweep.ris_per_ring = {2.0};
  auto rate = cmd_rate(c, {});
  ASSERT_EQ(rate.table->rows.size(), 1u);
  EXPECT_EQ(rate.table->rows[0][column(*rate.table, "scenario")], "coverage_hole");
  c.plan.n_rounds = 1;
  auto plan = cmd_plan(c, {});
  EXPECT_EQ(plan.failures, 0);
  ASSERT_EQ(plan.table->rows.size(), 2u);
  const auto& row0 = plan.table->rows[0];
  EXPECT_TRUE(row0[column(*plan.table, "decision")] == "BS" || row0[column(*plan.table, "decision")] == "RIS");
  EXPECT_EQ(row0[column(*plan.table, "spend")], row0[column(*plan.table, "budget")]);
  EXPECT_EQ(plan.table->rows[1][column(*plan.table, "status")], "final");
}

TEST(Commands, SimulateIsSeeded) {
  ScenarioConfig c;
  c.sweep.lambda_bs_per_km2 = {10.0};
  c.mc.n_samples = 2000;
  c.mc.seed = 5;
  auto a = cmd_simulate(c, {});
  auto b = cmd_simulate(c, {2, false});
  EXPECT_EQ(csv(*a.table), csv(*b.table));
}

TEST(Output, CsvQuotingAndNumbers) {
  Table t;
  t.columns = {"a", "b"};
  t.add({"x,y", fmt(0.1)});
  t.add({"say \"hi\"", fmt(std::numeric_limits<double>::quiet_NaN())});
  EXPECT_EQ(csv(t), "a,b\n\"x,y\",0.1\n\"say \"\"hi\"\"\",nan\n");
}
