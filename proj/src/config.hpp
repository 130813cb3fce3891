#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "risnet/risnet.hpp"

namespace risnet::app {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct McConfig {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  double window_radius = 0.0;  // m, 0 = automatic
  int threads = 1;
  double overlap_p = 0.0;      // 0 = cross-cluster reflections neglected
  double beamwidth_deg = 3.6;
  mc::BeamModel beam = mc::BeamModel::Gaussian;
};

struct Sweep {
  // rate / sensitivity / simulate / validate grid
  std::vector<double> lambda_bs_per_km2{3, 5, 8, 10, 12, 15, 20, 25, 30, 40};
  std::vector<double> ris_per_ring;        // one curve per entry; empty = system value
  std::vector<double> thresholds;          // linear SINR thresholds
  std::vector<double> distances_m;
  std::vector<double> penalty_k_db;        // coverage-hole grid; empty = system value
};

struct PlanConfig {
  int n_rounds = 10;
  double initial_lambda_bs_per_km2 = 1.0;
  double initial_ris_per_ring = 0.0;
  StagnationPolicy stagnation = StagnationPolicy::Stop;
  RisGainConvention ris_gain = RisGainConvention::PerRisCount;
};

struct ValidateConfig {
  double threshold = 1.0;    // coverage threshold (linear)
  double distance_m = 60.0;  // conditioned serving distance for coverage
  double coverage_tol = 0.02;
  double rate_rel_tol = 0.02;
};

// Everything a command needs. Internal values are SI (W, m, per m^2); human
// units (dBm, dB, GHz, per km^2, RIS per ring) are accepted at ingestion.
struct ScenarioConfig {
  SystemParams system = reconstructed_defaults();
  CostModel cost{};
  QuadratureConfig quadrature{};
  GuardConvention guard = GuardConvention::Literal;
  McConfig mc{};
  Sweep sweep{};
  PlanConfig plan{};
  ValidateConfig validate{};
  bool fd_check = false;
};

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
// Canonical form in SI keys; parse_config(to_json(c)) reproduces c exactly.
nlohmann::json to_json(const ScenarioConfig& c);

std::string to_string(Scenario s);
std::string to_string(GuardConvention g);

}  // namespace risnet::app
