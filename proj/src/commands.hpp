#pragma once

#include <optional>

#include <json.hpp>

#include "config.hpp"
#include "output.hpp"

namespace risnet::app {

struct RunOptions {
  int threads = 1;
  bool fd_check = false;
};

// Either a table (CSV) or a report (JSON). Point failures are recorded in-row;
// `failures` counts them and drives the exit code.
struct CommandResult {
  std::optional<Table> table;
  std::optional<nlohmann::json> report;
  int failures = 0;
};

CommandResult cmd_coverage(const ScenarioConfig& c, const RunOptions& o);
CommandResult cmd_rate(const ScenarioConfig& c, const RunOptions& o);
CommandResult cmd_sensitivity(const ScenarioConfig& c, const RunOptions& o);
CommandResult cmd_plan(const ScenarioConfig& c, const RunOptions& o);
CommandResult cmd_simulate(const ScenarioConfig& c, const RunOptions& o);
CommandResult cmd_validate(const ScenarioConfig& c, const RunOptions& o);

}  // namespace risnet::app
