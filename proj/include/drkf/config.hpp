#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "drkf/sim.hpp"

namespace drkf {

/// Parses a scenario document (JSON). The schema mirrors Scenario; unknown
/// keys are rejected with their path, matrices are nested numeric arrays,
/// and the time-varying pieces of the built-in dynamics are available as
/// named generators ("example1"). The parsed scenario passes
/// validate_scenario before it is returned.
Scenario load_scenario_json_text(const std::string& text);
Scenario load_scenario_file(const std::string& path);

/// Command-line overrides applied on top of a preset or file scenario.
struct ScenarioOverrides {
  std::optional<std::string> filter;
  std::optional<int> window;    // L
  std::optional<int> interval;  // Delta, broadcast to all sensors
  std::optional<int> runs;
  std::optional<int> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<ChannelMode> channel_mode;
};

Scenario apply_overrides(Scenario scenario, const ScenarioOverrides& ov);

}  // namespace drkf
