#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rmab/environment.hpp"
#include "rmab/lemp.hpp"

namespace rmab {

inline constexpr int kScenarioSchemaVersion = 1;

enum class ConstantsMode { Oracle, Bounds };

/// Learner configuration shared by the epoch-scheduled policies.
struct PolicyConfig {
  ConstantsMode constants_mode = ConstantsMode::Oracle;
  std::optional<double> epsilon;  ///< default delta / 4
  std::optional<double> delta;    ///< required in bounds mode; oracle default is the true value
  ConstantBounds bounds;
  ConstantOverrides overrides;
  std::uint64_t sb1_watchdog_cap = kDefaultWatchdogCap;
};

struct Scenario {
  std::string name;
  std::string description;
  BanditModel model;
  std::uint64_t horizon = 1;
  std::string policy = "lemp";
  PolicyConfig config;
  std::size_t seeds = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> grid;  ///< empty: default log-spaced grid
  std::size_t grid_points = 50;
  std::uint64_t grid_start = 100;
};

/// Throws ValidationError: horizon >= 1, seeds >= 1, grid sorted in [1, T],
/// known policy name, valid model.
void validate_scenario(const Scenario& sc);

/// `points` log-spaced integers over [start, horizon], deduplicated, always
/// ending at the horizon.  Falls back to [1, horizon] when start > horizon.
std::vector<std::uint64_t> log_spaced_grid(std::uint64_t start, std::uint64_t horizon, std::size_t points);

/// The scenario's explicit grid or the default one.
std::vector<std::uint64_t> effective_grid(const Scenario& sc);

/// Constants for the epoch-scheduled policies, resolved per the scenario mode.
ConstantsBundle resolve_constants(const Scenario& sc, const ModelSummary& summary);

nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

ConstantsMode parse_constants_mode(const std::string& text);
std::string to_string(ConstantsMode mode);

/// Two-state Gilbert-Elliott primary-user chain (0 = vacant, 1 = busy) with
/// three FSMC channels whose best arm differs between the two states.
Scenario preset_gilbert_elliott_fsmc();

/// Known preset names, for the CLI.
std::vector<std::string> preset_names();
Scenario preset_by_name(const std::string& name);

}  // namespace rmab
