#include "rmab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "rmab/errors.hpp"

namespace rmab {

using nlohmann::json;

namespace {

const std::set<std::string> kPolicyNames = {"lemp", "dsee", "best-average", "genie", "uniform-random"};

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw ValidationError(fmt::format("{}: unknown key '{}'", where, item.key()));
    }
  }
}

template <typename T>
T get_as(const json& j, const char* key, const char* where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: field '{}': {}", where, key, e.what()));
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key, const char* where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_as<T>(j, key, where);
}

TransitionMatrix matrix_from_json(const json& j, const std::string& where) {
  std::vector<std::vector<double>> rows;
  try {
    rows = j.get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("{}: transition matrix must be an array of numeric rows ({})", where, e.what()));
  }
  try {
    return TransitionMatrix(rows);
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", where, e.what()));
  }
}

}  // namespace

ConstantsMode parse_constants_mode(const std::string& text) {
  if (text == "oracle") return ConstantsMode::Oracle;
  if (text == "bounds") return ConstantsMode::Bounds;
  throw ValidationError(fmt::format("constants_mode must be 'oracle' or 'bounds', got '{}'", text));
}

std::string to_string(ConstantsMode mode) { return mode == ConstantsMode::Oracle ? "oracle" : "bounds"; }

std::vector<std::uint64_t> log_spaced_grid(std::uint64_t start, std::uint64_t horizon, std::size_t points) {
  if (horizon == 0) return {};
  if (start == 0 || start > horizon) start = 1;
  if (points < 2) return {horizon};
  std::vector<std::uint64_t> grid;
  const double lo = std::log(static_cast<double>(start));
  const double hi = std::log(static_cast<double>(horizon));
  for (std::size_t k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    auto t = static_cast<std::uint64_t>(std::llround(std::exp(x)));
    t = std::clamp<std::uint64_t>(t, start, horizon);
    if (grid.empty() || t > grid.back()) grid.push_back(t);
  }
  if (grid.back() != horizon) grid.push_back(horizon);
  return grid;
}

std::vector<std::uint64_t> effective_grid(const Scenario& sc) {
  if (!sc.grid.empty()) return sc.grid;
  return log_spaced_grid(sc.grid_start, sc.horizon, sc.grid_points);
}

void validate_scenario(const Scenario& sc) {
  validate_model(sc.model);
  if (sc.horizon < 1) throw ValidationError("horizon must be at least 1");
  if (sc.seeds < 1) throw ValidationError("at least one seed is required");
  if (!kPolicyNames.contains(sc.policy)) throw ValidationError(fmt::format("unknown policy '{}'", sc.policy));
  for (std::size_t k = 0; k < sc.grid.size(); ++k) {
    if (sc.grid[k] < 1 || sc.grid[k] > sc.horizon) {
      throw ValidationError(fmt::format("logging grid point {} outside [1, {}]", sc.grid[k], sc.horizon));
    }
    if (k > 0 && sc.grid[k] <= sc.grid[k - 1]) throw ValidationError("logging grid must be strictly increasing");
  }
  if (sc.config.sb1_watchdog_cap == 0) throw ValidationError("sb1_watchdog_cap must be positive");
}

ConstantsBundle resolve_constants(const Scenario& sc, const ModelSummary& summary) {
  const auto& cfg = sc.config;
  if (cfg.constants_mode == ConstantsMode::Oracle) {
    return oracle_constants(sc.model, summary, cfg.epsilon);
  }
  if (!cfg.delta) throw ValidationError("bounds mode: 'delta' is required");
  return constants_from_bounds(sc.model.num_states(), *cfg.delta, cfg.epsilon, cfg.bounds, cfg.overrides);
}

// ---------------------------------------------------------------------------

json scenario_to_json(const Scenario& sc) {
  json arms = json::array();
  for (ArmIndex i = 0; i < sc.model.num_arms(); ++i) {
    json chains = json::array();
    for (const auto& chain : sc.model.arms[i]) {
      chains.push_back({{"transition", chain.transition.rows()}, {"rewards", chain.rewards}});
    }
    json arm = {{"chains", chains}};
    if (i < sc.model.arm_names.size()) arm["name"] = sc.model.arm_names[i];
    arms.push_back(arm);
  }

  const auto& cfg = sc.config;
  json config = {{"constants_mode", to_string(cfg.constants_mode)}, {"sb1_watchdog_cap", cfg.sb1_watchdog_cap}};
  if (cfg.epsilon) config["epsilon"] = *cfg.epsilon;
  if (cfg.delta) config["delta"] = *cfg.delta;
  json bounds = {{"pi_hat_max", cfg.bounds.pi_hat_max}};
  if (cfg.bounds.x_max) bounds["x_max"] = *cfg.bounds.x_max;
  if (cfg.bounds.x_states_max) bounds["x_states_max"] = *cfg.bounds.x_states_max;
  if (cfg.bounds.v_star_max) bounds["v_star_max"] = *cfg.bounds.v_star_max;
  if (cfg.bounds.lambda_bar_min) bounds["lambda_bar_min"] = *cfg.bounds.lambda_bar_min;
  config["bounds"] = bounds;
  json overrides = json::object();
  if (cfg.overrides.local_rate) overrides["I_L"] = *cfg.overrides.local_rate;
  if (cfg.overrides.global_rate) overrides["I_G"] = *cfg.overrides.global_rate;
  if (cfg.overrides.scale) overrides["L"] = *cfg.overrides.scale;
  if (!overrides.empty()) config["overrides"] = overrides;

  json logging = json::object();
  if (!sc.grid.empty()) {
    logging["grid"] = sc.grid;
  } else {
    logging["points"] = sc.grid_points;
    logging["start"] = sc.grid_start;
  }

  return {{"schema_version", kScenarioSchemaVersion},
          {"name", sc.name},
          {"description", sc.description},
          {"model", {{"global_transition", sc.model.global.rows()}, {"arms", arms}}},
          {"horizon", sc.horizon},
          {"policy", sc.policy},
          {"policy_config", config},
          {"seeds", sc.seeds},
          {"master_seed", sc.master_seed},
          {"logging", logging}};
}

namespace {

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ValidationError("scenario: top level must be an object");
  reject_unknown_keys(j,
                      {"schema_version", "name", "description", "model", "horizon", "policy", "policy_config",
                       "seeds", "master_seed", "logging"},
                      "scenario");
  const int version = get_as<int>(j, "schema_version", "scenario");
  if (version != kScenarioSchemaVersion) {
    throw ValidationError(fmt::format("scenario: unsupported schema_version {} (expected {})", version,
                                      kScenarioSchemaVersion));
  }
  Scenario sc;
  sc.name = get_optional<std::string>(j, "name", "scenario").value_or("");
  sc.description = get_optional<std::string>(j, "description", "scenario").value_or("");

  const json& model = j.at("model");
  reject_unknown_keys(model, {"global_transition", "arms"}, "model");
  sc.model.global = matrix_from_json(model.at("global_transition"), "model.global_transition");
  const json& arms = model.at("arms");
  if (!arms.is_array()) throw ValidationError("model.arms must be an array");
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const std::string where = fmt::format("model.arms[{}]", i);
    reject_unknown_keys(arms[i], {"name", "chains"}, where.c_str());
    sc.model.arm_names.push_back(
        get_optional<std::string>(arms[i], "name", where.c_str()).value_or(fmt::format("arm{}", i + 1)));
    std::vector<RewardChain> chains;
    const json& cj = arms[i].at("chains");
    for (std::size_t s = 0; s < cj.size(); ++s) {
      const std::string cw = fmt::format("{}.chains[{}]", where, s);
      reject_unknown_keys(cj[s], {"transition", "rewards"}, cw.c_str());
      RewardChain chain;
      chain.transition = matrix_from_json(cj[s].at("transition"), cw + ".transition");
      chain.rewards = get_as<std::vector<double>>(cj[s], "rewards", cw.c_str());
      chains.push_back(std::move(chain));
    }
    sc.model.arms.push_back(std::move(chains));
  }

  sc.horizon = get_as<std::uint64_t>(j, "horizon", "scenario");
  sc.policy = get_optional<std::string>(j, "policy", "scenario").value_or("lemp");
  sc.seeds = get_optional<std::size_t>(j, "seeds", "scenario").value_or(1);
  sc.master_seed = get_optional<std::uint64_t>(j, "master_seed", "scenario").value_or(0);

  if (j.contains("policy_config")) {
    const json& pc = j.at("policy_config");
    reject_unknown_keys(pc, {"constants_mode", "epsilon", "delta", "bounds", "overrides", "sb1_watchdog_cap"},
                        "policy_config");
    auto& cfg = sc.config;
    cfg.constants_mode =
        parse_constants_mode(get_optional<std::string>(pc, "constants_mode", "policy_config").value_or("oracle"));
    cfg.epsilon = get_optional<double>(pc, "epsilon", "policy_config");
    cfg.delta = get_optional<double>(pc, "delta", "policy_config");
    cfg.sb1_watchdog_cap =
        get_optional<std::uint64_t>(pc, "sb1_watchdog_cap", "policy_config").value_or(kDefaultWatchdogCap);
    if (pc.contains("bounds")) {
      const json& b = pc.at("bounds");
      reject_unknown_keys(b, {"x_max", "x_states_max", "v_star_max", "pi_hat_max", "lambda_bar_min"},
                          "policy_config.bounds");
      cfg.bounds.x_max = get_optional<double>(b, "x_max", "policy_config.bounds");
      cfg.bounds.x_states_max = get_optional<std::size_t>(b, "x_states_max", "policy_config.bounds");
      cfg.bounds.v_star_max = get_optional<double>(b, "v_star_max", "policy_config.bounds");
      cfg.bounds.pi_hat_max = get_optional<double>(b, "pi_hat_max", "policy_config.bounds").value_or(1.0);
      cfg.bounds.lambda_bar_min = get_optional<double>(b, "lambda_bar_min", "policy_config.bounds");
    }
    if (pc.contains("overrides")) {
      const json& o = pc.at("overrides");
      reject_unknown_keys(o, {"I_L", "I_G", "L"}, "policy_config.overrides");
      cfg.overrides.local_rate = get_optional<double>(o, "I_L", "policy_config.overrides");
      cfg.overrides.global_rate = get_optional<double>(o, "I_G", "policy_config.overrides");
      cfg.overrides.scale = get_optional<double>(o, "L", "policy_config.overrides");
    }
  }

  if (j.contains("logging")) {
    const json& lg = j.at("logging");
    reject_unknown_keys(lg, {"grid", "points", "start"}, "logging");
    if (lg.contains("grid")) sc.grid = get_as<std::vector<std::uint64_t>>(lg, "grid", "logging");
    sc.grid_points = get_optional<std::size_t>(lg, "points", "logging").value_or(50);
    sc.grid_start = get_optional<std::uint64_t>(lg, "start", "logging").value_or(100);
  }
  return sc;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  try {
    sc = parse_scenario(j);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("scenario: {}", e.what()));
  }
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open scenario file '{}'", path));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("scenario file '{}' is not valid JSON: {}", path, e.what()));
  }
  return scenario_from_json(j);
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write scenario file '{}'", path));
  out << scenario_to_json(sc).dump(2) << '\n';
}

// ---------------------------------------------------------------------------

Scenario preset_gilbert_elliott_fsmc() {
  Scenario sc;
  sc.name = "gilbert-elliott-fsmc";
  sc.description =
      "Global state: Gilbert-Elliott primary user (0 = vacant, 1 = transmitting). Arms: three FSMC "
      "secondary channels with disjoint reward levels per global state. Channel A is best while the "
      "band is vacant, channel B while the primary user transmits. Parameters are a reconstruction "
      "for desk-scale experiments.";
  sc.model.global = TransitionMatrix({{0.9, 0.1}, {0.2, 0.8}});
  sc.model.arm_names = {"channel-A", "channel-B", "channel-C"};
  sc.model.arms = {
      {
          {TransitionMatrix({{0.7, 0.3}, {0.2, 0.8}}), {1.6, 2.6}},
          {TransitionMatrix({{0.6, 0.4}, {0.5, 0.5}}), {0.1, 0.35}},
      },
      {
          {TransitionMatrix({{0.6, 0.3, 0.1}, {0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}}), {1.0, 1.4, 1.8}},
          {TransitionMatrix({{0.5, 0.5}, {0.25, 0.75}}), {1.2, 1.7}},
      },
      {
          {TransitionMatrix({{0.8, 0.2}, {0.4, 0.6}}), {0.5, 1.1}},
          {TransitionMatrix({{0.7, 0.3}, {0.3, 0.7}}), {0.2, 0.45}},
      },
  };
  sc.horizon = 1'000'000;
  sc.policy = "lemp";
  sc.seeds = 20;
  sc.master_seed = 20220523;

  auto& cfg = sc.config;
  cfg.constants_mode = ConstantsMode::Bounds;
  cfg.delta = 0.34;
  cfg.epsilon = 0.085;
  cfg.bounds.x_max = 2.6;
  cfg.bounds.x_states_max = 3;
  cfg.bounds.v_star_max = 2.1;
  cfg.bounds.pi_hat_max = 1.0;
  cfg.bounds.lambda_bar_min = 0.3;
  // Desk-scale exploration constants; the closed forms give floors far
  // beyond a 10^6-slot horizon.
  cfg.overrides.local_rate = 13.84;
  cfg.overrides.global_rate = 13.84;
  cfg.overrides.scale = 8.5;
  return sc;
}

std::vector<std::string> preset_names() { return {"gilbert-elliott-fsmc"}; }

Scenario preset_by_name(const std::string& name) {
  if (name == "gilbert-elliott-fsmc") return preset_gilbert_elliott_fsmc();
  throw ValidationError(fmt::format("unknown preset '{}'", name));
}

}  // namespace rmab
