// Command-line harness: simulate, compare, evaluate the regret bound, and
// emit scenario presets.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <fmt/format.h>

#include "rmab/bound.hpp"
#include "rmab/errors.hpp"
#include "rmab/harness.hpp"
#include "rmab/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitWatchdog = 3;

struct Overrides {
  std::optional<std::string> policy;
  std::optional<std::uint64_t> horizon;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> master_seed;
  std::optional<std::string> constants_mode;
};

rmab::Scenario load_with_overrides(const std::string& path, const Overrides& o) {
  auto sc = rmab::load_scenario(path);
  if (o.policy) sc.policy = *o.policy;
  if (o.horizon) {
    sc.horizon = *o.horizon;
    std::erase_if(sc.grid, [&](std::uint64_t t) { return t > sc.horizon; });
  }
  if (o.seeds) sc.seeds = *o.seeds;
  if (o.master_seed) sc.master_seed = *o.master_seed;
  if (o.constants_mode) sc.config.constants_mode = rmab::parse_constants_mode(*o.constants_mode);
  rmab::validate_scenario(sc);
  return sc;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw rmab::ValidationError(fmt::format("cannot write '{}'", path));
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

int report_failures(const rmab::BatchResult& batch) {
  int code = kExitOk;
  for (const auto& f : batch.failures) {
    std::cerr << fmt::format("{}: run {} (seed {}) failed: {}\n", batch.policy, f.index, f.seed, f.message);
    code = f.watchdog ? kExitWatchdog : std::max(code, kExitValidation);
  }
  if (!batch.failures.empty()) {
    std::cerr << fmt::format("{}: {} of {} runs failed and were excluded\n", batch.policy, batch.failures.size(),
                             batch.failures.size() + batch.runs.size());
  }
  return code;
}

int cmd_simulate(const std::string& scenario_path, const Overrides& o, const std::string& out_path,
                 const std::string& summary_path, unsigned threads) {
  const auto prepared = rmab::prepare(load_with_overrides(scenario_path, o));
  const auto batch = rmab::run_batch(prepared, prepared.scenario.policy, threads);
  {
    auto out = open_out(out_path);
    rmab::write_results_csv(out, rmab::result_rows(batch.runs));
  }
  if (!summary_path.empty()) {
    auto out = open_out(summary_path);
    rmab::write_compare_csv(out, {batch});
  }
  if (!batch.aggregate.empty()) {
    const auto& last = batch.aggregate.back();
    std::cout << fmt::format("{}: {} runs, t = {}, mean pseudo-regret {:.6g} (stderr {:.3g}), regret/log t {:.6g}\n",
                             batch.policy, last.runs, last.t, last.mean_pseudo_regret, last.stderr_pseudo_regret,
                             last.mean_pseudo_regret_over_logt);
  }
  return report_failures(batch);
}

int cmd_compare(const std::string& scenario_path, const Overrides& o, const std::string& policies,
                const std::string& out_path, unsigned threads) {
  const auto prepared = rmab::prepare(load_with_overrides(scenario_path, o));
  std::vector<rmab::BatchResult> batches;
  int code = kExitOk;
  for (const auto& name : split_list(policies)) {
    batches.push_back(rmab::run_batch(prepared, name, threads));
    const auto& b = batches.back();
    if (!b.aggregate.empty()) {
      const auto& last = b.aggregate.back();
      std::cout << fmt::format("{:>14}: t = {}, mean pseudo-regret {:.6g} (stderr {:.3g}), regret/log t {:.6g}\n",
                               name, last.t, last.mean_pseudo_regret, last.stderr_pseudo_regret,
                               last.mean_pseudo_regret_over_logt);
    }
    code = std::max(code, report_failures(b));
  }
  auto out = open_out(out_path);
  rmab::write_compare_csv(out, batches);
  return code;
}

int cmd_bound(const std::string& scenario_path, const Overrides& o, const std::string& out_path) {
  const auto prepared = rmab::prepare(load_with_overrides(scenario_path, o));
  if (!prepared.constants) throw rmab::ValidationError(prepared.constants_error);
  const auto inputs = rmab::make_bound_inputs(prepared.scenario.model, prepared.summary, *prepared.constants);
  for (rmab::ArmIndex i = 0; i < inputs.num_arms; ++i) {
    std::cout << fmt::format("A_{} = {:.6g}\n", i + 1, rmab::compute_A(i, inputs));
  }
  std::cout << fmt::format("I_L = {:.6g}, I_G = {:.6g}, L = {:.6g}, Delta = {:.6g}, epsilon = {:.6g}\n",
                           inputs.local_rate, inputs.global_rate, inputs.scale, inputs.delta, inputs.epsilon);
  if (!rmab::epsilon_in_recommended_range(inputs)) {
    std::cerr << "warning: epsilon is not below min_s Delta_s / 2\n";
  }
  std::cout << "note: " << rmab::kBoundConstantNote << '\n';
  auto out = open_out(out_path);
  rmab::write_bound_csv(out, prepared.grid, inputs);
  return kExitOk;
}

int cmd_preset(const std::string& name, const std::string& out_path) {
  rmab::save_scenario(rmab::preset_by_name(name), out_path);
  return kExitOk;
}

void add_overrides(CLI::App* cmd, Overrides& o, bool with_policy) {
  if (with_policy) cmd->add_option("--policy", o.policy, "lemp|dsee|best-average|genie|uniform-random");
  cmd->add_option("--horizon", o.horizon, "Override the scenario horizon");
  cmd->add_option("--seeds", o.seeds, "Number of seeded runs");
  cmd->add_option("--master-seed", o.master_seed, "Master seed for run-seed derivation");
  cmd->add_option("--constants-mode", o.constants_mode, "oracle|bounds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restless Markov-modulated bandit simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string summary_path;
  std::string policies = "lemp,dsee,best-average";
  std::string preset_name = "gilbert-elliott-fsmc";
  unsigned threads = 0;
  Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "Run seeded simulations and write per-run regret curves");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--out", out_path, "results.csv")->required();
  simulate->add_option("--summary", summary_path, "Optional aggregate CSV (mean and stderr per grid point)");
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");
  add_overrides(simulate, overrides, true);

  auto* compare = app.add_subcommand("compare", "Run several policies on the same seeds");
  compare->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  compare->add_option("--policies", policies, "Comma-separated policy list");
  compare->add_option("--out", out_path, "compare.csv")->required();
  compare->add_option("--threads", threads, "Worker threads (0 = all cores)");
  add_overrides(compare, overrides, false);

  auto* bound = app.add_subcommand("bound", "Evaluate the finite-sample regret bound on the logging grid");
  bound->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  bound->add_option("--out", out_path, "bound.csv")->required();
  add_overrides(bound, overrides, false);

  auto* preset = app.add_subcommand("preset", "Write a built-in scenario");
  preset->add_option("--name", preset_name, "Preset name")->check(CLI::IsMember(rmab::preset_names()));
  preset->add_option("--out", out_path, "scenario.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*simulate) return cmd_simulate(scenario_path, overrides, out_path, summary_path, threads);
    if (*compare) return cmd_compare(scenario_path, overrides, policies, out_path, threads);
    if (*bound) return cmd_bound(scenario_path, overrides, out_path);
    if (*preset) return cmd_preset(preset_name, out_path);
  } catch (const rmab::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const rmab::WatchdogAbort& e) {
    std::cerr << "watchdog abort: " << e.what() << '\n';
    return kExitWatchdog;
  }
  return kExitOk;
}
