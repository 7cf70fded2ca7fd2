#include "rmab/harness.hpp"

#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "rmab/baselines.hpp"
#include "rmab/errors.hpp"

namespace rmab {

PreparedScenario prepare(Scenario scenario) {
  validate_scenario(scenario);
  PreparedScenario p;
  p.summary = summarize(scenario.model);
  try {
    p.constants = resolve_constants(scenario, p.summary);
  } catch (const ValidationError& e) {
    p.constants_error = e.what();
  }
  p.grid = effective_grid(scenario);
  p.scenario = std::move(scenario);
  return p;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const PreparedScenario& prepared,
                                    std::uint64_t run_seed) {
  const auto& model = prepared.scenario.model;
  if (name == "genie") return std::make_unique<GeniePolicy>(prepared.summary);
  if (name == "uniform-random") {
    return std::make_unique<UniformRandomPolicy>(model.num_arms(), derive_seed(run_seed, kPolicyStreamId));
  }
  if (name != "lemp" && name != "dsee" && name != "best-average") {
    throw ValidationError(fmt::format("unknown policy '{}'", name));
  }
  if (!prepared.constants) {
    throw ValidationError(fmt::format("policy '{}' needs exploration constants: {}", name, prepared.constants_error));
  }
  const auto& consts = *prepared.constants;
  const auto cap = prepared.scenario.config.sb1_watchdog_cap;
  if (name == "lemp") return lemp_policy(model.num_arms(), model.num_states(), consts, cap);
  if (name == "dsee") return dsee_extended_policy(model.num_arms(), model.num_states(), consts, cap);
  return best_on_average_policy(model.num_arms(), model.num_states(), consts, cap);
}

void RegretLedger::record(const ModelSummary& summary, StateIndex s_prev, ArmIndex arm,
                          const std::vector<double>& counterfactual) {
  const double gap = summary.best_value[s_prev] - summary.values[s_prev][arm];
  if (gap > 0.0) {
    pseudo_regret += gap;
    sampled_regret += counterfactual[summary.best_arm[s_prev]] - counterfactual[arm];
    ++suboptimal_slots;
  }
}

RunRecord run(const PreparedScenario& prepared, const std::string& policy_name, std::uint64_t seed,
              const RunOptions& options) {
  const auto& model = prepared.scenario.model;
  const auto& summary = prepared.summary;
  const auto horizon = prepared.scenario.horizon;
  auto policy = make_policy(policy_name, prepared, seed);
  auto world = init_world(model, seed);

  RunRecord rec;
  rec.policy = policy_name;
  rec.seed = seed;
  rec.rows.reserve(prepared.grid.size());
  if (options.record_trace) rec.trace.reserve(static_cast<std::size_t>(horizon));

  Observation obs;
  std::size_t next_grid = 0;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const StateIndex s_prev = world.s_prev;
    const ArmIndex arm = policy->select(t, s_prev);
    step(world, model, arm, obs);
    policy->observe(feedback_of(obs));
    rec.ledger.record(summary, s_prev, arm, obs.counterfactual_rewards);
    if (options.record_trace) {
      rec.trace.push_back({arm, s_prev, obs.revealed_state, obs.reward, obs.counterfactual_rewards});
    }
    if (next_grid < prepared.grid.size() && prepared.grid[next_grid] == t) {
      const auto counters = policy->counters();
      GridRow row;
      row.t = t;
      row.pseudo_regret = rec.ledger.pseudo_regret;
      row.sampled_regret = rec.ledger.sampled_regret;
      row.pseudo_regret_over_logt =
          t > 1 ? rec.ledger.pseudo_regret / std::log(static_cast<double>(t)) : std::numeric_limits<double>::quiet_NaN();
      row.n_explore_epochs_total = counters.explore_epochs;
      row.n_exploit_epochs = counters.exploit_epochs;
      rec.rows.push_back(row);
      ++next_grid;
    }
  }
  const auto epochs = policy->epochs();
  rec.epochs.assign(epochs.begin(), epochs.end());
  if (const auto* est = policy->estimator()) rec.estimator = *est;
  return rec;
}

std::vector<std::uint64_t> batch_seeds(std::uint64_t master_seed, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t k = 0; k < count; ++k) seeds[k] = derive_seed(master_seed, k);
  return seeds;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::vector<AggregateRow> out;
  if (runs.empty()) return out;
  const std::size_t points = runs.front().rows.size();
  const auto k = static_cast<double>(runs.size());
  auto mean_and_stderr = [&](std::size_t g, auto field) {
    double sum = 0.0;
    for (const auto& r : runs) sum += field(r.rows[g]);
    const double mean = sum / k;
    if (runs.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (const auto& r : runs) ss += (field(r.rows[g]) - mean) * (field(r.rows[g]) - mean);
    return std::pair{mean, std::sqrt(ss / (k - 1.0)) / std::sqrt(k)};
  };
  for (std::size_t g = 0; g < points; ++g) {
    AggregateRow row;
    row.t = runs.front().rows[g].t;
    row.runs = runs.size();
    std::tie(row.mean_pseudo_regret, row.stderr_pseudo_regret) =
        mean_and_stderr(g, [](const GridRow& r) { return r.pseudo_regret; });
    std::tie(row.mean_sampled_regret, row.stderr_sampled_regret) =
        mean_and_stderr(g, [](const GridRow& r) { return r.sampled_regret; });
    row.mean_pseudo_regret_over_logt =
        mean_and_stderr(g, [](const GridRow& r) { return r.pseudo_regret_over_logt; }).first;
    out.push_back(row);
  }
  return out;
}

BatchResult run_batch(const PreparedScenario& prepared, const std::string& policy,
                      const std::vector<std::uint64_t>& seeds, unsigned threads, const RunOptions& options) {
  std::vector<std::optional<RunRecord>> slots(seeds.size());
  std::vector<std::optional<RunFailure>> failed(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        slots[k] = run(prepared, policy, seeds[k], options);
      } catch (const WatchdogAbort& e) {
        failed[k] = RunFailure{k, seeds[k], e.what(), true};
      } catch (const std::exception& e) {
        failed[k] = RunFailure{k, seeds[k], e.what(), false};
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(seeds.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
  }

  BatchResult out;
  out.policy = policy;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (slots[k]) out.runs.push_back(std::move(*slots[k]));
    if (failed[k]) out.failures.push_back(std::move(*failed[k]));
  }
  out.aggregate = aggregate_runs(out.runs);
  return out;
}

BatchResult run_batch(const PreparedScenario& prepared, const std::string& policy, unsigned threads) {
  return run_batch(prepared, policy, batch_seeds(prepared.scenario.master_seed, prepared.scenario.seeds), threads);
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

std::vector<ResultRow> result_rows(const std::vector<RunRecord>& runs) {
  std::vector<ResultRow> rows;
  for (const auto& r : runs)
    for (const auto& g : r.rows) rows.push_back({r.policy, r.seed, g});
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.policy << ',' << r.seed << ',' << r.row.t << ',' << format_number(r.row.pseudo_regret) << ','
        << format_number(r.row.sampled_regret) << ',' << format_number(r.row.pseudo_regret_over_logt) << ','
        << r.row.n_explore_epochs_total << ',' << r.row.n_exploit_epochs << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ValidationError(fmt::format("results csv: bad number '{}'", s));
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used);
  if (used != s.size()) throw ValidationError(fmt::format("results csv: bad integer '{}'", s));
  return v;
}

}  // namespace

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw ValidationError("results csv: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw ValidationError(fmt::format("results csv: expected 8 fields, got {}", f.size()));
    try {
      ResultRow r;
      r.policy = f[0];
      r.seed = parse_uint(f[1]);
      r.row.t = parse_uint(f[2]);
      r.row.pseudo_regret = parse_double(f[3]);
      r.row.sampled_regret = parse_double(f[4]);
      r.row.pseudo_regret_over_logt = parse_double(f[5]);
      r.row.n_explore_epochs_total = parse_uint(f[6]);
      r.row.n_exploit_epochs = parse_uint(f[7]);
      rows.push_back(r);
    } catch (const std::logic_error& e) {
      throw ValidationError(fmt::format("results csv: cannot parse line '{}': {}", line, e.what()));
    }
  }
  return rows;
}

void write_compare_csv(std::ostream& out, const std::vector<BatchResult>& batches) {
  out << kCompareHeader << '\n';
  for (const auto& b : batches)
    for (const auto& a : b.aggregate) {
      out << b.policy << ',' << a.t << ',' << a.runs << ',' << format_number(a.mean_pseudo_regret) << ','
          << format_number(a.stderr_pseudo_regret) << ',' << format_number(a.mean_sampled_regret) << ','
          << format_number(a.stderr_sampled_regret) << ',' << format_number(a.mean_pseudo_regret_over_logt)
          << '\n';
    }
}

void write_bound_csv(std::ostream& out, const std::vector<std::uint64_t>& grid, const BoundInputs& inputs) {
  out << kBoundHeader << '\n';
  for (auto t : grid) out << t << ',' << format_number(regret_bound(t, inputs).value) << '\n';
}

}  // namespace rmab
