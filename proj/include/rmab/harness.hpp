#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmab/bound.hpp"
#include "rmab/environment.hpp"
#include "rmab/lemp.hpp"
#include "rmab/policy.hpp"
#include "rmab/scenario.hpp"

namespace rmab {

/// Scenario plus everything derived once per batch.
struct PreparedScenario {
  Scenario scenario;
  ModelSummary summary;
  std::optional<ConstantsBundle> constants;  ///< absent when the mode cannot be resolved
  std::string constants_error;
  std::vector<std::uint64_t> grid;
};

/// Validates, summarizes and resolves constants.  Constants that fail to
/// resolve only become an error when a policy needs them.
PreparedScenario prepare(Scenario scenario);

/// Policy stream id (the world uses 0 .. N|S|).
inline constexpr std::uint64_t kPolicyStreamId = 0xFFFFFFFFULL;

std::unique_ptr<Policy> make_policy(const std::string& name, const PreparedScenario& prepared,
                                    std::uint64_t run_seed);

/// Running regret totals.  Pseudo-regret accrues the value gap
/// V*_{s_prev} - V_{s_prev}^{I_t}; sampled regret accrues the realized
/// reward difference to the genie arm on the same slot.  Both only on
/// value-suboptimal slots.
struct RegretLedger {
  double pseudo_regret = 0.0;
  double sampled_regret = 0.0;
  std::uint64_t suboptimal_slots = 0;

  void record(const ModelSummary& summary, StateIndex s_prev, ArmIndex arm,
              const std::vector<double>& counterfactual);
};

struct GridRow {
  std::uint64_t t = 0;
  double pseudo_regret = 0.0;
  double sampled_regret = 0.0;
  double pseudo_regret_over_logt = 0.0;
  std::uint64_t n_explore_epochs_total = 0;
  std::uint64_t n_exploit_epochs = 0;
};

/// Per-slot record kept only when requested.
struct TraceSlot {
  ArmIndex arm = 0;
  StateIndex s_prev = 0;
  StateIndex revealed = 0;
  double reward = 0.0;
  std::vector<double> counterfactual;
};

struct RunOptions {
  bool record_trace = false;
};

struct RunRecord {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<GridRow> rows;
  RegretLedger ledger;
  std::vector<EpochRecord> epochs;
  std::optional<EstimatorState> estimator;
  std::vector<TraceSlot> trace;
};

/// One seeded run; deterministic in (scenario, policy, seed).
/// WatchdogAbort propagates.
RunRecord run(const PreparedScenario& prepared, const std::string& policy, std::uint64_t seed,
              const RunOptions& options = {});

/// Seed of run k: derive_seed(master_seed, k).
std::vector<std::uint64_t> batch_seeds(std::uint64_t master_seed, std::size_t count);

struct AggregateRow {
  std::uint64_t t = 0;
  std::size_t runs = 0;
  double mean_pseudo_regret = 0.0;
  double stderr_pseudo_regret = 0.0;
  double mean_sampled_regret = 0.0;
  double stderr_sampled_regret = 0.0;
  double mean_pseudo_regret_over_logt = 0.0;
};

struct RunFailure {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::string message;
  bool watchdog = false;
};

struct BatchResult {
  std::string policy;
  std::vector<RunRecord> runs;  ///< successful runs, seed order
  std::vector<RunFailure> failures;
  std::vector<AggregateRow> aggregate;
};

/// Mean and standard error (sample sd / sqrt(k)) per grid point.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

/// Runs the given seeds concurrently (threads = 0: hardware concurrency) and
/// folds results in seed order.  Failed runs are excluded and listed.
BatchResult run_batch(const PreparedScenario& prepared, const std::string& policy,
                      const std::vector<std::uint64_t>& seeds, unsigned threads = 0,
                      const RunOptions& options = {});
BatchResult run_batch(const PreparedScenario& prepared, const std::string& policy, unsigned threads = 0);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct ResultRow {
  std::string policy;
  std::uint64_t seed = 0;
  GridRow row;
};

inline constexpr const char* kResultsHeader =
    "policy,seed,t,pseudo_regret,sampled_regret,pseudo_regret_over_logt,n_explore_epochs_total,n_exploit_epochs";
inline constexpr const char* kCompareHeader =
    "policy,t,runs,mean_pseudo_regret,stderr_pseudo_regret,mean_sampled_regret,stderr_sampled_regret,"
    "mean_pseudo_regret_over_logt";
inline constexpr const char* kBoundHeader = "t,bound_value";

/// Shortest decimal that round-trips; "nan" for NaN.
std::string format_number(double v);

std::vector<ResultRow> result_rows(const std::vector<RunRecord>& runs);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& in);
void write_compare_csv(std::ostream& out, const std::vector<BatchResult>& batches);
void write_bound_csv(std::ostream& out, const std::vector<std::uint64_t>& grid, const BoundInputs& inputs);

}  // namespace rmab
