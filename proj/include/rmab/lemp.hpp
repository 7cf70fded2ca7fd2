#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmab/environment.hpp"
#include "rmab/policy.hpp"

namespace rmab {

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Model-dependent constants driving the exploration thresholds.
///
/// `local_rate` (I_L), `global_rate` (I_G) and `scale` (L) are normally
/// derived from the bound quantities below; `bounds`-mode scenarios may pin
/// any of them directly.
struct ConstantsBundle {
  double x_max = 0.0;
  std::size_t x_states_max = 0;
  std::size_t num_states = 0;
  double v_star_max = 0.0;
  double pi_hat_max = 1.0;
  double lambda_bar_min = 0.0;
  double delta = 0.0;    ///< floor on the squared value gap
  double epsilon = 0.0;  ///< gap tolerance
  double local_rate = 0.0;
  double global_rate = 0.0;
  double scale = 0.0;

  /// 2 / (eps^2 I_L): per-(arm, state) exploration floor.
  double local_floor() const { return 2.0 / (epsilon * epsilon * local_rate); }
  /// 2 / (eps^2 I_G): per-state occupancy floor.
  double global_floor() const { return 2.0 / (epsilon * epsilon * global_rate); }
  /// 4L / Delta: the worst-case hardness, reached by the clamp.
  double worst_hardness() const { return 4.0 * scale / delta; }
};

/// I_L = lambda_bar_min / (3072 ((x_max+2)^2 |X_max| pi_hat_max |S| (V*_max+2))^2)
double local_rate_constant(double x_max, std::size_t x_states_max, double pi_hat_max,
                           std::size_t num_states, double v_star_max, double lambda_bar_min);
/// I_G = 1 / (128 ((x_max+2) |S| (V*_max+2))^2)
double global_rate_constant(double x_max, std::size_t num_states, double v_star_max);
/// L = max(1/I_L, 1/I_G) / (16 (V*_max+2)^2)
double scale_constant(double v_star_max, double local_rate, double global_rate);

/// User-supplied bounds for `bounds` mode.  Missing entries are only an
/// error if a derived constant needs them and has no override.
struct ConstantBounds {
  std::optional<double> x_max;
  std::optional<std::size_t> x_states_max;
  std::optional<double> v_star_max;
  double pi_hat_max = 1.0;
  std::optional<double> lambda_bar_min;
};

struct ConstantOverrides {
  std::optional<double> local_rate;   ///< I_L
  std::optional<double> global_rate;  ///< I_G
  std::optional<double> scale;        ///< L
};

/// Builds the bundle from bounds; epsilon defaults to delta / 4.
/// Throws ValidationError for missing or nonpositive inputs.
ConstantsBundle constants_from_bounds(std::size_t num_states, double delta, std::optional<double> epsilon,
                                      const ConstantBounds& bounds, const ConstantOverrides& overrides = {});

/// Constants computed from the true model (theory-matching mode).
ConstantsBundle oracle_constants(const BanditModel& model, const ModelSummary& summary,
                                 std::optional<double> epsilon = std::nullopt);

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Sample means from SB2 slots only, plus global-state occupancy and
/// transition counts from every revealed state.
class EstimatorState {
 public:
  EstimatorState() = default;
  EstimatorState(std::size_t num_arms, std::size_t num_states);

  std::size_t num_arms() const noexcept { return num_arms_; }
  std::size_t num_states() const noexcept { return num_states_; }

  /// Slots observed so far.
  std::uint64_t t() const noexcept { return t_; }

  std::uint64_t samples(ArmIndex i, StateIndex s) const { return samples_[i * num_states_ + s]; }
  double reward_sum(ArmIndex i, StateIndex s) const { return sums_[i * num_states_ + s]; }
  /// mu_hat; nullopt when no SB2 sample exists yet.
  std::optional<double> mean(ArmIndex i, StateIndex s) const;

  std::uint64_t state_count(StateIndex s) const { return state_counts_[s]; }
  std::uint64_t transition_count(StateIndex from, StateIndex to) const {
    return transitions_[from * num_states_ + to];
  }
  /// Transitions observed out of `from`.
  std::uint64_t outgoing_count(StateIndex from) const;
  /// p_hat = N_{from,to} / (transitions out of `from`); nullopt when none yet.
  std::optional<double> transition_estimate(StateIndex from, StateIndex to) const;
  std::optional<StateIndex> last_state() const noexcept { return last_state_; }

  /// Global-state bookkeeping for one slot; advances the clock.
  void record_slot(StateIndex revealed);
  /// Adds one SB2 sample to (arm, state).
  void record_sample(ArmIndex arm, StateIndex s, double reward);

 private:
  std::size_t num_arms_ = 0;
  std::size_t num_states_ = 0;
  std::uint64_t t_ = 0;
  std::vector<std::uint64_t> samples_;
  std::vector<double> sums_;
  std::vector<std::uint64_t> state_counts_;
  std::vector<std::uint64_t> transitions_;
  std::optional<StateIndex> last_state_;
};

/// values[s][i] = sum_s' p_hat[s][s'] mu_hat[i][s'], best[s] = max_i.
/// Missing mu_hat counts as 0, an unvisited p_hat row as uniform.
struct ValueTable {
  std::vector<std::vector<double>> values;
  std::vector<double> best;
};

ValueTable value_estimates(const EstimatorState& est);

/// D_hat[s][i] = 4L / max(Delta, (V_hat*_s - V_hat_s^i)^2 - eps).
std::vector<std::vector<double>> hardness_estimate(const ValueTable& values, const ConstantsBundle& consts);
std::vector<std::vector<double>> hardness_estimate(const EstimatorState& est, const ConstantsBundle& consts);

/// Every entry equal to 4L / Delta.
std::vector<std::vector<double>> worst_case_hardness(std::size_t num_arms, std::size_t num_states,
                                                     const ConstantsBundle& consts);

// ---------------------------------------------------------------------------
// Epoch state machine
// ---------------------------------------------------------------------------

enum class Phase { Decide, ExploreSB1, ExploreSB2, Exploit };

/// Reward state recorded at the end of an arm's last SB2 block.
struct Anchor {
  StateIndex state = 0;
  double reward = 0.0;
};

struct EpochState {
  EpochState() = default;
  explicit EpochState(std::size_t num_arms)
      : explore_epochs(num_arms, 0), anchor(num_arms) {}

  Phase phase = Phase::Decide;
  ArmIndex arm = 0;                        ///< arm of the current exploration epoch
  std::uint64_t remaining = 0;             ///< SB2 samples or exploitation slots left
  std::uint64_t sb1_elapsed = 0;
  std::vector<std::vector<double>> frozen; ///< frozen[s][i] during exploitation
  std::vector<std::uint64_t> explore_epochs;  ///< n_O^i
  std::uint64_t exploit_epochs = 0;           ///< n_I
  std::vector<std::optional<Anchor>> anchor;  ///< gamma^i
};

/// 4^k, saturating at UINT64_MAX.
std::uint64_t pow4(std::uint64_t k);
/// SB2 length of exploration epoch k (1-based): 4^k.
inline std::uint64_t sb2_length(std::uint64_t k) { return pow4(k); }
/// Length of exploitation epoch k (1-based): 2 * 4^(k-1).
inline std::uint64_t exploit_length(std::uint64_t k) {
  const auto base = pow4(k - 1);
  return base > (UINT64_MAX >> 1) ? UINT64_MAX : 2 * base;
}

enum class DecisionKind { ExploreLocal, ExploreGlobal, Exploit };

struct Decision {
  DecisionKind kind = DecisionKind::Exploit;
  ArmIndex arm = 0;
  StateIndex state = 0;   ///< violating state (ExploreLocal / ExploreGlobal)
  double deficit = 0.0;   ///< threshold - T for ExploreLocal

  bool explores() const noexcept { return kind != DecisionKind::Exploit; }
};

/// Epoch-boundary rule at slot t using natural log t:
///  (a) some (i,s) with T_s^i <= max(D_hat_s^i, 2/(eps^2 I_L)) log t explores
///      the largest-deficit pair (ties: smaller arm, then smaller state);
///  (b) else some s with N_s <= 2/(eps^2 I_G) log t explores
///      argmin_i min_s D_hat_s^i;
///  (c) else exploit.
Decision decide_epoch(const EstimatorState& est, const std::vector<std::vector<double>>& hardness,
                      const ConstantsBundle& consts, std::uint64_t t);

/// n_O^i += 1; SB1 is skipped for the arm's first epoch.
void begin_exploration(EpochState& epoch, ArmIndex arm);
/// n_I += 1, freezes the table and sets the epoch length 2 * 4^(n_I - 1).
void begin_exploitation(EpochState& epoch, std::vector<std::vector<double>> frozen_values);

/// Per-slot argmax of the frozen table under the revealed state; returns to
/// Decide when the epoch runs out.
ArmIndex exploit_step(EpochState& epoch, StateIndex s_prev);

/// Estimator half of an observation: state counts every slot, (T, sum) only
/// in SB2 of the played arm.
void update_on_observation(EstimatorState& est, const EpochState& epoch, const Feedback& fb);

/// Epoch half: SB1 anchor detection and watchdog, SB2 countdown and anchor
/// capture.  Returns true when the observation closed an exploration epoch.
bool advance_epoch(EpochState& epoch, const Feedback& fb, std::uint64_t watchdog_cap);

// ---------------------------------------------------------------------------
// Policies built on the epoch machine
// ---------------------------------------------------------------------------

enum class SchedulerVariant {
  Lemp,         ///< adaptive hardness, per-state exploitation
  Dsee,         ///< worst-case hardness, per-state exploitation
  BestAverage,  ///< adaptive hardness, single state-averaged exploitation arm
};

inline constexpr std::uint64_t kDefaultWatchdogCap = 10'000'000;

class EpochScheduledPolicy final : public Policy {
 public:
  EpochScheduledPolicy(SchedulerVariant variant, std::size_t num_arms, std::size_t num_states,
                       ConstantsBundle consts, std::uint64_t watchdog_cap = kDefaultWatchdogCap);

  std::string_view name() const override;
  ArmIndex select(std::uint64_t t, StateIndex last_revealed) override;
  void observe(const Feedback& feedback) override;

  EpochCounters counters() const override;
  std::span<const EpochRecord> epochs() const override { return log_; }
  const EstimatorState* estimator() const override { return &est_; }

  const EpochState& epoch_state() const noexcept { return epoch_; }
  const ConstantsBundle& constants() const noexcept { return consts_; }
  SchedulerVariant variant() const noexcept { return variant_; }

 private:
  std::vector<std::vector<double>> current_hardness() const;
  std::vector<std::vector<double>> exploitation_table() const;

  SchedulerVariant variant_;
  ConstantsBundle consts_;
  std::uint64_t watchdog_cap_;
  EstimatorState est_;
  EpochState epoch_;
  std::vector<EpochRecord> log_;
};

}  // namespace rmab
