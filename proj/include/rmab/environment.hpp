#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmab/markov.hpp"
#include "rmab/random.hpp"

namespace rmab {

using ArmIndex = std::size_t;

/// Reward process of one arm under one global state.  The local state is
/// its reward: `rewards[x]` is paid while the chain sits in state x.
struct RewardChain {
  TransitionMatrix transition;
  std::vector<double> rewards;
};

/// Global chain plus one reward chain per (arm, global state).
/// `arms[i][s]` is the chain of arm i while the global state is s.
struct BanditModel {
  TransitionMatrix global;
  std::vector<std::vector<RewardChain>> arms;
  std::vector<std::string> arm_names;

  std::size_t num_arms() const noexcept { return arms.size(); }
  std::size_t num_states() const noexcept { return global.size(); }
  const RewardChain& chain(ArmIndex arm, StateIndex s) const { return arms[arm][s]; }
};

/// Throws ValidationError if the model breaks any structural invariant:
/// shape, positive rewards, per-arm disjoint supports, ergodic chains.
void validate_model(const BanditModel& model);

/// Genie knowledge derived from the true parameters.
struct ModelSummary {
  std::vector<std::vector<double>> mu;         ///< mu[i][s], stationary reward mean
  std::vector<std::vector<double>> values;     ///< values[s][i] = sum_s' P[s][s'] mu[i][s']
  std::vector<double> best_value;              ///< V*_s
  std::vector<ArmIndex> best_arm;              ///< argmax_i V_s^i
  std::vector<std::vector<double>> gap_sq;     ///< gap_sq[s][i] = (V*_s - V_s^i)^2
  std::vector<double> min_gap_sq_per_state;    ///< Delta_s over suboptimal arms
  double min_gap_sq = 0.0;                     ///< Delta
  std::vector<double> global_stationary;       ///< pi_s

  double gap(StateIndex s, ArmIndex i) const { return best_value[s] - values[s][i]; }
};

/// Validates the model, then computes mu, V, best arms and squared gaps
/// exactly.  A tie for the best arm in any state is a ValidationError.
ModelSummary summarize(const BanditModel& model);

/// What the world reports after one slot.  `counterfactual_rewards` is for
/// regret accounting only and must never reach a learning policy.
struct Observation {
  ArmIndex arm = 0;
  double reward = 0.0;
  StateIndex revealed_state = 0;
  std::vector<double> counterfactual_rewards;
};

/// Mutable world of one run.  Owns one random substream per reward chain and
/// one for the global chain so every trajectory is independent of the
/// action sequence.
struct WorldState {
  std::uint64_t t = 0;
  StateIndex s_prev = 0;
  StateIndex s_cur = 0;
  std::vector<StateIndex> local;  ///< local[i * |S| + s]
  RandomStream global_stream;
  std::vector<RandomStream> chain_streams;

  StateIndex local_state(ArmIndex arm, StateIndex s, std::size_t num_states) const {
    return local[arm * num_states + s];
  }
};

/// Substream ids: global chain uses 0, chain (i, s) uses 1 + i*|S| + s.
inline constexpr std::uint64_t kGlobalStreamId = 0;
std::uint64_t chain_stream_id(ArmIndex arm, StateIndex s, std::size_t num_states);

/// Every chain starts from its own stationary distribution; s_prev = s_cur.
WorldState init_world(const BanditModel& model, std::uint64_t run_seed);

/// One slot: read rewards under s_cur, advance all local chains, advance the
/// global chain, increment t.  `out` is reused to avoid reallocation.
void step(WorldState& world, const BanditModel& model, ArmIndex arm, Observation& out);
Observation step(WorldState& world, const BanditModel& model, ArmIndex arm);

/// Global state whose reward support for `arm` contains `reward`, if any.
std::optional<StateIndex> identify_state(const BanditModel& model, ArmIndex arm, double reward);

}  // namespace rmab
