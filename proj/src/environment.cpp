#include "rmab/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rmab/errors.hpp"

namespace rmab {

void validate_model(const BanditModel& model) {
  const std::size_t n_states = model.num_states();
  if (n_states == 0) throw ValidationError("model has no global states");
  if (model.num_arms() == 0) throw ValidationError("model has no arms");
  require_ergodic(model.global, "global chain");
  if (!model.arm_names.empty() && model.arm_names.size() != model.num_arms()) {
    throw ValidationError("arm_names length does not match the number of arms");
  }
  for (ArmIndex i = 0; i < model.num_arms(); ++i) {
    if (model.arms[i].size() != n_states) {
      throw ValidationError(fmt::format("arm {} has {} reward chains, expected one per global state ({})",
                                        i + 1, model.arms[i].size(), n_states));
    }
    for (StateIndex s = 0; s < n_states; ++s) {
      const auto& chain = model.arms[i][s];
      const std::string what = fmt::format("arm {} global state {}", i + 1, s);
      if (chain.rewards.size() != chain.transition.size()) {
        throw ValidationError(fmt::format("{}: {} rewards for {} local states", what, chain.rewards.size(),
                                          chain.transition.size()));
      }
      for (double r : chain.rewards) {
        if (!std::isfinite(r) || r <= 0.0) {
          throw ValidationError(fmt::format("{}: reward {} is not strictly positive", what, r));
        }
      }
      auto sorted = chain.rewards;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError(fmt::format("{}: duplicate reward values", what));
      }
      require_ergodic(chain.transition, what.c_str());
    }
    for (StateIndex a = 0; a < n_states; ++a)
      for (StateIndex b = a + 1; b < n_states; ++b)
        for (double r : model.arms[i][a].rewards) {
          const auto& other = model.arms[i][b].rewards;
          if (std::find(other.begin(), other.end(), r) != other.end()) {
            throw ValidationError(fmt::format(
                "arm {}: reward {} appears under global states {} and {}; supports must be disjoint", i + 1,
                r, a, b));
          }
        }
  }
}

ModelSummary summarize(const BanditModel& model) {
  validate_model(model);
  const std::size_t n_arms = model.num_arms();
  const std::size_t n_states = model.num_states();
  ModelSummary out;
  out.global_stationary = stationary_distribution(model.global);
  out.mu.assign(n_arms, std::vector<double>(n_states, 0.0));
  for (ArmIndex i = 0; i < n_arms; ++i)
    for (StateIndex s = 0; s < n_states; ++s) {
      const auto& chain = model.chain(i, s);
      const auto pi = stationary_distribution(chain.transition);
      double mean = 0.0;
      for (std::size_t x = 0; x < pi.size(); ++x) mean += chain.rewards[x] * pi[x];
      out.mu[i][s] = mean;
    }

  out.values.assign(n_states, std::vector<double>(n_arms, 0.0));
  out.best_value.assign(n_states, 0.0);
  out.best_arm.assign(n_states, 0);
  out.gap_sq.assign(n_states, std::vector<double>(n_arms, 0.0));
  out.min_gap_sq_per_state.assign(n_states, std::numeric_limits<double>::infinity());
  out.min_gap_sq = std::numeric_limits<double>::infinity();
  for (StateIndex s = 0; s < n_states; ++s) {
    for (ArmIndex i = 0; i < n_arms; ++i) {
      double v = 0.0;
      for (StateIndex next = 0; next < n_states; ++next) v += model.global(s, next) * out.mu[i][next];
      out.values[s][i] = v;
    }
    const auto& row = out.values[s];
    const auto best = static_cast<ArmIndex>(std::max_element(row.begin(), row.end()) - row.begin());
    for (ArmIndex i = 0; i < n_arms; ++i) {
      if (i != best && row[i] == row[best]) {
        throw ValidationError(
            fmt::format("global state {}: arms {} and {} tie for the best value {}", s, best + 1, i + 1, row[i]));
      }
    }
    out.best_arm[s] = best;
    out.best_value[s] = row[best];
    for (ArmIndex i = 0; i < n_arms; ++i) {
      const double g = row[best] - row[i];
      out.gap_sq[s][i] = g * g;
      if (i != best) out.min_gap_sq_per_state[s] = std::min(out.min_gap_sq_per_state[s], g * g);
    }
    out.min_gap_sq = std::min(out.min_gap_sq, out.min_gap_sq_per_state[s]);
  }
  return out;
}

std::uint64_t chain_stream_id(ArmIndex arm, StateIndex s, std::size_t num_states) {
  return 1 + arm * num_states + s;
}

WorldState init_world(const BanditModel& model, std::uint64_t run_seed) {
  const std::size_t n_states = model.num_states();
  WorldState w;
  w.global_stream.seed(derive_seed(run_seed, kGlobalStreamId));
  w.chain_streams.reserve(model.num_arms() * n_states);
  w.local.resize(model.num_arms() * n_states);
  for (ArmIndex i = 0; i < model.num_arms(); ++i)
    for (StateIndex s = 0; s < n_states; ++s) {
      auto& stream = w.chain_streams.emplace_back(derive_seed(run_seed, chain_stream_id(i, s, n_states)));
      const auto pi = stationary_distribution(model.chain(i, s).transition);
      w.local[i * n_states + s] = sample_from(pi, stream);
    }
  const auto pi_global = stationary_distribution(model.global);
  w.s_cur = sample_from(pi_global, w.global_stream);
  w.s_prev = w.s_cur;
  w.t = 0;
  return w;
}

void step(WorldState& world, const BanditModel& model, ArmIndex arm, Observation& out) {
  const std::size_t n_states = model.num_states();
  const std::size_t n_arms = model.num_arms();
  out.arm = arm;
  out.revealed_state = world.s_cur;
  out.counterfactual_rewards.resize(n_arms);
  for (ArmIndex i = 0; i < n_arms; ++i) {
    const auto& chain = model.chain(i, world.s_cur);
    out.counterfactual_rewards[i] = chain.rewards[world.local[i * n_states + world.s_cur]];
  }
  out.reward = out.counterfactual_rewards[arm];

  for (ArmIndex i = 0; i < n_arms; ++i)
    for (StateIndex s = 0; s < n_states; ++s) {
      const std::size_t k = i * n_states + s;
      world.local[k] = model.chain(i, s).transition.sample_next(world.local[k], world.chain_streams[k]);
    }
  world.s_prev = world.s_cur;
  world.s_cur = model.global.sample_next(world.s_cur, world.global_stream);
  ++world.t;
}

Observation step(WorldState& world, const BanditModel& model, ArmIndex arm) {
  Observation out;
  step(world, model, arm, out);
  return out;
}

std::optional<StateIndex> identify_state(const BanditModel& model, ArmIndex arm, double reward) {
  for (StateIndex s = 0; s < model.num_states(); ++s) {
    const auto& r = model.chain(arm, s).rewards;
    if (std::find(r.begin(), r.end(), reward) != r.end()) return s;
  }
  return std::nullopt;
}

}  // namespace rmab
