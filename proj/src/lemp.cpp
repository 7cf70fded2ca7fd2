#include "rmab/lemp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rmab/errors.hpp"

namespace rmab {

double local_rate_constant(double x_max, std::size_t x_states_max, double pi_hat_max, std::size_t num_states,
                           double v_star_max, double lambda_bar_min) {
  const double inner = (x_max + 2.0) * (x_max + 2.0) * static_cast<double>(x_states_max) * pi_hat_max *
                       static_cast<double>(num_states) * (v_star_max + 2.0);
  return lambda_bar_min / (3072.0 * inner * inner);
}

double global_rate_constant(double x_max, std::size_t num_states, double v_star_max) {
  const double inner = (x_max + 2.0) * static_cast<double>(num_states) * (v_star_max + 2.0);
  return 1.0 / (128.0 * inner * inner);
}

double scale_constant(double v_star_max, double local_rate, double global_rate) {
  return std::max(1.0 / local_rate, 1.0 / global_rate) / (16.0 * (v_star_max + 2.0) * (v_star_max + 2.0));
}

namespace {

double require_positive(std::optional<double> v, const char* key, const char* needed_for) {
  if (!v) throw ValidationError(fmt::format("bounds mode: '{}' is required to derive {}", key, needed_for));
  if (!(*v > 0.0)) throw ValidationError(fmt::format("bounds mode: '{}' must be positive, got {}", key, *v));
  return *v;
}

void check_bundle(const ConstantsBundle& c) {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(fmt::format("constant {} must be positive and finite, got {}", key, v));
  };
  positive(c.delta, "delta");
  positive(c.epsilon, "epsilon");
  positive(c.local_rate, "I_L");
  positive(c.global_rate, "I_G");
  positive(c.scale, "L");
}

}  // namespace

ConstantsBundle constants_from_bounds(std::size_t num_states, double delta, std::optional<double> epsilon,
                                      const ConstantBounds& bounds, const ConstantOverrides& overrides) {
  ConstantsBundle c;
  c.num_states = num_states;
  c.delta = delta;
  c.epsilon = epsilon.value_or(delta / 4.0);
  c.pi_hat_max = bounds.pi_hat_max;
  if (!(c.pi_hat_max > 0.0 && c.pi_hat_max <= 1.0)) {
    throw ValidationError(fmt::format("bounds mode: pi_hat_max must lie in (0,1], got {}", c.pi_hat_max));
  }
  if (bounds.x_max) c.x_max = *bounds.x_max;
  if (bounds.x_states_max) c.x_states_max = *bounds.x_states_max;
  if (bounds.v_star_max) c.v_star_max = *bounds.v_star_max;
  if (bounds.lambda_bar_min) c.lambda_bar_min = *bounds.lambda_bar_min;

  if (overrides.local_rate) {
    c.local_rate = *overrides.local_rate;
  } else {
    require_positive(bounds.x_max, "x_max", "I_L");
    require_positive(bounds.v_star_max, "v_star_max", "I_L");
    require_positive(bounds.lambda_bar_min, "lambda_bar_min", "I_L");
    if (!bounds.x_states_max || *bounds.x_states_max == 0) {
      throw ValidationError("bounds mode: 'x_states_max' is required to derive I_L");
    }
    c.local_rate = local_rate_constant(c.x_max, c.x_states_max, c.pi_hat_max, num_states, c.v_star_max,
                                       c.lambda_bar_min);
  }
  if (overrides.global_rate) {
    c.global_rate = *overrides.global_rate;
  } else {
    require_positive(bounds.x_max, "x_max", "I_G");
    require_positive(bounds.v_star_max, "v_star_max", "I_G");
    c.global_rate = global_rate_constant(c.x_max, num_states, c.v_star_max);
  }
  if (overrides.scale) {
    c.scale = *overrides.scale;
  } else {
    require_positive(bounds.v_star_max, "v_star_max", "L");
    c.scale = scale_constant(c.v_star_max, c.local_rate, c.global_rate);
  }
  check_bundle(c);
  return c;
}

ConstantsBundle oracle_constants(const BanditModel& model, const ModelSummary& summary,
                                 std::optional<double> epsilon) {
  ConstantsBundle c;
  c.num_states = model.num_states();
  double lambda_max = 0.0;
  c.pi_hat_max = 0.0;
  for (const auto& arm : model.arms)
    for (const auto& chain : arm) {
      c.x_max = std::max(c.x_max, *std::max_element(chain.rewards.begin(), chain.rewards.end()));
      c.x_states_max = std::max(c.x_states_max, chain.rewards.size());
      lambda_max = std::max(lambda_max, second_eigenvalue_modulus(chain.transition));
      for (double p : stationary_distribution(chain.transition)) c.pi_hat_max = std::max({c.pi_hat_max, p, 1.0 - p});
    }
  c.v_star_max = *std::max_element(summary.best_value.begin(), summary.best_value.end());
  c.lambda_bar_min = 1.0 - lambda_max;
  c.delta = summary.min_gap_sq;
  if (!std::isfinite(c.delta)) {
    throw ValidationError("oracle constants need at least two arms (the squared-gap floor is undefined)");
  }
  c.epsilon = epsilon.value_or(c.delta / 4.0);
  c.local_rate = local_rate_constant(c.x_max, c.x_states_max, c.pi_hat_max, c.num_states, c.v_star_max,
                                     c.lambda_bar_min);
  c.global_rate = global_rate_constant(c.x_max, c.num_states, c.v_star_max);
  c.scale = scale_constant(c.v_star_max, c.local_rate, c.global_rate);
  check_bundle(c);
  return c;
}

// ---------------------------------------------------------------------------

EstimatorState::EstimatorState(std::size_t num_arms, std::size_t num_states)
    : num_arms_(num_arms),
      num_states_(num_states),
      samples_(num_arms * num_states, 0),
      sums_(num_arms * num_states, 0.0),
      state_counts_(num_states, 0),
      transitions_(num_states * num_states, 0) {}

std::optional<double> EstimatorState::mean(ArmIndex i, StateIndex s) const {
  const auto n = samples(i, s);
  if (n == 0) return std::nullopt;
  return reward_sum(i, s) / static_cast<double>(n);
}

std::uint64_t EstimatorState::outgoing_count(StateIndex from) const {
  // N_from, less one when `from` is the latest state (its successor is unseen).
  return state_counts_[from] - (last_state_ == from ? 1 : 0);
}

std::optional<double> EstimatorState::transition_estimate(StateIndex from, StateIndex to) const {
  const auto n = outgoing_count(from);
  if (n == 0) return std::nullopt;
  return static_cast<double>(transition_count(from, to)) / static_cast<double>(n);
}

void EstimatorState::record_slot(StateIndex revealed) {
  ++state_counts_[revealed];
  if (last_state_) ++transitions_[*last_state_ * num_states_ + revealed];
  last_state_ = revealed;
  ++t_;
}

void EstimatorState::record_sample(ArmIndex arm, StateIndex s, double reward) {
  ++samples_[arm * num_states_ + s];
  sums_[arm * num_states_ + s] += reward;
}

ValueTable value_estimates(const EstimatorState& est) {
  const std::size_t n_arms = est.num_arms();
  const std::size_t n_states = est.num_states();
  ValueTable out;
  out.values.assign(n_states, std::vector<double>(n_arms, 0.0));
  out.best.assign(n_states, 0.0);
  const double uniform = 1.0 / static_cast<double>(n_states);
  for (StateIndex s = 0; s < n_states; ++s) {
    for (ArmIndex i = 0; i < n_arms; ++i) {
      double v = 0.0;
      for (StateIndex next = 0; next < n_states; ++next) {
        const double p = est.transition_estimate(s, next).value_or(uniform);
        v += p * est.mean(i, next).value_or(0.0);
      }
      out.values[s][i] = v;
    }
    out.best[s] = *std::max_element(out.values[s].begin(), out.values[s].end());
  }
  return out;
}

std::vector<std::vector<double>> hardness_estimate(const ValueTable& values, const ConstantsBundle& consts) {
  std::vector<std::vector<double>> out(values.values.size());
  for (StateIndex s = 0; s < values.values.size(); ++s) {
    out[s].resize(values.values[s].size());
    for (ArmIndex i = 0; i < values.values[s].size(); ++i) {
      const double gap = values.best[s] - values.values[s][i];
      out[s][i] = 4.0 * consts.scale / std::max(consts.delta, gap * gap - consts.epsilon);
    }
  }
  return out;
}

std::vector<std::vector<double>> hardness_estimate(const EstimatorState& est, const ConstantsBundle& consts) {
  return hardness_estimate(value_estimates(est), consts);
}

std::vector<std::vector<double>> worst_case_hardness(std::size_t num_arms, std::size_t num_states,
                                                     const ConstantsBundle& consts) {
  return std::vector<std::vector<double>>(num_states, std::vector<double>(num_arms, consts.worst_hardness()));
}

// ---------------------------------------------------------------------------

std::uint64_t pow4(std::uint64_t k) {
  if (k >= 32) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << (2 * k);
}

Decision decide_epoch(const EstimatorState& est, const std::vector<std::vector<double>>& hardness,
                      const ConstantsBundle& consts, std::uint64_t t) {
  const double log_t = std::log(static_cast<double>(t));
  const double local_floor = consts.local_floor();

  std::optional<Decision> local;
  for (ArmIndex i = 0; i < est.num_arms(); ++i)
    for (StateIndex s = 0; s < est.num_states(); ++s) {
      const double threshold = std::max(hardness[s][i], local_floor) * log_t;
      const auto samples = static_cast<double>(est.samples(i, s));
      if (samples <= threshold) {
        const double deficit = threshold - samples;
        if (!local || deficit > local->deficit) local = Decision{DecisionKind::ExploreLocal, i, s, deficit};
      }
    }
  if (local) return *local;

  const double global_threshold = consts.global_floor() * log_t;
  for (StateIndex s = 0; s < est.num_states(); ++s) {
    if (static_cast<double>(est.state_count(s)) <= global_threshold) {
      ArmIndex easiest = 0;
      double easiest_value = std::numeric_limits<double>::infinity();
      for (ArmIndex i = 0; i < est.num_arms(); ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (StateIndex r = 0; r < est.num_states(); ++r) m = std::min(m, hardness[r][i]);
        if (m < easiest_value) {
          easiest_value = m;
          easiest = i;
        }
      }
      return Decision{DecisionKind::ExploreGlobal, easiest, s, 0.0};
    }
  }
  return Decision{};
}

void begin_exploration(EpochState& epoch, ArmIndex arm) {
  epoch.arm = arm;
  const auto k = ++epoch.explore_epochs[arm];
  epoch.sb1_elapsed = 0;
  if (k == 1 || !epoch.anchor[arm]) {
    epoch.phase = Phase::ExploreSB2;
    epoch.remaining = sb2_length(k);
  } else {
    epoch.phase = Phase::ExploreSB1;
    epoch.remaining = 0;
  }
}

void begin_exploitation(EpochState& epoch, std::vector<std::vector<double>> frozen_values) {
  const auto k = ++epoch.exploit_epochs;
  epoch.phase = Phase::Exploit;
  epoch.remaining = exploit_length(k);
  epoch.frozen = std::move(frozen_values);
}

ArmIndex exploit_step(EpochState& epoch, StateIndex s_prev) {
  const auto& row = epoch.frozen[s_prev];
  const auto arm = static_cast<ArmIndex>(std::max_element(row.begin(), row.end()) - row.begin());
  if (--epoch.remaining == 0) epoch.phase = Phase::Decide;
  return arm;
}

void update_on_observation(EstimatorState& est, const EpochState& epoch, const Feedback& fb) {
  if (epoch.phase == Phase::ExploreSB2 && fb.arm == epoch.arm) {
    est.record_sample(fb.arm, fb.revealed_state, fb.reward);
  }
  est.record_slot(fb.revealed_state);
}

bool advance_epoch(EpochState& epoch, const Feedback& fb, std::uint64_t watchdog_cap) {
  switch (epoch.phase) {
    case Phase::ExploreSB1: {
      const auto& anchor = *epoch.anchor[epoch.arm];
      ++epoch.sb1_elapsed;
      if (fb.revealed_state == anchor.state && fb.reward == anchor.reward) {
        epoch.phase = Phase::ExploreSB2;
        epoch.remaining = sb2_length(epoch.explore_epochs[epoch.arm]);
      } else if (epoch.sb1_elapsed >= watchdog_cap) {
        throw WatchdogAbort(fmt::format(
            "SB1 of arm {} (exploration epoch {}) missed its anchor (state {}, reward {}) for {} slots",
            epoch.arm + 1, epoch.explore_epochs[epoch.arm], anchor.state, anchor.reward, epoch.sb1_elapsed));
      }
      return false;
    }
    case Phase::ExploreSB2:
      if (--epoch.remaining == 0) {
        epoch.anchor[epoch.arm] = Anchor{fb.revealed_state, fb.reward};
        epoch.phase = Phase::Decide;
        return true;
      }
      return false;
    case Phase::Decide:
    case Phase::Exploit:
      return false;
  }
  return false;
}

// ---------------------------------------------------------------------------

EpochScheduledPolicy::EpochScheduledPolicy(SchedulerVariant variant, std::size_t num_arms, std::size_t num_states,
                                           ConstantsBundle consts, std::uint64_t watchdog_cap)
    : variant_(variant),
      consts_(consts),
      watchdog_cap_(watchdog_cap),
      est_(num_arms, num_states),
      epoch_(num_arms) {
  check_bundle(consts_);
  if (watchdog_cap_ == 0) throw ValidationError("sb1_watchdog_cap must be positive");
}

std::string_view EpochScheduledPolicy::name() const {
  switch (variant_) {
    case SchedulerVariant::Lemp:
      return "lemp";
    case SchedulerVariant::Dsee:
      return "dsee";
    case SchedulerVariant::BestAverage:
      return "best-average";
  }
  return "lemp";
}

std::vector<std::vector<double>> EpochScheduledPolicy::current_hardness() const {
  if (variant_ == SchedulerVariant::Dsee) return worst_case_hardness(est_.num_arms(), est_.num_states(), consts_);
  return hardness_estimate(est_, consts_);
}

std::vector<std::vector<double>> EpochScheduledPolicy::exploitation_table() const {
  auto table = value_estimates(est_).values;
  if (variant_ != SchedulerVariant::BestAverage) return table;
  // Occupancy-weighted value, identical in every row: the choice ignores the state.
  const std::size_t n_states = est_.num_states();
  const std::size_t n_arms = est_.num_arms();
  std::vector<double> averaged(n_arms, 0.0);
  for (StateIndex s = 0; s < n_states; ++s) {
    const double w = est_.t() > 0 ? static_cast<double>(est_.state_count(s)) / static_cast<double>(est_.t())
                                  : 1.0 / static_cast<double>(n_states);
    for (ArmIndex i = 0; i < n_arms; ++i) averaged[i] += w * table[s][i];
  }
  return std::vector<std::vector<double>>(n_states, averaged);
}

ArmIndex EpochScheduledPolicy::select(std::uint64_t t, StateIndex last_revealed) {
  if (epoch_.phase == Phase::Decide) {
    const auto decision = decide_epoch(est_, current_hardness(), consts_, t);
    EpochRecord rec;
    rec.start = t;
    if (decision.explores()) {
      begin_exploration(epoch_, decision.arm);
      rec.kind = EpochKind::Explore;
      rec.arm = decision.arm;
      rec.planned = sb2_length(epoch_.explore_epochs[decision.arm]);
    } else {
      begin_exploitation(epoch_, exploitation_table());
      rec.kind = EpochKind::Exploit;
      rec.planned = epoch_.remaining;
    }
    log_.push_back(rec);
  }

  auto& rec = log_.back();
  ++rec.length;
  switch (epoch_.phase) {
    case Phase::ExploreSB1:
      ++rec.sb1;
      return epoch_.arm;
    case Phase::ExploreSB2:
      ++rec.sb2;
      return epoch_.arm;
    case Phase::Exploit: {
      const auto arm = exploit_step(epoch_, last_revealed);
      if (epoch_.phase == Phase::Decide) rec.completed = true;
      return arm;
    }
    case Phase::Decide:
      break;
  }
  return 0;
}

void EpochScheduledPolicy::observe(const Feedback& feedback) {
  update_on_observation(est_, epoch_, feedback);
  if (advance_epoch(epoch_, feedback, watchdog_cap_)) log_.back().completed = true;
}

EpochCounters EpochScheduledPolicy::counters() const {
  EpochCounters c;
  for (auto n : epoch_.explore_epochs) c.explore_epochs += n;
  c.exploit_epochs = epoch_.exploit_epochs;
  return c;
}

}  // namespace rmab
