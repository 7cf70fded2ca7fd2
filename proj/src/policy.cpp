#include "rmab/policy.hpp"

#include <algorithm>

#include "rmab/baselines.hpp"

namespace rmab {

ArmIndex genie_select(const ModelSummary& summary, StateIndex s_prev) {
  return summary.best_arm[s_prev];
}

ArmIndex UniformRandomPolicy::select(std::uint64_t, StateIndex) {
  const auto arm = static_cast<ArmIndex>(uniform01(rng_) * static_cast<double>(num_arms_));
  return std::min(arm, num_arms_ - 1);
}

std::unique_ptr<Policy> best_on_average_policy(std::size_t num_arms, std::size_t num_states,
                                               const ConstantsBundle& consts, std::uint64_t watchdog_cap) {
  return std::make_unique<EpochScheduledPolicy>(SchedulerVariant::BestAverage, num_arms, num_states, consts,
                                                watchdog_cap);
}

std::unique_ptr<Policy> dsee_extended_policy(std::size_t num_arms, std::size_t num_states,
                                             const ConstantsBundle& consts, std::uint64_t watchdog_cap) {
  return std::make_unique<EpochScheduledPolicy>(SchedulerVariant::Dsee, num_arms, num_states, consts,
                                                watchdog_cap);
}

std::unique_ptr<Policy> lemp_policy(std::size_t num_arms, std::size_t num_states, const ConstantsBundle& consts,
                                    std::uint64_t watchdog_cap) {
  return std::make_unique<EpochScheduledPolicy>(SchedulerVariant::Lemp, num_arms, num_states, consts,
                                                watchdog_cap);
}

}  // namespace rmab
