#pragma once

#include <memory>

#include "rmab/lemp.hpp"

namespace rmab {

/// LEMP exploration machinery; exploitation plays the single arm maximizing
/// sum_s (N_s / t) V_hat_s^i, ignoring the current global state.
std::unique_ptr<Policy> best_on_average_policy(std::size_t num_arms, std::size_t num_states,
                                               const ConstantsBundle& consts,
                                               std::uint64_t watchdog_cap = kDefaultWatchdogCap);

/// Extended DSEE: LEMP with every hardness estimate replaced by the
/// worst case 4L/Delta, so each (arm, state) threshold is
/// max(4L/Delta, 2/(eps^2 I_L)) log t.
std::unique_ptr<Policy> dsee_extended_policy(std::size_t num_arms, std::size_t num_states,
                                             const ConstantsBundle& consts,
                                             std::uint64_t watchdog_cap = kDefaultWatchdogCap);

std::unique_ptr<Policy> lemp_policy(std::size_t num_arms, std::size_t num_states, const ConstantsBundle& consts,
                                    std::uint64_t watchdog_cap = kDefaultWatchdogCap);

}  // namespace rmab
