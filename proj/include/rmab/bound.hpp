#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rmab/environment.hpp"
#include "rmab/lemp.hpp"

namespace rmab {

/// Everything the finite-sample regret bound depends on, computed from the
/// true model plus the constants bundle the learner runs with.
struct BoundInputs {
  std::size_t num_arms = 0;
  std::size_t num_states = 0;
  double x_max = 0.0;
  std::size_t x_states_max = 0;
  double pi_min = 0.0;       ///< min over (s, i, x) of pi_s^i(x)
  double pi_hat_max = 0.0;   ///< max over (s, i, x) of max(pi, 1 - pi)
  double lambda_max = 0.0;   ///< max SLEM over reward chains
  double lambda_bar_min = 0.0;
  std::vector<std::vector<double>> lambda_bar;   ///< [i][s], 1 - SLEM
  std::vector<std::vector<double>> hitting_max;  ///< [i][s], max_{x != y} M_{x,y}
  std::vector<double> hitting_max_arm;           ///< [i], max over s
  std::vector<double> global_stationary;
  std::vector<std::vector<double>> values;       ///< [s][i]
  std::vector<double> best_value;
  std::vector<ArmIndex> best_arm;
  std::vector<std::vector<double>> gap_sq;       ///< [s][i]
  std::vector<double> min_gap_sq_per_state;      ///< Delta_s
  double delta = 0.0;
  double epsilon = 0.0;
  double scale = 0.0;        ///< L
  double local_rate = 0.0;   ///< I_L
  double global_rate = 0.0;  ///< I_G
};

BoundInputs make_bound_inputs(const BanditModel& model, const ModelSummary& summary,
                              const ConstantsBundle& consts);

/// member[s][i]: arm i is suboptimal in s and (V*_s - V_s^i)^2 - 2 eps > Delta_s.
std::vector<std::vector<bool>> classify_K(const BoundInputs& inputs);

/// True when eps < min_s Delta_s / 2 (the recommended regime).
bool epsilon_in_recommended_range(const BoundInputs& inputs);

/// A_i = max(2/I_L, 2/I_G, max_s 4L / ((V*_s - V_s^i)^2 - 2 eps)) if i is in
/// K_s for every s, otherwise max(2/I_L, 2/I_G, 4L / Delta).
double compute_A(ArmIndex arm, const BoundInputs& inputs);

struct BoundValue {
  double value = 0.0;          ///< numeric bound, additive O(1) excluded
  double exploration = 0.0;    ///< x_max * sum_i (per-arm terms)
  double exploitation = 0.0;   ///< x_max * (global ceiling term)
};

/// The O(1) term is not quantified and never enters `value`.
inline constexpr std::string_view kBoundConstantNote = "unquantified additive constant O(1) excluded";

/// x_max [ sum_i ((1/3)(4(3 A_i log t + 1) - 1) + M^i_max log_4(3 A_i log t + 1))
///         + 6 N |S| (|S| |X_max| / pi_min + 2 |S|) max_s pi_s ceil(log_4(1.5 t + 1)) ]
BoundValue regret_bound(std::uint64_t t, const BoundInputs& inputs);
BoundValue regret_bound(double t, const BoundInputs& inputs);

/// x_max sum_i 4 A_i: coefficient of log t contributed by the per-arm terms.
double bound_log_coefficient(const BoundInputs& inputs);

}  // namespace rmab
