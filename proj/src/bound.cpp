#include "rmab/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rmab/errors.hpp"

namespace rmab {

BoundInputs make_bound_inputs(const BanditModel& model, const ModelSummary& summary,
                              const ConstantsBundle& consts) {
  BoundInputs in;
  in.num_arms = model.num_arms();
  in.num_states = model.num_states();
  in.pi_min = std::numeric_limits<double>::infinity();
  in.lambda_bar.assign(in.num_arms, std::vector<double>(in.num_states, 0.0));
  in.hitting_max.assign(in.num_arms, std::vector<double>(in.num_states, 0.0));
  in.hitting_max_arm.assign(in.num_arms, 0.0);
  for (ArmIndex i = 0; i < in.num_arms; ++i)
    for (StateIndex s = 0; s < in.num_states; ++s) {
      const auto& chain = model.chain(i, s);
      const auto analysis = analyze(chain.transition);
      in.x_max = std::max(in.x_max, *std::max_element(chain.rewards.begin(), chain.rewards.end()));
      in.x_states_max = std::max(in.x_states_max, chain.rewards.size());
      for (double p : analysis.stationary) {
        in.pi_min = std::min(in.pi_min, p);
        in.pi_hat_max = std::max({in.pi_hat_max, p, 1.0 - p});
      }
      in.lambda_max = std::max(in.lambda_max, analysis.slem);
      in.lambda_bar[i][s] = 1.0 - analysis.slem;
      double m = 0.0;
      for (std::size_t x = 0; x < analysis.hitting.size(); ++x)
        for (std::size_t y = 0; y < analysis.hitting.size(); ++y)
          if (x != y) m = std::max(m, analysis.hitting[x][y]);
      in.hitting_max[i][s] = m;
      in.hitting_max_arm[i] = std::max(in.hitting_max_arm[i], m);
    }
  in.lambda_bar_min = 1.0 - in.lambda_max;
  in.global_stationary = summary.global_stationary;
  in.values = summary.values;
  in.best_value = summary.best_value;
  in.best_arm = summary.best_arm;
  in.gap_sq = summary.gap_sq;
  in.min_gap_sq_per_state = summary.min_gap_sq_per_state;
  in.delta = consts.delta;
  in.epsilon = consts.epsilon;
  in.scale = consts.scale;
  in.local_rate = consts.local_rate;
  in.global_rate = consts.global_rate;
  return in;
}

std::vector<std::vector<bool>> classify_K(const BoundInputs& in) {
  std::vector<std::vector<bool>> member(in.num_states, std::vector<bool>(in.num_arms, false));
  for (StateIndex s = 0; s < in.num_states; ++s)
    for (ArmIndex i = 0; i < in.num_arms; ++i)
      member[s][i] = i != in.best_arm[s] && in.gap_sq[s][i] - 2.0 * in.epsilon > in.min_gap_sq_per_state[s];
  return member;
}

bool epsilon_in_recommended_range(const BoundInputs& in) {
  const double smallest = *std::min_element(in.min_gap_sq_per_state.begin(), in.min_gap_sq_per_state.end());
  return in.epsilon < smallest / 2.0;
}

double compute_A(ArmIndex arm, const BoundInputs& in) {
  const auto k = classify_K(in);
  const double floor_term = std::max(2.0 / in.local_rate, 2.0 / in.global_rate);
  bool in_every_state = true;
  for (StateIndex s = 0; s < in.num_states; ++s) in_every_state = in_every_state && k[s][arm];
  if (!in_every_state) return std::max(floor_term, 4.0 * in.scale / in.delta);

  double hardest = 0.0;
  for (StateIndex s = 0; s < in.num_states; ++s) {
    const double denom = in.gap_sq[s][arm] - 2.0 * in.epsilon;
    if (!(denom > 0.0)) {
      throw ValidationError(fmt::format("compute_A: nonpositive denominator {} for arm {} state {}", denom, arm + 1, s));
    }
    hardest = std::max(hardest, 4.0 * in.scale / denom);
  }
  return std::max(floor_term, hardest);
}

BoundValue regret_bound(double t, const BoundInputs& in) {
  const double log_t = std::log(t);
  const double ln4 = std::log(4.0);
  double per_arm = 0.0;
  for (ArmIndex i = 0; i < in.num_arms; ++i) {
    const double a = compute_A(i, in);
    const double inner = 3.0 * a * log_t + 1.0;
    per_arm += (4.0 * inner - 1.0) / 3.0 + in.hitting_max_arm[i] * std::log(inner) / ln4;
  }
  const auto n = static_cast<double>(in.num_arms);
  const auto s = static_cast<double>(in.num_states);
  const double pi_s_max = *std::max_element(in.global_stationary.begin(), in.global_stationary.end());
  const double global = 6.0 * n * s * (s * static_cast<double>(in.x_states_max) / in.pi_min + 2.0 * s) *
                        pi_s_max * std::ceil(std::log(1.5 * t + 1.0) / ln4);
  BoundValue out;
  out.exploration = in.x_max * per_arm;
  out.exploitation = in.x_max * global;
  out.value = out.exploration + out.exploitation;
  return out;
}

BoundValue regret_bound(std::uint64_t t, const BoundInputs& in) {
  return regret_bound(static_cast<double>(t), in);
}

double bound_log_coefficient(const BoundInputs& in) {
  double sum = 0.0;
  for (ArmIndex i = 0; i < in.num_arms; ++i) sum += 4.0 * compute_A(i, in);
  return in.x_max * sum;
}

}  // namespace rmab
