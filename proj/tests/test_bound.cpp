#include "doctest.h"

#include <cmath>

#include "rmab/bound.hpp"
#include "rmab/errors.hpp"
#include "rmab/scenario.hpp"
#include "test_support.hpp"

using namespace rmab;

namespace {

using Rows = std::vector<std::vector<double>>;

/// One global state, values given directly; everything else neutral.
BoundInputs synthetic(std::vector<double> values, double epsilon, double scale = 1.0, double delta = 0.1,
                      double rate = 1e9) {
  BoundInputs in;
  in.num_arms = values.size();
  in.num_states = 1;
  in.values = {values};
  const auto best = std::max_element(values.begin(), values.end());
  in.best_value = {*best};
  in.best_arm = {static_cast<ArmIndex>(best - values.begin())};
  in.gap_sq = {std::vector<double>(values.size())};
  double smallest = INFINITY;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = *best - values[i];
    in.gap_sq[0][i] = g * g;
    if (static_cast<ArmIndex>(i) != in.best_arm[0]) smallest = std::min(smallest, g * g);
  }
  in.min_gap_sq_per_state = {smallest};
  in.epsilon = epsilon;
  in.scale = scale;
  in.delta = delta;
  in.local_rate = rate;
  in.global_rate = rate;
  in.x_max = 1.0;
  in.x_states_max = 1;
  in.pi_min = 1.0;
  in.global_stationary = {1.0};
  in.hitting_max_arm.assign(values.size(), 0.0);
  return in;
}

BoundInputs preset_inputs() {
  const auto sc = preset_gilbert_elliott_fsmc();
  const auto summary = summarize(sc.model);
  return make_bound_inputs(sc.model, summary, oracle_constants(sc.model, summary));
}

/// Direct transcription of the bound for cross-checking.
double bound_oracle(double t, const BoundInputs& in) {
  double sum = 0.0;
  for (ArmIndex i = 0; i < in.num_arms; ++i) {
    const double x = 3.0 * compute_A(i, in) * std::log(t) + 1.0;
    sum += (1.0 / 3.0) * (4.0 * x - 1.0) + in.hitting_max_arm[i] * std::log2(x) / 2.0;
  }
  double pmax = 0.0;
  for (double p : in.global_stationary) pmax = std::max(pmax, p);
  const double n = static_cast<double>(in.num_arms), s = static_cast<double>(in.num_states);
  double ceil_log4 = 0.0;
  while (std::pow(4.0, ceil_log4) < 1.5 * t + 1.0) ceil_log4 += 1.0;
  sum += 6.0 * n * s * (s * static_cast<double>(in.x_states_max) / in.pi_min + 2.0 * s) * pmax * ceil_log4;
  return in.x_max * sum;
}

}  // namespace

TEST_CASE("classify_K") {
  SUBCASE("eps = 0 drops only the minimum-gap arms") {
    const auto in = synthetic({3.0, 2.0, 1.0, 2.0, 0.5}, 0.0);
    const auto k = classify_K(in);
    CHECK_FALSE(k[0][0]);
    CHECK_FALSE(k[0][1]);
    CHECK(k[0][2]);
    CHECK_FALSE(k[0][3]);
    CHECK(k[0][4]);
  }
  SUBCASE("0.25 - 2 * 0.05 > 0.1") {
    // gaps^2: 0.25 and 0.1.
    const auto in = synthetic({1.0, 0.5, 1.0 - std::sqrt(0.1)}, 0.05);
    CHECK(in.gap_sq[0][1] == doctest::Approx(0.25));
    CHECK(in.min_gap_sq_per_state[0] == doctest::Approx(0.1));
    const auto k = classify_K(in);
    CHECK(k[0][1]);
    CHECK_FALSE(k[0][2]);
    CHECK_FALSE(k[0][0]);
  }
  SUBCASE("the best arm is never in K on the preset") {
    const auto in = preset_inputs();
    const auto k = classify_K(in);
    for (StateIndex s = 0; s < in.num_states; ++s) CHECK_FALSE(k[s][in.best_arm[s]]);
  }
}

TEST_CASE("compute_A") {
  SUBCASE("arm outside some K_s takes the worst-case branch") {
    auto in = synthetic({1.0, 0.5, 0.4}, 0.0, 1.0, 0.1, 0.5);
    // Arm 1 has the minimum gap and is not in K; 4L/Delta = 40 > 2/I = 4.
    CHECK(compute_A(1, in) == doctest::Approx(40.0));
    in.local_rate = 0.01;
    CHECK(compute_A(1, in) == doctest::Approx(200.0));
  }
  SUBCASE("equal rates, 4L/Delta dominant") {
    const auto in = synthetic({1.0, 0.5}, 0.0, 1.0, 0.1, 100.0);
    CHECK(compute_A(0, in) == doctest::Approx(40.0));
  }
  SUBCASE("single state, gap^2 - 2 eps = 0.2 gives 20") {
    // Arm 1 gap^2 = 0.3, eps = 0.05; arm 2 is the minimum-gap arm (gap^2 0.01).
    auto in = synthetic({1.0, 1.0 - std::sqrt(0.3), 0.9}, 0.05, 1.0, 0.01, 1e9);
    REQUIRE(classify_K(in)[0][1]);
    CHECK(compute_A(1, in) == doctest::Approx(20.0));
    in.local_rate = 0.05;  // 2 / I_L = 40 now dominates
    CHECK(compute_A(1, in) == doctest::Approx(40.0));
  }
  SUBCASE("eps = 0 reduces to max_s 4L / gap^2") {
    const auto in = synthetic({2.0, 1.0, 1.5, 0.2}, 0.0, 3.0, 0.01, 1e9);
    const auto k = classify_K(in);
    for (ArmIndex i : {ArmIndex{1}, ArmIndex{3}}) {
      REQUIRE(k[0][i]);
      CHECK(compute_A(i, in) == doctest::Approx(4.0 * 3.0 / in.gap_sq[0][i]));
    }
  }
  SUBCASE("nonpositive denominator names the arm") {
    auto in = synthetic({1.0, 0.0, 0.9}, 0.0);
    in.min_gap_sq_per_state[0] = -1.0;  // force membership with a huge eps
    in.epsilon = 0.1;
    in.gap_sq[0][1] = 0.15;
    CHECK_THROWS_WITH_AS(compute_A(1, in), doctest::Contains("arm 2"), ValidationError);
  }
}

TEST_CASE("make_bound_inputs on the preset") {
  const auto in = preset_inputs();
  CHECK(in.num_arms == 3);
  CHECK(in.num_states == 2);
  CHECK(in.x_max == 2.6);
  CHECK(in.x_states_max == 3);
  CHECK(in.lambda_bar_min == doctest::Approx(1.0 - in.lambda_max));
  // Arm A state 0 chain (0.7, 0.3; 0.2, 0.8): SLEM 0.5, pi = (0.4, 0.6), hitting 1/0.3 and 1/0.2.
  CHECK(in.lambda_bar[0][0] == doctest::Approx(0.5));
  CHECK(in.hitting_max[0][0] == doctest::Approx(5.0));
  for (ArmIndex i = 0; i < 3; ++i) {
    double m = 0.0;
    for (StateIndex s = 0; s < 2; ++s) m = std::max(m, in.hitting_max[i][s]);
    CHECK(in.hitting_max_arm[i] == m);
  }
  CHECK(in.pi_min > 0.0);
  CHECK(in.pi_hat_max < 1.0);
  CHECK(epsilon_in_recommended_range(in));
}

TEST_CASE("regret_bound") {
  const auto in = preset_inputs();
  SUBCASE("t = 1") {
    const auto b = regret_bound(std::uint64_t{1}, in);
    const double pmax = std::max(in.global_stationary[0], in.global_stationary[1]);
    const double ceiling = 6.0 * 3 * 2 * (2.0 * 3 / in.pi_min + 4.0) * pmax * 1.0;
    CHECK(b.exploration == doctest::Approx(in.x_max * 3.0));
    CHECK(b.exploitation == doctest::Approx(in.x_max * ceiling));
    CHECK(b.value == doctest::Approx(b.exploration + b.exploitation));
  }
  SUBCASE("matches a direct transcription") {
    for (double t : {1.0, 2.0, 7.0, 100.0, 12345.0, 1e6, 1e9}) {
      CHECK(regret_bound(t, in).value == doctest::Approx(bound_oracle(t, in)).epsilon(1e-12));
    }
  }
  SUBCASE("monotone in t") {
    double prev = 0.0;
    for (std::uint64_t t = 1; t < 2'000'000; t = t * 11 / 10 + 1) {
      const double v = regret_bound(t, in).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
  SUBCASE("log-t slope at 10^12") {
    const double t = 1e12;
    const double limit = bound_log_coefficient(in);
    double sum = 0.0;
    for (ArmIndex i = 0; i < 3; ++i) sum += 4.0 * compute_A(i, in);
    CHECK(limit == doctest::Approx(in.x_max * sum));
    CHECK(std::abs(regret_bound(t, in).value / std::log(t) - limit) / limit < 0.05);
  }
}
