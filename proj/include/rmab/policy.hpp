#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "rmab/environment.hpp"
#include "rmab/random.hpp"

namespace rmab {

/// The part of an Observation a learning policy is allowed to see.
struct Feedback {
  ArmIndex arm = 0;
  double reward = 0.0;
  StateIndex revealed_state = 0;
};

inline Feedback feedback_of(const Observation& obs) {
  return {obs.arm, obs.reward, obs.revealed_state};
}

enum class EpochKind { Explore, Exploit };

/// One epoch of an epoch-scheduled policy.  For exploration epochs `sb1`
/// and `sb2` are the slots actually spent in each sub-block; `length` is the
/// total.  `planned` is the nominal SB2 length (exploration) or epoch length
/// (exploitation).  `completed` is false only for an epoch cut by the horizon.
struct EpochRecord {
  EpochKind kind = EpochKind::Explore;
  ArmIndex arm = 0;
  std::uint64_t start = 0;  ///< first slot, 1-based
  std::uint64_t sb1 = 0;
  std::uint64_t sb2 = 0;
  std::uint64_t length = 0;
  std::uint64_t planned = 0;
  bool completed = false;
};

struct EpochCounters {
  std::uint64_t explore_epochs = 0;
  std::uint64_t exploit_epochs = 0;
};

class EstimatorState;

/// Selection rule phi(t).  `select` receives the 1-based slot index and the
/// global state revealed by the previous slot (the initial state at t = 1).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual ArmIndex select(std::uint64_t t, StateIndex last_revealed) = 0;
  virtual void observe(const Feedback& feedback) = 0;

  virtual EpochCounters counters() const { return {}; }
  virtual std::span<const EpochRecord> epochs() const { return {}; }
  virtual const EstimatorState* estimator() const { return nullptr; }
};

/// argmax_i V_{s_prev}^i.
ArmIndex genie_select(const ModelSummary& summary, StateIndex s_prev);

class GeniePolicy final : public Policy {
 public:
  explicit GeniePolicy(ModelSummary summary) : summary_(std::move(summary)) {}
  std::string_view name() const override { return "genie"; }
  ArmIndex select(std::uint64_t, StateIndex last_revealed) override {
    return genie_select(summary_, last_revealed);
  }
  void observe(const Feedback&) override {}

 private:
  ModelSummary summary_;
};

class UniformRandomPolicy final : public Policy {
 public:
  UniformRandomPolicy(std::size_t num_arms, std::uint64_t seed) : num_arms_(num_arms), rng_(seed) {}
  std::string_view name() const override { return "uniform-random"; }
  ArmIndex select(std::uint64_t, StateIndex) override;
  void observe(const Feedback&) override {}

 private:
  std::size_t num_arms_;
  RandomStream rng_;
};

}  // namespace rmab
