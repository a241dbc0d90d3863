#pragma once

#include <cstdint>
#include <string>

#include "dinechat/dine/dominance.hpp"
#include "dinechat/dine/record.hpp"
#include "dinechat/rl/agent.hpp"

namespace dinechat::dine {

struct RolloutOptions {
  int steps = 21;
  // Greedy steps taken before recording starts; recorded timesteps still
  // count from 0.
  int warmup = 0;
  std::uint64_t seed = 0;
  double uncertainty_threshold = kDefaultUncertaintyThreshold;
  std::string trace_id;
  std::string description;
  std::string checkpoint;
};

// Greedy rollout of a trained agent with DINEs computed at every decision.
// Each record holds the state the decision was taken in and the reward the
// decision earned.
DecisionTrace rollout_and_record(const rl::DecomposedDqn& agent,
                                 const sim::WorkloadTrace& workload,
                                 const RolloutOptions& options);

// Builds a record from a decision's Q table (greedy choice).
TimestepRecord make_record(int timestep, const sim::EnvState& state,
                           const rl::ChannelActionTable& q_values,
                           const sim::RewardVector& reward, double uncertainty_threshold);

}  // namespace dinechat::dine
