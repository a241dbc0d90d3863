#pragma once

#include <string>
#include <vector>

#include "dinechat/rl/qtable.hpp"
#include "dinechat/sim/env.hpp"

namespace dinechat::dine {

using rl::ChannelActionTable;

// One agent decision with its DINEs.
struct TimestepRecord {
  int timestep = 0;
  sim::EnvState state;
  std::string chosen_action;
  ChannelActionTable q_values;
  sim::RewardVector reward;
  // Relative Reward Channel Dominance: per-channel Q minus the channel minimum.
  ChannelActionTable dominance;
  double uncertainty_score = 0.0;
  bool uncertain = false;

  std::size_t chosen_index() const;
  bool operator==(const TimestepRecord&) const = default;
};

// A recorded rollout: the unit of explanation context.
struct DecisionTrace {
  std::string trace_id;
  std::string description;
  std::string checkpoint;
  std::vector<TimestepRecord> records;

  int first_timestep() const { return records.front().timestep; }
  int last_timestep() const { return records.back().timestep; }
  bool operator==(const DecisionTrace&) const = default;
};

// Throws ConfigError unless timesteps are strictly increasing from 0.
void validate_trace(const DecisionTrace& trace);

}  // namespace dinechat::dine
