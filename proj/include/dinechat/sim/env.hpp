#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dinechat/config_file.hpp"
#include "dinechat/sim/workload.hpp"

namespace dinechat::sim {

enum class Action : int {
  kAddServer = 0,
  kRemoveServer = 1,
  kIncreaseDimmer = 2,
  kDecreaseDimmer = 3,
  kNoOp = 4,
};

inline constexpr int kNumActions = 5;

inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::kAddServer, Action::kRemoveServer, Action::kIncreaseDimmer,
    Action::kDecreaseDimmer, Action::kNoOp};

// Display names; these are the names the DINEs and prompts use.
std::string_view action_name(Action action);
std::optional<Action> action_from_name(std::string_view name);

inline constexpr int kNumChannels = 3;
inline constexpr std::array<std::string_view, kNumChannels> kChannelNames = {
    "User Satisfaction", "Revenue", "Costs"};

struct RewardWeights {
  double user_satisfaction = 1.0;
  double revenue = 1.0;
  double costs = 1.0;

  bool operator==(const RewardWeights&) const = default;
};

struct RewardVector {
  double user_satisfaction = 0.0;
  double revenue = 0.0;
  double costs = 0.0;
  RewardWeights weights;

  double total() const {
    return weights.user_satisfaction * user_satisfaction + weights.revenue * revenue +
           weights.costs * costs;
  }
  // Channel values multiplied by their weight; they sum to total().
  std::array<double, kNumChannels> weighted_channels() const {
    return {weights.user_satisfaction * user_satisfaction, weights.revenue * revenue,
            weights.costs * costs};
  }

  bool operator==(const RewardVector&) const = default;
};

struct EnvConfig {
  int min_servers = 1;
  int max_servers = 10;
  double dimmer_step = 0.1;
  double initial_dimmer = 0.5;
  double base_service_time = 0.04;            // s_base, seconds
  double recommendation_service_time = 0.02;  // s_rec, seconds
  double response_threshold = 0.5;            // r_thresh, seconds
  double response_cap = 10.0;                 // r_cap, seconds
  double revenue_per_request = 0.01;          // c_rev
  double cost_per_server = 0.1;               // c_srv
  RewardWeights weights;
  // Relative amplitude of the seeded per-timestep workload jitter.
  double arrival_jitter = 0.05;
  // Upper bound used to normalise arrival rates into agent features.
  double max_arrival_rate = 50.0;
  int episode_length = 200;

  void validate() const;
  static EnvConfig from_config(const KeyValueConfig& config);
};

struct EnvState {
  double arrival_rate = 0.0;
  int servers = 1;
  double dimmer = 0.5;
  double response_time = 0.0;
  double utilization = 0.0;
  int timestep = 0;

  bool operator==(const EnvState&) const = default;
};

struct StepResult {
  EnvState state;
  RewardVector reward;
};

// Discrete-time webshop: each step applies one adaptation, advances one
// simulated minute and evaluates an aggregated M/M/1-style latency model
// against the arrival rate of the new timestep.
class WebshopEnv {
 public:
  explicit WebshopEnv(EnvConfig config = {});

  // Starts an episode. The seed drives the per-timestep workload jitter.
  EnvState reset(std::uint64_t seed, WorkloadTrace trace);

  // Pure in (state, action) given the episode context set by reset().
  StepResult step(const EnvState& state, Action action) const;

  // Latency/utilisation for a given configuration, without reward.
  EnvState evaluate(double arrival_rate, int servers, double dimmer, int timestep) const;
  RewardVector reward(const EnvState& state) const;

  double service_time(double dimmer) const;
  double arrival_rate_at(int timestep) const;

  const EnvConfig& config() const { return config_; }
  const WorkloadTrace& trace() const { return trace_; }
  std::uint64_t seed() const { return seed_; }

 private:
  EnvConfig config_;
  WorkloadTrace trace_;
  std::uint64_t seed_ = 0;
};

}  // namespace dinechat::sim
