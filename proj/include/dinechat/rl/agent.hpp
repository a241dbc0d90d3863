#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dinechat/config_file.hpp"
#include "dinechat/nn/mlp.hpp"
#include "dinechat/rl/qtable.hpp"
#include "dinechat/rl/replay_buffer.hpp"
#include "dinechat/sim/env.hpp"

namespace dinechat::rl {

enum class RewardChannels {
  kDecomposed,  // one Q head per reward channel
  kTotal,       // a single head on the weighted total reward
};

struct AgentConfig {
  double discount = 0.9;
  double learning_rate = 1e-3;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 20000;
  int target_sync_interval = 500;  // in updates
  int batch_size = 32;
  int replay_capacity = 20000;
  int warmup_steps = 500;
  int train_interval = 1;  // env steps per update
  double grad_clip_norm = 10.0;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 0;
  RewardChannels channels = RewardChannels::kDecomposed;
  nn::KernelPolicy kernel_policy = nn::KernelPolicy::kSerial;

  void validate() const;
  double epsilon_at(long long env_step) const;
  static AgentConfig from_config(const KeyValueConfig& config);
};

inline constexpr int kNumFeatures = 5;

// Min-max normalised features: arrival rate, servers, dimmer, response time,
// utilisation.
std::array<double, kNumFeatures> state_features(const sim::EnvState& state,
                                                const sim::EnvConfig& env);

struct ActionChoice {
  sim::Action action = sim::Action::kNoOp;
  ChannelActionTable q_values;
  bool explored = false;
};

// Double DQN with experience replay and a shared trunk whose output layer
// holds one Q head per reward channel. Actions are chosen greedily on the
// channel sum.
class DecomposedDqn {
 public:
  DecomposedDqn(AgentConfig config, sim::EnvConfig env_config);
  // Restores a trained agent; the target network is set to the online one.
  DecomposedDqn(AgentConfig config, sim::EnvConfig env_config, nn::Mlp online);

  ChannelActionTable q_values(const sim::EnvState& state) const;
  ActionChoice greedy_action(const sim::EnvState& state) const;
  // Uniform random action with probability epsilon, else greedy.
  ActionChoice explore_action(const sim::EnvState& state, double epsilon);

  // One gradient step on the decomposed Double DQN targets. Returns the
  // batch loss: mean over samples of squared errors summed over channels.
  double update(std::span<const Transition> batch);

  std::vector<double> channel_rewards(const sim::RewardVector& reward) const;
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  static std::vector<std::string> action_names();

  const nn::Mlp& online() const { return online_; }
  const nn::Mlp& target() const { return target_; }
  const AgentConfig& config() const { return config_; }
  const sim::EnvConfig& env_config() const { return env_config_; }
  long long updates() const { return updates_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  nn::Matrix features(std::span<const Transition> batch, bool next) const;

  AgentConfig config_;
  sim::EnvConfig env_config_;
  std::vector<std::string> channel_names_;
  nn::Mlp online_;
  nn::Mlp target_;
  std::mt19937_64 rng_;
  long long updates_ = 0;
};

}  // namespace dinechat::rl
