#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dinechat/rl/agent.hpp"
#include "dinechat/sim/env.hpp"

namespace dinechat::rl {

struct EpisodeLog {
  int episode = 0;
  double return_total = 0.0;
  // Undiscounted weighted returns per reward channel, in kChannelNames order.
  std::array<double, sim::kNumChannels> return_channels{};
  double epsilon = 0.0;
  double mean_loss = 0.0;
  long long updates = 0;

  bool operator==(const EpisodeLog&) const = default;
};

struct TrainingResult {
  DecomposedDqn agent;
  std::vector<EpisodeLog> log;
};

// Seed of the environment for a given training episode.
std::uint64_t episode_seed(std::uint64_t agent_seed, int episode);

TrainingResult train(const sim::EnvConfig& env_config, const sim::WorkloadTrace& trace,
                     int episodes, const AgentConfig& config);

// Uniform random policy over the same episode seeds train() uses.
std::vector<EpisodeLog> run_random_policy(const sim::EnvConfig& env_config,
                                          const sim::WorkloadTrace& trace,
                                          int first_episode, int episodes,
                                          std::uint64_t seed);

// Mean total return over the last `window` entries.
double mean_tail_return(const std::vector<EpisodeLog>& log, std::size_t window);

std::string episode_log_to_json(const EpisodeLog& entry);
void write_training_log(const std::vector<EpisodeLog>& log, std::ostream& out);

}  // namespace dinechat::rl
