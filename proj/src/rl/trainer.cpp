#include "dinechat/rl/trainer.hpp"

#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "dinechat/error.hpp"

namespace dinechat::rl {

std::uint64_t episode_seed(std::uint64_t agent_seed, int episode) {
  return agent_seed * 1000003ULL + static_cast<std::uint64_t>(episode);
}

namespace {

void accumulate(EpisodeLog& entry, const sim::RewardVector& r) {
  const auto w = r.weighted_channels();
  for (int c = 0; c < sim::kNumChannels; ++c) entry.return_channels[c] += w[c];
  entry.return_total += r.total();
}

}  // namespace

TrainingResult train(const sim::EnvConfig& env_config, const sim::WorkloadTrace& trace,
                     int episodes, const AgentConfig& config) {
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  TrainingResult result{DecomposedDqn(config, env_config), {}};
  DecomposedDqn& agent = result.agent;
  sim::WebshopEnv env(env_config);
  ReplayBuffer buffer(static_cast<std::size_t>(config.replay_capacity));
  long long env_steps = 0;

  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeLog entry;
    entry.episode = ep;
    double loss_sum = 0.0;
    long long loss_count = 0;
    sim::EnvState state = env.reset(episode_seed(config.seed, ep), trace);
    for (int t = 0; t < env_config.episode_length; ++t) {
      const double epsilon = config.epsilon_at(env_steps);
      entry.epsilon = epsilon;
      const auto choice = agent.explore_action(state, epsilon);
      const auto step = env.step(state, choice.action);
      accumulate(entry, step.reward);
      const bool done = t + 1 == env_config.episode_length;
      buffer.push({state, static_cast<int>(choice.action), step.reward, step.state, done});
      state = step.state;
      ++env_steps;
      if (env_steps >= config.warmup_steps && env_steps % config.train_interval == 0) {
        const auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), agent.rng());
        loss_sum += agent.update(batch);
        ++loss_count;
      }
    }
    entry.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    entry.updates = agent.updates();
    result.log.push_back(entry);
  }
  return result;
}

std::vector<EpisodeLog> run_random_policy(const sim::EnvConfig& env_config,
                                          const sim::WorkloadTrace& trace,
                                          int first_episode, int episodes,
                                          std::uint64_t seed) {
  sim::WebshopEnv env(env_config);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> pick(0, sim::kNumActions - 1);
  std::vector<EpisodeLog> log;
  for (int ep = first_episode; ep < first_episode + episodes; ++ep) {
    EpisodeLog entry;
    entry.episode = ep;
    entry.epsilon = 1.0;
    sim::EnvState state = env.reset(episode_seed(seed, ep), trace);
    for (int t = 0; t < env_config.episode_length; ++t) {
      const auto step = env.step(state, static_cast<sim::Action>(pick(rng)));
      accumulate(entry, step.reward);
      state = step.state;
    }
    log.push_back(entry);
  }
  return log;
}

double mean_tail_return(const std::vector<EpisodeLog>& log, std::size_t window) {
  if (log.empty()) return 0.0;
  const std::size_t n = std::min(window, log.size());
  double sum = 0.0;
  for (std::size_t i = log.size() - n; i < log.size(); ++i) sum += log[i].return_total;
  return sum / static_cast<double>(n);
}

std::string episode_log_to_json(const EpisodeLog& e) {
  nlohmann::ordered_json j;
  j["episode"] = e.episode;
  j["return_total"] = e.return_total;
  nlohmann::ordered_json channels;
  for (int c = 0; c < sim::kNumChannels; ++c) {
    channels[std::string(sim::kChannelNames[c])] = e.return_channels[c];
  }
  j["return_channels"] = channels;
  j["epsilon"] = e.epsilon;
  j["mean_loss"] = e.mean_loss;
  j["updates"] = e.updates;
  return j.dump();
}

void write_training_log(const std::vector<EpisodeLog>& log, std::ostream& out) {
  for (const auto& e : log) out << episode_log_to_json(e) << '\n';
}

}  // namespace dinechat::rl
