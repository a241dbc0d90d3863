#include "dinechat/rl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dinechat/error.hpp"

namespace dinechat::rl {
namespace {

std::vector<int> parse_widths(const std::string& text) {
  std::vector<int> widths;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      widths.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("agent.hidden must be a comma-separated list, got '" + text + "'");
    }
  }
  return widths;
}

}  // namespace

void AgentConfig::validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("discount must be in [0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0) {
    throw ConfigError("epsilon bounds must be in [0, 1]");
  }
  if (epsilon_decay_steps < 0) throw ConfigError("epsilon_decay_steps must be >= 0");
  if (target_sync_interval <= 0) throw ConfigError("target_sync_interval must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (replay_capacity <= 0) throw ConfigError("replay_capacity must be positive");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
  if (train_interval <= 0) throw ConfigError("train_interval must be positive");
  if (!(grad_clip_norm > 0.0)) throw ConfigError("grad_clip_norm must be positive");
}

double AgentConfig::epsilon_at(long long env_step) const {
  if (epsilon_decay_steps == 0 || env_step >= epsilon_decay_steps) return epsilon_end;
  const double frac = static_cast<double>(env_step) / epsilon_decay_steps;
  return epsilon_start + frac * (epsilon_end - epsilon_start);
}

AgentConfig AgentConfig::from_config(const KeyValueConfig& c) {
  AgentConfig a;
  a.discount = c.get_double("agent.discount", a.discount);
  a.learning_rate = c.get_double("agent.learning_rate", a.learning_rate);
  a.epsilon_start = c.get_double("agent.epsilon_start", a.epsilon_start);
  a.epsilon_end = c.get_double("agent.epsilon_end", a.epsilon_end);
  a.epsilon_decay_steps =
      static_cast<int>(c.get_int("agent.epsilon_decay_steps", a.epsilon_decay_steps));
  a.target_sync_interval =
      static_cast<int>(c.get_int("agent.target_sync_interval", a.target_sync_interval));
  a.batch_size = static_cast<int>(c.get_int("agent.batch_size", a.batch_size));
  a.replay_capacity = static_cast<int>(c.get_int("agent.replay_capacity", a.replay_capacity));
  a.warmup_steps = static_cast<int>(c.get_int("agent.warmup_steps", a.warmup_steps));
  a.train_interval = static_cast<int>(c.get_int("agent.train_interval", a.train_interval));
  a.grad_clip_norm = c.get_double("agent.grad_clip_norm", a.grad_clip_norm);
  if (auto hidden = c.get("agent.hidden")) a.hidden = parse_widths(*hidden);
  a.seed = static_cast<std::uint64_t>(c.get_int("agent.seed", 0));
  const std::string channels = c.get_string("agent.channels", "decomposed");
  if (channels == "decomposed") {
    a.channels = RewardChannels::kDecomposed;
  } else if (channels == "total") {
    a.channels = RewardChannels::kTotal;
  } else {
    throw ConfigError("agent.channels must be 'decomposed' or 'total'");
  }
  a.kernel_policy = nn::parse_kernel_policy(c.get_string("agent.kernel_policy", "serial"));
  a.validate();
  return a;
}

std::array<double, kNumFeatures> state_features(const sim::EnvState& s,
                                                const sim::EnvConfig& env) {
  const int server_span = env.max_servers - env.min_servers;
  return {
      std::clamp(s.arrival_rate / env.max_arrival_rate, 0.0, 1.0),
      server_span > 0 ? static_cast<double>(s.servers - env.min_servers) / server_span : 0.0,
      std::clamp(s.dimmer, 0.0, 1.0),
      std::clamp(s.response_time / env.response_cap, 0.0, 1.0),
      std::clamp(s.utilization, 0.0, 2.0) / 2.0,
  };
}

DecomposedDqn::DecomposedDqn(AgentConfig config, sim::EnvConfig env_config)
    : config_(std::move(config)), env_config_(env_config), rng_(config_.seed) {
  config_.validate();
  if (config_.channels == RewardChannels::kDecomposed) {
    channel_names_.assign(sim::kChannelNames.begin(), sim::kChannelNames.end());
  } else {
    channel_names_ = {"Total"};
  }
  const int outputs = static_cast<int>(channel_names_.size()) * sim::kNumActions;
  online_ = nn::Mlp(kNumFeatures, config_.hidden, outputs, config_.seed);
  target_ = online_;
  // Decorrelate exploration from weight initialisation.
  rng_.seed(config_.seed ^ 0x5deece66dULL);
}

DecomposedDqn::DecomposedDqn(AgentConfig config, sim::EnvConfig env_config, nn::Mlp online)
    : DecomposedDqn(std::move(config), env_config) {
  if (online.input_size() != online_.input_size() ||
      online.output_size() != online_.output_size()) {
    throw ConfigError("checkpoint network shape does not match agent configuration");
  }
  online_ = std::move(online);
  target_ = online_;
}

std::vector<std::string> DecomposedDqn::action_names() {
  std::vector<std::string> names;
  for (auto a : sim::kAllActions) names.emplace_back(sim::action_name(a));
  return names;
}

std::vector<double> DecomposedDqn::channel_rewards(const sim::RewardVector& reward) const {
  if (config_.channels == RewardChannels::kTotal) return {reward.total()};
  const auto w = reward.weighted_channels();
  return {w.begin(), w.end()};
}

ChannelActionTable DecomposedDqn::q_values(const sim::EnvState& state) const {
  const auto f = state_features(state, env_config_);
  const auto out = online_.forward(f);
  ChannelActionTable table(channel_names_, action_names());
  table.values = out;
  return table;
}

ActionChoice DecomposedDqn::greedy_action(const sim::EnvState& state) const {
  ActionChoice choice;
  choice.q_values = q_values(state);
  choice.action = static_cast<sim::Action>(choice.q_values.argmax_summed());
  return choice;
}

ActionChoice DecomposedDqn::explore_action(const sim::EnvState& state, double epsilon) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (epsilon > 0.0 && unit(rng_) < epsilon) {
    std::uniform_int_distribution<int> pick(0, sim::kNumActions - 1);
    ActionChoice choice;
    choice.action = static_cast<sim::Action>(pick(rng_));
    choice.q_values = q_values(state);
    choice.explored = true;
    return choice;
  }
  return greedy_action(state);
}

nn::Matrix DecomposedDqn::features(std::span<const Transition> batch, bool next) const {
  nn::Matrix x(batch.size(), kNumFeatures);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto f = state_features(next ? batch[b].next_state : batch[b].state, env_config_);
    std::copy(f.begin(), f.end(), x.row(b).begin());
  }
  return x;
}

double DecomposedDqn::update(std::span<const Transition> batch) {
  if (batch.empty()) throw ConfigError("update needs a non-empty batch");
  const std::size_t num_actions = sim::kNumActions;
  const std::size_t num_channels = channel_names_.size();
  const std::size_t outputs = num_actions * num_channels;
  const auto policy = config_.kernel_policy;

  const nn::Matrix next_x = features(batch, true);
  const nn::Matrix next_online = online_.forward(next_x, policy);
  const nn::Matrix next_target = target_.forward(next_x, policy);

  nn::ForwardCache cache;
  const nn::Matrix q = online_.forward(features(batch, false), policy, &cache);

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  nn::Matrix grad(batch.size(), outputs);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    // a* = argmax_a sum_c Q_c(s', a) under the online network.
    std::size_t best = 0;
    double best_sum = 0.0;
    for (std::size_t a = 0; a < num_actions; ++a) {
      double sum = 0.0;
      for (std::size_t c = 0; c < num_channels; ++c) sum += next_online(b, c * num_actions + a);
      if (a == 0 || sum > best_sum) {
        best = a;
        best_sum = sum;
      }
    }
    const auto rewards = channel_rewards(batch[b].reward);
    const auto action = static_cast<std::size_t>(batch[b].action);
    for (std::size_t c = 0; c < num_channels; ++c) {
      double y = rewards[c];
      if (!batch[b].done) y += config_.discount * next_target(b, c * num_actions + best);
      const double diff = q(b, c * num_actions + action) - y;
      loss += diff * diff;
      grad(b, c * num_actions + action) = 2.0 * diff * inv_batch;
    }
  }
  loss *= inv_batch;

  std::vector<double> grads = online_.backward(cache, grad, policy);
  double norm_sq = 0.0;
  for (double g : grads) norm_sq += g * g;
  const double norm = std::sqrt(norm_sq);
  const double scale = norm > config_.grad_clip_norm ? config_.grad_clip_norm / norm : 1.0;
  auto params = online_.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k] -= config_.learning_rate * (grads[k] * scale);
  }

  ++updates_;
  if (updates_ % config_.target_sync_interval == 0) target_ = online_;
  return loss;
}

}  // namespace dinechat::rl
