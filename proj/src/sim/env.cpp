#include "dinechat/sim/env.hpp"

#include <algorithm>
#include <cmath>

#include "dinechat/error.hpp"

namespace dinechat::sim {
namespace {

constexpr std::array<std::string_view, kNumActions> kActionNames = {
    "Add Server", "Remove Server", "Increase Dimmer", "Decrease Dimmer", "No Adaptation"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1), a pure function of (seed, timestep).
double jitter(std::uint64_t seed, int timestep) {
  const std::uint64_t bits =
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(timestep)));
  return 2.0 * static_cast<double>(bits >> 11) * 0x1.0p-53 - 1.0;
}

}  // namespace

std::string_view action_name(Action action) {
  return kActionNames[static_cast<int>(action)];
}

std::optional<Action> action_from_name(std::string_view name) {
  for (int i = 0; i < kNumActions; ++i) {
    if (kActionNames[i] == name) return static_cast<Action>(i);
  }
  return std::nullopt;
}

void EnvConfig::validate() const {
  if (min_servers < 1 || max_servers < min_servers) {
    throw ConfigError("server bounds need 1 <= min_servers <= max_servers");
  }
  if (!(dimmer_step > 0.0 && dimmer_step <= 1.0)) {
    throw ConfigError("dimmer_step must be in (0, 1]");
  }
  if (initial_dimmer < 0.0 || initial_dimmer > 1.0) {
    throw ConfigError("initial_dimmer must be in [0, 1]");
  }
  if (base_service_time <= 0.0 || recommendation_service_time < 0.0) {
    throw ConfigError("service times must be positive");
  }
  if (response_threshold <= 0.0 || response_cap < response_threshold) {
    throw ConfigError("response bounds need 0 < response_threshold <= response_cap");
  }
  if (weights.user_satisfaction <= 0.0 || weights.revenue <= 0.0 || weights.costs <= 0.0) {
    throw ConfigError("reward weights must be positive");
  }
  if (episode_length <= 0) throw ConfigError("episode_length must be positive");
  if (max_arrival_rate <= 0.0) throw ConfigError("max_arrival_rate must be positive");
  if (arrival_jitter < 0.0 || arrival_jitter >= 1.0) {
    throw ConfigError("arrival_jitter must be in [0, 1)");
  }
}

EnvConfig EnvConfig::from_config(const KeyValueConfig& c) {
  EnvConfig e;
  e.min_servers = static_cast<int>(c.get_int("env.min_servers", e.min_servers));
  e.max_servers = static_cast<int>(c.get_int("env.max_servers", e.max_servers));
  e.dimmer_step = c.get_double("env.dimmer_step", e.dimmer_step);
  e.initial_dimmer = c.get_double("env.initial_dimmer", e.initial_dimmer);
  e.base_service_time = c.get_double("env.base_service_time", e.base_service_time);
  e.recommendation_service_time =
      c.get_double("env.recommendation_service_time", e.recommendation_service_time);
  e.response_threshold = c.get_double("env.response_threshold", e.response_threshold);
  e.response_cap = c.get_double("env.response_cap", e.response_cap);
  e.revenue_per_request = c.get_double("env.revenue_per_request", e.revenue_per_request);
  e.cost_per_server = c.get_double("env.cost_per_server", e.cost_per_server);
  e.weights.user_satisfaction = c.get_double("env.weight_user_satisfaction", 1.0);
  e.weights.revenue = c.get_double("env.weight_revenue", 1.0);
  e.weights.costs = c.get_double("env.weight_costs", 1.0);
  e.arrival_jitter = c.get_double("env.arrival_jitter", e.arrival_jitter);
  e.max_arrival_rate = c.get_double("env.max_arrival_rate", e.max_arrival_rate);
  e.episode_length = static_cast<int>(c.get_int("env.episode_length", e.episode_length));
  e.validate();
  return e;
}

WebshopEnv::WebshopEnv(EnvConfig config) : config_(config) { config_.validate(); }

EnvState WebshopEnv::reset(std::uint64_t seed, WorkloadTrace trace) {
  if (trace.empty()) throw ConfigError("workload trace is empty");
  trace_ = std::move(trace);
  seed_ = seed;
  return evaluate(arrival_rate_at(0), config_.min_servers, config_.initial_dimmer, 0);
}

double WebshopEnv::service_time(double dimmer) const {
  return config_.base_service_time + dimmer * config_.recommendation_service_time;
}

double WebshopEnv::arrival_rate_at(int timestep) const {
  if (trace_.empty()) throw ConfigError("environment has no workload trace; call reset()");
  const double base = trace_.rates[static_cast<std::size_t>(timestep) % trace_.size()];
  return std::max(0.0, base * (1.0 + config_.arrival_jitter * jitter(seed_, timestep)));
}

EnvState WebshopEnv::evaluate(double arrival_rate, int servers, double dimmer,
                              int timestep) const {
  EnvState s;
  s.arrival_rate = arrival_rate;
  s.servers = servers;
  s.dimmer = dimmer;
  s.timestep = timestep;
  const double service = service_time(dimmer);
  s.utilization = arrival_rate * service / servers;
  s.response_time = s.utilization < 1.0
                        ? std::min(service / (1.0 - s.utilization), config_.response_cap)
                        : config_.response_cap;
  return s;
}

RewardVector WebshopEnv::reward(const EnvState& s) const {
  RewardVector r;
  r.weights = config_.weights;
  r.user_satisfaction = s.response_time <= config_.response_threshold
                            ? 1.0
                            : -std::min(s.response_time / config_.response_threshold, 5.0);
  const double capacity = s.servers / service_time(s.dimmer);
  r.revenue = s.dimmer * std::min(s.arrival_rate, capacity) * config_.revenue_per_request;
  r.costs = -s.servers * config_.cost_per_server;
  return r;
}

StepResult WebshopEnv::step(const EnvState& state, Action action) const {
  int servers = state.servers;
  // Work in whole dimmer levels so repeated steps do not accumulate drift.
  const int max_level = static_cast<int>(std::lround(1.0 / config_.dimmer_step));
  int level = static_cast<int>(std::lround(state.dimmer / config_.dimmer_step));
  switch (action) {
    case Action::kAddServer: ++servers; break;
    case Action::kRemoveServer: --servers; break;
    case Action::kIncreaseDimmer: ++level; break;
    case Action::kDecreaseDimmer: --level; break;
    case Action::kNoOp: break;
  }
  servers = std::clamp(servers, config_.min_servers, config_.max_servers);
  level = std::clamp(level, 0, max_level);
  const double dimmer = std::clamp(level * config_.dimmer_step, 0.0, 1.0);

  const int next_t = state.timestep + 1;
  StepResult result;
  result.state = evaluate(arrival_rate_at(next_t), servers, dimmer, next_t);
  result.reward = reward(result.state);
  return result;
}

}  // namespace dinechat::sim
