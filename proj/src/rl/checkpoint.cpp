#include "dinechat/rl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dinechat/error.hpp"

namespace dinechat::rl {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "dinechat.checkpoint";

json env_to_json(const sim::EnvConfig& e) {
  return {{"min_servers", e.min_servers},
          {"max_servers", e.max_servers},
          {"dimmer_step", e.dimmer_step},
          {"initial_dimmer", e.initial_dimmer},
          {"base_service_time", e.base_service_time},
          {"recommendation_service_time", e.recommendation_service_time},
          {"response_threshold", e.response_threshold},
          {"response_cap", e.response_cap},
          {"revenue_per_request", e.revenue_per_request},
          {"cost_per_server", e.cost_per_server},
          {"weights",
           {e.weights.user_satisfaction, e.weights.revenue, e.weights.costs}},
          {"arrival_jitter", e.arrival_jitter},
          {"max_arrival_rate", e.max_arrival_rate},
          {"episode_length", e.episode_length}};
}

sim::EnvConfig env_from_json(const json& j) {
  sim::EnvConfig e;
  e.min_servers = j.at("min_servers");
  e.max_servers = j.at("max_servers");
  e.dimmer_step = j.at("dimmer_step");
  e.initial_dimmer = j.at("initial_dimmer");
  e.base_service_time = j.at("base_service_time");
  e.recommendation_service_time = j.at("recommendation_service_time");
  e.response_threshold = j.at("response_threshold");
  e.response_cap = j.at("response_cap");
  e.revenue_per_request = j.at("revenue_per_request");
  e.cost_per_server = j.at("cost_per_server");
  const auto& w = j.at("weights");
  e.weights = {w.at(0), w.at(1), w.at(2)};
  e.arrival_jitter = j.at("arrival_jitter");
  e.max_arrival_rate = j.at("max_arrival_rate");
  e.episode_length = j.at("episode_length");
  e.validate();
  return e;
}

json agent_to_json(const AgentConfig& a) {
  return {{"discount", a.discount},
          {"learning_rate", a.learning_rate},
          {"epsilon_start", a.epsilon_start},
          {"epsilon_end", a.epsilon_end},
          {"epsilon_decay_steps", a.epsilon_decay_steps},
          {"target_sync_interval", a.target_sync_interval},
          {"batch_size", a.batch_size},
          {"replay_capacity", a.replay_capacity},
          {"warmup_steps", a.warmup_steps},
          {"train_interval", a.train_interval},
          {"grad_clip_norm", a.grad_clip_norm},
          {"hidden", a.hidden},
          {"channels", a.channels == RewardChannels::kDecomposed ? "decomposed" : "total"}};
}

AgentConfig agent_from_json(const json& j, std::uint64_t seed) {
  AgentConfig a;
  a.discount = j.at("discount");
  a.learning_rate = j.at("learning_rate");
  a.epsilon_start = j.at("epsilon_start");
  a.epsilon_end = j.at("epsilon_end");
  a.epsilon_decay_steps = j.at("epsilon_decay_steps");
  a.target_sync_interval = j.at("target_sync_interval");
  a.batch_size = j.at("batch_size");
  a.replay_capacity = j.at("replay_capacity");
  a.warmup_steps = j.at("warmup_steps");
  a.train_interval = j.at("train_interval");
  a.grad_clip_norm = j.at("grad_clip_norm");
  a.hidden = j.at("hidden").get<std::vector<int>>();
  const std::string channels = j.at("channels");
  a.channels = channels == "total" ? RewardChannels::kTotal : RewardChannels::kDecomposed;
  a.seed = seed;
  a.validate();
  return a;
}

}  // namespace

std::string checkpoint_to_json(const DecomposedDqn& agent) {
  json layers = json::array();
  for (const auto& l : agent.online().layers()) {
    layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}});
  }
  const auto params = agent.online().parameters();
  json j = {{"format", kFormat},
            {"version", kCheckpointVersion},
            {"seed", agent.config().seed},
            {"agent", agent_to_json(agent.config())},
            {"env", env_to_json(agent.env_config())},
            {"channels", agent.channel_names()},
            {"actions", DecomposedDqn::action_names()},
            {"layers", layers},
            {"parameters", std::vector<double>(params.begin(), params.end())}};
  return j.dump();
}

DecomposedDqn checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw ParseError("not a dinechat checkpoint");
    const int version = j.at("version");
    if (version != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto seed = j.at("seed").get<std::uint64_t>();
    AgentConfig agent = agent_from_json(j.at("agent"), seed);
    sim::EnvConfig env = env_from_json(j.at("env"));
    std::vector<nn::LayerShape> layers;
    for (const auto& l : j.at("layers")) layers.push_back({l.at("inputs"), l.at("outputs")});
    nn::Mlp net(std::move(layers), j.at("parameters").get<std::vector<double>>());
    return DecomposedDqn(agent, env, std::move(net));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const DecomposedDqn& agent, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(agent) << '\n';
}

DecomposedDqn load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("checkpoint '" + path + "' not found");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace dinechat::rl
