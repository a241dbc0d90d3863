#pragma once

#include <string>

#include "dinechat/rl/agent.hpp"

namespace dinechat::rl {

inline constexpr int kCheckpointVersion = 1;

// JSON checkpoint: format tag, version, agent and environment configuration,
// channel/action names, layer shapes and flat parameters (round-trip exact).
std::string checkpoint_to_json(const DecomposedDqn& agent);
DecomposedDqn checkpoint_from_json(const std::string& text);

void save_checkpoint(const DecomposedDqn& agent, const std::string& path);
DecomposedDqn load_checkpoint(const std::string& path);

}  // namespace dinechat::rl
