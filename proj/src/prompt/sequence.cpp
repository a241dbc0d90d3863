#include "dinechat/prompt/sequence.hpp"

#include <string>

#include "dinechat/error.hpp"

namespace dinechat::prompt {

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw ConfigError("unknown chat role '" + std::string(name) + "'");
}

std::string_view question_type_name(QuestionType type) {
  return type == QuestionType::kA ? "A" : "B";
}

std::string_view strategy_name(Strategy strategy) {
  return strategy == Strategy::kZeroShot ? "zero_shot" : "engineered";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "zero_shot" || name == "zero-shot") return Strategy::kZeroShot;
  if (name == "engineered") return Strategy::kEngineered;
  throw ConfigError("unknown prompting strategy '" + std::string(name) + "'");
}

}  // namespace dinechat::prompt
