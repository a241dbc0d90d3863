#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dinechat::prompt {

enum class Role { kSystem, kUser, kAssistant };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::kUser;
  std::string text;

  bool operator==(const ChatMessage&) const = default;
};

enum class QuestionType { kA, kB };
enum class Strategy { kZeroShot, kEngineered };

std::string_view question_type_name(QuestionType type);  // "A" / "B"
std::string_view strategy_name(Strategy strategy);       // "zero_shot" / "engineered"
Strategy parse_strategy(std::string_view name);

struct PromptSequence {
  std::vector<ChatMessage> messages;
  QuestionType question_type = QuestionType::kA;
  Strategy strategy = Strategy::kEngineered;
  int stages = 1;  // 2 for chain-of-thought
  int stage = 1;   // which stage this sequence realises

  bool operator==(const PromptSequence&) const = default;
};

}  // namespace dinechat::prompt
