#pragma once

#include <string>

#include "dinechat/llm/backend.hpp"

namespace dinechat::eval {

inline constexpr std::string_view kOracleCannotAnswer = "ORACLE_CANNOT_ANSWER";

// Offline chatbot that answers from the DINE JSON inside the prompt, so
// every answer is correct by construction. Handles timestep extraction
// prompts, both chain-of-thought stages, open and closed questions.
// Sampling parameters are ignored; all n responses are identical.
class OracleBackend : public llm::ChatBackend {
 public:
  llm::Completion complete(const prompt::PromptSequence& sequence,
                           const llm::CompletionParams& params) override;
  std::string name() const override { return "oracle"; }

  // The single answer for a sequence.
  static std::string answer(const prompt::PromptSequence& sequence);
};

}  // namespace dinechat::eval
