#pragma once

#include <string_view>

#include "dinechat/prompt/sequence.hpp"

namespace dinechat::llm {

// ceil(characters / 4). A tokenizer-free approximation; see TokenEstimator
// for the guarded figure used against limits.
int estimate_tokens(std::string_view text);

struct TokenEstimator {
  double safety_factor = 1.1;
  int per_message_overhead = 4;

  // ceil(estimate_tokens(text) * safety_factor)
  int guarded(std::string_view text) const;
  // Sum of guarded message estimates plus per-message overhead.
  int sequence(const prompt::PromptSequence& seq) const;
};

// Unguarded estimate used for usage accounting by offline backends.
int raw_sequence_tokens(const prompt::PromptSequence& seq);

}  // namespace dinechat::llm
