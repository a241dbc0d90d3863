#include "dinechat/llm/tokens.hpp"

#include <cmath>

namespace dinechat::llm {

int estimate_tokens(std::string_view text) {
  return static_cast<int>((text.size() + 3) / 4);
}

int TokenEstimator::guarded(std::string_view text) const {
  return static_cast<int>(std::ceil(estimate_tokens(text) * safety_factor - 1e-9));
}

int TokenEstimator::sequence(const prompt::PromptSequence& seq) const {
  int total = 0;
  for (const auto& m : seq.messages) total += guarded(m.text) + per_message_overhead;
  return total;
}

int raw_sequence_tokens(const prompt::PromptSequence& seq) {
  int total = 0;
  for (const auto& m : seq.messages) total += estimate_tokens(m.text) + 4;
  return total;
}

}  // namespace dinechat::llm
