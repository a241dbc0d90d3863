#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dinechat::analyze {

// Lower-case word tokens; letters and digits split ("t5" -> "t", "5"),
// apostrophes stay inside words ("didn't").
std::vector<std::string> word_tokens(std::string_view text);

std::string to_lower(std::string_view text);

struct TermMention {
  std::string canonical;
  std::size_t position = 0;  // token index
  bool negated = false;      // "not"/"never"/"...n't" within 3 tokens before
};

// Mentions of adaptation actions ("added a server", "Increase Dimmer",
// "no adaptation") in order of appearance, as canonical action names.
std::vector<TermMention> find_actions(std::string_view text);
// Mentions of reward channels, as canonical channel names.
std::vector<TermMention> find_channels(std::string_view text);

// First mention that is not negated.
std::optional<std::string> first_affirmed(const std::vector<TermMention>& mentions);

// First count stated in the text: digits or number words, skipping anything
// in parentheses and numbers that name timesteps ("timestep 5", "t=3",
// "between 0 and 20").
std::optional<int> first_count(std::string_view text);

}  // namespace dinechat::analyze
