#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dinechat/analyze/question.hpp"
#include "dinechat/config_file.hpp"
#include "dinechat/prompt/sequence.hpp"

namespace dinechat::prompt {

struct SystemDescription {
  std::string name;
  std::string text;

  // Non-empty name and text; every action and channel name must appear.
  void validate(const std::vector<std::string>& actions,
                const std::vector<std::string>& channels) const;

  // Keys: system.name, system.description_file (relative to base_dir).
  static SystemDescription from_config(const KeyValueConfig& config,
                                       const std::filesystem::path& base_dir);
};

struct PromptOptions {
  // Prompts 1-2 as system messages; off sends every message as user.
  bool system_roles = true;

  static PromptOptions from_config(const KeyValueConfig& config);
};

// Makes '*' inside the DINE JSON unambiguous next to the *** delimiters.
// JSON only carries '*' inside strings, where * decodes to the same text.
std::string escape_delimiters(std::string_view json);

// Question text, plus the lettered options and answer instruction for closed
// questions.
std::string render_question(const analyze::QuestionSpec& question);
char option_letter(std::size_t index);

PromptSequence build_engineered(const SystemDescription& description, QuestionType type,
                                std::string_view dine_json,
                                const analyze::QuestionSpec& question,
                                const PromptOptions& options = {});

PromptSequence build_zero_shot(const SystemDescription& description, QuestionType type,
                               std::string_view dine_json,
                               const analyze::QuestionSpec& question);

enum class PredicateKind { kUncertain, kAction, kChannelDominant, kGeneric };

// What the stage-1 list should select, read off the question.
struct Predicate {
  PredicateKind kind = PredicateKind::kGeneric;
  std::string subject;  // action or channel name when relevant
  std::string phrase;   // "the agent was uncertain about its decision", ...
};
Predicate detect_predicate(std::string_view question);

inline constexpr std::string_view kTimestepsPlaceholder = "{{TIMESTEPS}}";

struct ChainOfThought {
  PromptSequence stage1;
  // Stage 2 shares messages 1-3; message 4 is this template with the
  // stage-1 list substituted for kTimestepsPlaceholder.
  PromptSequence stage2_template;
  Predicate predicate;
};

// Open Type B questions only; throws ConfigError otherwise.
ChainOfThought build_chain_of_thought(const SystemDescription& description, QuestionType type,
                                      std::string_view dine_json,
                                      const analyze::QuestionSpec& question,
                                      const PromptOptions& options = {});

// "[2, 7, 11]"
std::string format_timestep_list(const std::vector<int>& timesteps);

PromptSequence render_stage2(const ChainOfThought& cot, const std::vector<int>& timesteps);

// Plain-text rendering used for golden files and the CLI.
std::string sequence_to_text(const PromptSequence& sequence);

}  // namespace dinechat::prompt
