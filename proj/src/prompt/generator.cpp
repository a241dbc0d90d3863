#include "dinechat/prompt/generator.hpp"

#include <fstream>
#include <sstream>

#include "dinechat/analyze/terms.hpp"
#include "dinechat/error.hpp"

namespace dinechat::prompt {
namespace {

void require_description(const SystemDescription& d) {
  if (d.name.empty() || d.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError("system description must have a name and non-empty text");
  }
}

Role framing_role(const PromptOptions& options) {
  return options.system_roles ? Role::kSystem : Role::kUser;
}

std::string stage2_text(const Predicate& predicate, const std::string& question) {
  std::string text = "The relevant timesteps, at which " + predicate.phrase + ", are: " +
                     std::string(kTimestepsPlaceholder) + ". ";
  const std::string lower = analyze::to_lower(question);
  if (lower.find("how many") != std::string::npos || lower.find("how often") != std::string::npos) {
    text += "Count these timesteps to answer the question: ";
  } else {
    text += "Using only this list, answer the question: ";
  }
  return text + question;
}

}  // namespace

void SystemDescription::validate(const std::vector<std::string>& actions,
                                 const std::vector<std::string>& channels) const {
  require_description(*this);
  std::string missing;
  for (const auto* names : {&actions, &channels}) {
    for (const auto& n : *names) {
      if (text.find(n) == std::string::npos) missing += (missing.empty() ? "" : ", ") + n;
    }
  }
  if (!missing.empty()) {
    throw ConfigError("system description '" + name + "' does not mention: " + missing);
  }
}

SystemDescription SystemDescription::from_config(const KeyValueConfig& config,
                                                 const std::filesystem::path& base_dir) {
  SystemDescription d;
  d.name = config.get_string("system.name", "");
  const std::string file = config.get_string("system.description_file", "");
  if (file.empty()) throw ConfigError("config key 'system.description_file' is required");
  std::filesystem::path path(file);
  if (path.is_relative()) path = base_dir / path;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read system description '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  d.text = ss.str();
  while (!d.text.empty() && (d.text.back() == '\n' || d.text.back() == '\r')) d.text.pop_back();
  require_description(d);
  return d;
}

PromptOptions PromptOptions::from_config(const KeyValueConfig& config) {
  PromptOptions o;
  o.system_roles = config.get_bool("prompt.system_roles", o.system_roles);
  return o;
}

std::string escape_delimiters(std::string_view json) {
  std::string out;
  out.reserve(json.size());
  for (char c : json) {
    if (c == '*') {
      out += "\\u002a";
    } else {
      out += c;
    }
  }
  return out;
}

char option_letter(std::size_t index) {
  if (index >= 26) throw ConfigError("at most 26 answer options are supported");
  return static_cast<char>('a' + index);
}

std::string render_question(const analyze::QuestionSpec& question) {
  question.validate();
  if (question.form == analyze::QuestionForm::kOpen) return question.text;
  std::string text = question.text;
  for (std::size_t i = 0; i < question.options.size(); ++i) {
    text += "\n(";
    text += option_letter(i);
    text += ") " + question.options[i];
  }
  return text + "\nAnswer with a single option letter.";
}

PromptSequence build_engineered(const SystemDescription& description, QuestionType type,
                                std::string_view dine_json,
                                const analyze::QuestionSpec& question,
                                const PromptOptions& options) {
  require_description(description);
  PromptSequence seq;
  seq.question_type = type;
  seq.strategy = Strategy::kEngineered;
  const Role framing = framing_role(options);
  seq.messages.push_back(
      {framing, "The following scenario description will be available for answering the "
                "upcoming questions: " +
                    description.text});
  if (type == QuestionType::kA) {
    seq.messages.push_back({framing, "You will be given the state for a single timestep of " +
                                         description.name + " as JSON enclosed in ***:"});
  } else {
    seq.messages.push_back({framing, "You will be given a trajectory of timesteps for " +
                                         description.name + " as JSON enclosed in ***:"});
  }
  seq.messages.push_back({Role::kUser, "***" + escape_delimiters(dine_json) + "***"});
  seq.messages.push_back({Role::kUser, render_question(question)});
  return seq;
}

PromptSequence build_zero_shot(const SystemDescription& description, QuestionType type,
                               std::string_view dine_json,
                               const analyze::QuestionSpec& question) {
  require_description(description);
  PromptSequence seq;
  seq.question_type = type;
  seq.strategy = Strategy::kZeroShot;
  seq.messages.push_back({Role::kUser, description.text + "\n\n***" +
                                           escape_delimiters(dine_json) + "***\n\n" +
                                           render_question(question)});
  return seq;
}

Predicate detect_predicate(std::string_view question) {
  const std::string lower = analyze::to_lower(question);
  if (lower.find("uncertain") != std::string::npos) {
    return {PredicateKind::kUncertain, "", "the agent was uncertain about its decision"};
  }
  if (auto action = analyze::first_affirmed(analyze::find_actions(question))) {
    return {PredicateKind::kAction, *action, "the agent chose the adaptation \"" + *action + "\""};
  }
  if (auto channel = analyze::first_affirmed(analyze::find_channels(question))) {
    return {PredicateKind::kChannelDominant, *channel,
            "the \"" + *channel + "\" channel had the highest dominance for the chosen action"};
  }
  return {PredicateKind::kGeneric, "", "the agent's decision matters for the question"};
}

ChainOfThought build_chain_of_thought(const SystemDescription& description, QuestionType type,
                                      std::string_view dine_json,
                                      const analyze::QuestionSpec& question,
                                      const PromptOptions& options) {
  if (type != QuestionType::kB) {
    throw ConfigError("chain-of-thought prompting applies to Type B questions only");
  }
  if (question.form != analyze::QuestionForm::kOpen) {
    throw ConfigError("chain-of-thought prompting applies to open questions only");
  }
  ChainOfThought cot;
  cot.predicate = detect_predicate(question.text);
  PromptSequence base = build_engineered(description, type, dine_json, question, options);
  base.stages = 2;

  cot.stage1 = base;
  cot.stage1.stage = 1;
  cot.stage1.messages[3].text =
      "List the timesteps at which " + cot.predicate.phrase +
      ", considering only the timesteps the following question refers to. Reply only with a "
      "JSON array of timestep numbers.\nQuestion: " +
      question.text;

  cot.stage2_template = base;
  cot.stage2_template.stage = 2;
  cot.stage2_template.messages[3].text = stage2_text(cot.predicate, question.text);
  return cot;
}

std::string format_timestep_list(const std::vector<int>& timesteps) {
  std::string out = "[";
  for (std::size_t i = 0; i < timesteps.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(timesteps[i]);
  }
  return out + "]";
}

PromptSequence render_stage2(const ChainOfThought& cot, const std::vector<int>& timesteps) {
  PromptSequence seq = cot.stage2_template;
  std::string& text = seq.messages[3].text;
  const auto at = text.find(kTimestepsPlaceholder);
  text.replace(at, kTimestepsPlaceholder.size(), format_timestep_list(timesteps));
  return seq;
}

std::string sequence_to_text(const PromptSequence& sequence) {
  std::string out;
  for (const auto& m : sequence.messages) {
    out += "--- ";
    out += role_name(m.role);
    out += " ---\n" + m.text + "\n";
  }
  return out;
}

}  // namespace dinechat::prompt
