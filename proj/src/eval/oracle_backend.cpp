#include "dinechat/eval/oracle_backend.hpp"

#include <algorithm>

#include "dinechat/analyze/question.hpp"
#include "dinechat/analyze/terms.hpp"
#include "dinechat/dine/encode.hpp"
#include "dinechat/error.hpp"
#include "dinechat/eval/ground_truth.hpp"
#include "dinechat/eval/grader.hpp"
#include "dinechat/llm/tokens.hpp"
#include "dinechat/prompt/generator.hpp"

namespace dinechat::eval {
namespace {

constexpr std::string_view kStage1Prefix = "List the timesteps at which ";
constexpr std::string_view kStage2Prefix = "The relevant timesteps, at which ";
constexpr std::string_view kQuestionTag = "\nQuestion: ";
constexpr std::string_view kAnswerTag = "answer the question: ";
constexpr std::string_view kOptionInstruction = "\nAnswer with a single option letter.";

std::string after(std::string_view text, std::string_view tag) {
  const auto at = text.find(tag);
  return at == std::string_view::npos ? std::string(text) : std::string(text.substr(at + tag.size()));
}

// Splits "question\n(a) X\n(b) Y\nAnswer with..." into question and options.
std::string strip_options(const std::string& text, std::vector<std::string>& options) {
  const auto end = text.rfind(kOptionInstruction);
  if (end == std::string::npos) return text;
  std::string head = text.substr(0, end);
  while (true) {
    const auto nl = head.rfind('\n');
    if (nl == std::string::npos) break;
    const std::string line = head.substr(nl + 1);
    if (line.size() < 4 || line[0] != '(' || line[2] != ')') break;
    options.insert(options.begin(), line.substr(4));
    head.resize(nl);
  }
  return head;
}

std::string count_sentence(int n) {
  return "There are " + std::to_string(n) + (n == 1 ? " matching timestep." : " matching timesteps.");
}

bool holds(const prompt::Predicate& p, const dine::TimestepRecord& r) {
  switch (p.kind) {
    case prompt::PredicateKind::kUncertain: return r.uncertain;
    case prompt::PredicateKind::kAction: return r.chosen_action == p.subject;
    case prompt::PredicateKind::kChannelDominant:
      return r.dominance.channels.at(dine::dominant_channel(r)) == p.subject;
    case prompt::PredicateKind::kGeneric: return true;
  }
  return false;
}

std::string open_answer(const GroundTruthSpec& spec, const Truth& truth) {
  const std::string t = std::to_string(spec.timesteps.front());
  switch (spec.kind) {
    case TruthKind::kChosenAction:
      return "At timestep " + t + " the agent chose " + truth.name + ".";
    case TruthKind::kDominantChannel:
      return "The " + truth.name +
             " channel contributed the most to the decision taken at timestep " + t + ".";
    default: return count_sentence(truth.count);
  }
}

}  // namespace

std::string OracleBackend::answer(const prompt::PromptSequence& sequence) {
  if (sequence.messages.empty()) return std::string(kOracleCannotAnswer);
  const std::string& last = sequence.messages.back().text;

  if (last.find(analyze::kExtractionMarker) != std::string::npos) {
    return prompt::format_timestep_list(analyze::parse_timesteps(after(last, kQuestionTag)).all);
  }

  // The DINE block is the first ***...*** span that opens with JSON; instructions may mention ***.
  std::string all;
  for (const auto& m : sequence.messages) all += m.text + "\n";
  auto open = all.find("***");
  while (open != std::string::npos && open + 3 < all.size() && all[open + 3] != '[' &&
         all[open + 3] != '{') {
    open = all.find("***", open + 3);
  }
  const auto close = open == std::string::npos ? open : all.find("***", open + 3);
  if (close == std::string::npos) return std::string(kOracleCannotAnswer);
  std::vector<dine::TimestepRecord> records;
  try {
    records = dine::parse_dines(std::string_view(all).substr(open + 3, close - open - 3));
  } catch (const Error&) {
    return std::string(kOracleCannotAnswer);
  }
  if (records.empty()) return std::string(kOracleCannotAnswer);

  std::string question = last;
  if (sequence.messages.size() == 1) {
    question = all.substr(close + 3);
    question.erase(0, question.find_first_not_of('\n'));
    while (!question.empty() && question.back() == '\n') question.pop_back();
  }

  try {
    if (question.starts_with(kStage1Prefix)) {
      const std::string original = after(question, kQuestionTag);
      const auto predicate = prompt::detect_predicate(original);
      const auto spec_steps = analyze::parse_timesteps(original).all;
      std::vector<int> out;
      for (const auto& r : records) {
        const bool in_scope = spec_steps.empty() ||
                              std::binary_search(spec_steps.begin(), spec_steps.end(), r.timestep);
        if (in_scope && holds(predicate, r)) out.push_back(r.timestep);
      }
      return prompt::format_timestep_list(out);
    }
    if (question.starts_with(kStage2Prefix)) {
      std::vector<int> listed;
      const auto colon = question.find(", are: ");
      if (colon == std::string::npos ||
          !analyze::parse_int_list(std::string_view(question).substr(colon), listed)) {
        return std::string(kOracleCannotAnswer);
      }
      const std::string original = after(question, kAnswerTag);
      const auto spec = infer_spec(original, records);
      if (is_count(spec.kind)) return count_sentence(static_cast<int>(listed.size()));
      return open_answer(spec, evaluate_truth(spec, records));
    }

    std::vector<std::string> options;
    const std::string text = strip_options(question, options);
    const auto spec = infer_spec(text, records);
    const Truth truth = evaluate_truth(spec, records);
    if (options.empty()) return open_answer(spec, truth);
    for (std::size_t i = 0; i < options.size(); ++i) {
      if (option_matches(options[i], spec, truth)) {
        return std::string("(") + prompt::option_letter(i) + ")";
      }
    }
  } catch (const Error&) {
  }
  return std::string(kOracleCannotAnswer);
}

llm::Completion OracleBackend::complete(const prompt::PromptSequence& sequence,
                                        const llm::CompletionParams& params) {
  params.validate();
  llm::Completion c;
  const std::string reply = answer(sequence);
  c.responses.assign(static_cast<std::size_t>(params.n), reply);
  c.usage.prompt_tokens = llm::raw_sequence_tokens(sequence);
  c.usage.completion_tokens = static_cast<long>(params.n) * llm::estimate_tokens(reply);
  return c;
}

}  // namespace dinechat::eval
