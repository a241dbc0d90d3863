#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dinechat/analyze/question.hpp"
#include "dinechat/dine/record.hpp"
#include "dinechat/eval/ground_truth.hpp"

namespace dinechat::eval {

enum class QuestionStyle { kWhatWhich, kWhy, kHowMany };

std::string_view style_name(QuestionStyle style);  // "what/which", "why", "how many"
QuestionStyle parse_style(std::string_view name);

// One question with its open and closed renderings. The closed rendering
// appends `options`; exactly one of them (`correct`) is right.
struct QuestionBankEntry {
  std::string id;
  std::string text;
  QuestionStyle style = QuestionStyle::kWhatWhich;
  std::vector<std::string> options;
  std::size_t correct = 0;
  GroundTruthSpec truth;

  analyze::QuestionSpec spec(analyze::QuestionForm form) const;
  void validate() const;
};

struct QuestionBank {
  std::string trace_id;  // trace the ground truth refers to
  std::vector<QuestionBankEntry> entries;

  void validate() const;
};

// {"trace_id": ..., "questions": [{"id", "style", "text", "options",
//   "correct": "b", "truth": {...}}, ...]}
std::string bank_to_json(const QuestionBank& bank);
QuestionBank bank_from_json(const std::string& text);
QuestionBank load_bank(const std::string& path);
void save_bank(const QuestionBank& bank, const std::string& path);

// Checks every entry against the trace: the correct option, and only it,
// matches the ground truth. Throws ConfigError naming the entry.
void check_bank_against(const QuestionBank& bank, const GroundTruthOracle& oracle);

// Eight questions (four single-timestep, four trajectory) in the three
// styles, with options and truth computed from the trace.
QuestionBank make_default_bank(const dine::DecisionTrace& trace);

}  // namespace dinechat::eval
