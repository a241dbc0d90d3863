#pragma once

#include <optional>
#include <string>

#include "dinechat/eval/ground_truth.hpp"
#include "dinechat/eval/question_bank.hpp"

namespace dinechat::eval {

struct Grade {
  int value = 0;  // 1 correct, 0 wrong
  std::string rationale;
};

// Index of the option an answer picks: first standalone "(x)" or "x)"
// token, else the earliest option text found in the answer.
std::optional<std::size_t> extract_option(const std::string& answer,
                                          const std::vector<std::string>& options);

// Whether an option's text states the truth (same rules as open grading).
bool option_matches(const std::string& option, const GroundTruthSpec& spec, const Truth& truth);

Grade grade_closed(const std::string& answer, const QuestionBankEntry& entry);
Grade grade_open(const std::string& answer, const GroundTruthSpec& spec, const Truth& truth);

Grade grade(const std::string& answer, const QuestionBankEntry& entry, analyze::QuestionForm form,
            const GroundTruthOracle& oracle);

}  // namespace dinechat::eval
