#include "dinechat/eval/grader.hpp"

#include <cctype>

#include "dinechat/analyze/terms.hpp"

namespace dinechat::eval {
namespace {

bool alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

std::vector<analyze::TermMention> mentions_for(const GroundTruthSpec& spec, const std::string& text) {
  return spec.kind == TruthKind::kChosenAction ? analyze::find_actions(text)
                                               : analyze::find_channels(text);
}

}  // namespace

std::optional<std::size_t> extract_option(const std::string& answer,
                                          const std::vector<std::string>& options) {
  const std::string lower = analyze::to_lower(answer);
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const char c = lower[i];
    if (c < 'a' || c > 'z') continue;
    const auto index = static_cast<std::size_t>(c - 'a');
    if (index >= options.size()) continue;
    if (i + 1 >= lower.size() || lower[i + 1] != ')') continue;
    const bool bracketed = i > 0 && lower[i - 1] == '(';
    const bool standalone = i == 0 || (!alnum(lower[i - 1]) && lower[i - 1] != '\'');
    if (bracketed || standalone) return index;
  }
  std::optional<std::size_t> best;
  std::size_t best_pos = std::string::npos;
  for (std::size_t k = 0; k < options.size(); ++k) {
    const auto pos = lower.find(analyze::to_lower(options[k]));
    if (pos != std::string::npos && pos < best_pos) {
      best = k;
      best_pos = pos;
    }
  }
  return best;
}

bool option_matches(const std::string& option, const GroundTruthSpec& spec, const Truth& truth) {
  if (truth.is_count) return analyze::first_count(option) == truth.count;
  return analyze::first_affirmed(mentions_for(spec, option)) == truth.name;
}

Grade grade_closed(const std::string& answer, const QuestionBankEntry& entry) {
  const auto picked = extract_option(answer, entry.options);
  if (!picked) return {0, "unparseable"};
  const std::string expected = std::string("(") + static_cast<char>('a' + entry.correct) + ")";
  const std::string found = std::string("(") + static_cast<char>('a' + *picked) + ")";
  if (*picked == entry.correct) return {1, "selected " + found};
  return {0, "expected " + expected + ", found " + found};
}

Grade grade_open(const std::string& answer, const GroundTruthSpec& spec, const Truth& truth) {
  if (truth.is_count) {
    const auto count = analyze::first_count(answer);
    if (!count) return {0, "unparseable"};
    if (*count == truth.count) return {1, "count " + std::to_string(*count)};
    return {0, "expected " + std::to_string(truth.count) + ", found " + std::to_string(*count)};
  }
  const auto name = analyze::first_affirmed(mentions_for(spec, answer));
  if (!name) return {0, "unparseable"};
  if (*name == truth.name) return {1, "names " + *name};
  return {0, "expected " + truth.name + ", found " + *name};
}

Grade grade(const std::string& answer, const QuestionBankEntry& entry, analyze::QuestionForm form,
            const GroundTruthOracle& oracle) {
  if (form == analyze::QuestionForm::kClosed) return grade_closed(answer, entry);
  return grade_open(answer, entry.truth, oracle.evaluate(entry.truth));
}

}  // namespace dinechat::eval
