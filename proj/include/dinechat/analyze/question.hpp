#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dinechat/dine/encode.hpp"
#include "dinechat/dine/record.hpp"
#include "dinechat/llm/gateway.hpp"
#include "dinechat/llm/tokens.hpp"
#include "dinechat/prompt/sequence.hpp"

namespace dinechat::analyze {

using prompt::QuestionType;

enum class QuestionForm { kOpen, kClosed };

std::string_view form_name(QuestionForm form);
QuestionForm parse_form(std::string_view name);

struct QuestionSpec {
  std::string text;
  QuestionForm form = QuestionForm::kOpen;
  std::vector<std::string> options;  // closed questions only

  // Closed questions need at least two options; text must be non-empty.
  void validate() const;
};

inline constexpr int kDefaultWindow = 20;

struct QuestionAnalysis {
  QuestionType type = QuestionType::kA;
  std::vector<int> timesteps;  // T, sorted and unique
  bool defaulted = false;      // T came from the default recent window
  // Timesteps the question names explicitly (range endpoints and single
  // mentions); the rest of T is context. Empty when defaulted.
  std::vector<int> focal;
};

// Timesteps mentioned in the question, parsed from patterns such as
// "timestep 5", "timesteps 3 to 9", "between t=3 and t=9" or
// "timesteps 2, 7 and 11". Ranges are inclusive. Case-insensitive.
struct ExplicitTimesteps {
  std::vector<int> all;    // expanded, sorted, unique
  std::vector<int> focal;  // endpoints and single mentions
};
ExplicitTimesteps parse_timesteps(std::string_view question);

class TimestepExtractor {
 public:
  virtual ~TimestepExtractor() = default;
  virtual ExplicitTimesteps extract(std::string_view question) = 0;
};

class DeterministicExtractor : public TimestepExtractor {
 public:
  ExplicitTimesteps extract(std::string_view question) override;
};

// Text of the prompt that asks the chatbot for the timesteps in a question.
std::string extraction_prompt(std::string_view question);
inline constexpr std::string_view kExtractionMarker =
    "List every timestep that the following question refers to.";

// Asks the chatbot for the list T. Unparseable replies fall back to the
// deterministic extractor (logged).
class LlmExtractor : public TimestepExtractor {
 public:
  LlmExtractor(llm::LlmGateway& gateway, llm::CompletionParams params);
  ExplicitTimesteps extract(std::string_view question) override;
  int fallbacks() const { return fallbacks_; }

 private:
  llm::LlmGateway& gateway_;
  llm::CompletionParams params_;
  DeterministicExtractor fallback_;
  int fallbacks_ = 0;
};

// First JSON-style integer list "[...]" in the text, if any.
bool parse_int_list(std::string_view text, std::vector<int>& out);

// Applies the default window (the kDefaultWindow most recent timesteps up
// to `latest`) when nothing was extracted, then the |T| typing rule.
QuestionAnalysis classify(const ExplicitTimesteps& extracted, const dine::DecisionTrace& trace);

QuestionAnalysis analyze_question(std::string_view question, TimestepExtractor& extractor,
                                  const dine::DecisionTrace& trace);

struct DineSelection {
  std::vector<dine::TimestepRecord> records;
  dine::DineKinds kinds;
  std::string json;
  int estimated_tokens = 0;
  std::vector<int> dropped;  // timesteps removed to fit the budget
  bool q_values_dropped = false;
};

// Type A: every DINE kind for the single timestep. Type B: compact
// per-timestep records for T. Over budget, non-focal timesteps farthest from
// the focal set go first (oldest first on ties), then q-value detail, and a
// BudgetError is raised if a single minimal record still does not fit.
DineSelection select_dines(const QuestionAnalysis& analysis, const dine::DecisionTrace& trace,
                           int token_budget, const llm::TokenEstimator& estimator = {});

}  // namespace dinechat::analyze
