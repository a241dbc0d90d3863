#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dinechat/analyze/question.hpp"
#include "dinechat/dine/record.hpp"
#include "dinechat/llm/gateway.hpp"
#include "dinechat/prompt/generator.hpp"

namespace dinechat::explain {

struct PipelineConfig {
  prompt::SystemDescription description;
  prompt::PromptOptions prompt_options;
  int request_token_cap = llm::kDefaultRequestTokenCap;
  llm::TokenEstimator estimator;
};

// Question analysed, DINEs selected to fit the request cap and prompts built.
struct PreparedPrompt {
  analyze::QuestionSpec question;
  prompt::Strategy strategy = prompt::Strategy::kEngineered;
  analyze::QuestionAnalysis analysis;
  analyze::DineSelection selection;
  bool chain_of_thought = false;
  prompt::PromptSequence sequence;  // single-stage prompt
  prompt::ChainOfThought cot;       // when chain_of_thought
};

// Engineered prompting uses chain of thought for open Type B questions.
PreparedPrompt prepare(const PipelineConfig& config, const dine::DecisionTrace& trace,
                       const analyze::QuestionSpec& question, prompt::Strategy strategy,
                       const llm::CompletionParams& params, analyze::TimestepExtractor& extractor);

// One chain-of-thought run with n samples. Stage-1 replies are grouped by
// their timestep list and each distinct list gets one stage-2 call.
// Unparseable stage-1 replies are retried once.
struct CotOutcome {
  std::vector<std::optional<std::string>> answers;  // nullopt: stage 1 failed twice
  std::vector<std::optional<std::vector<int>>> lists;
  std::vector<std::string> stage1_replies;
  std::vector<prompt::PromptSequence> sent;
  llm::Usage usage;
};
CotOutcome run_chain_of_thought(llm::LlmGateway& gateway, const prompt::ChainOfThought& cot,
                                const llm::CompletionParams& params);

struct AskOutcome {
  std::vector<std::string> answers;
  std::vector<prompt::PromptSequence> sent;
  std::optional<std::vector<int>> stage1_list;  // first sample's list
  llm::Usage usage;
};

// Sends the prepared prompt; a chain of thought whose stage 1 never yields
// a list fails with an Error carrying the reply.
AskOutcome execute(llm::LlmGateway& gateway, const PreparedPrompt& prepared,
                   const llm::CompletionParams& params);

}  // namespace dinechat::explain
