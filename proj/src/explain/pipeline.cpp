#include "dinechat/explain/pipeline.hpp"

#include <algorithm>
#include <map>

#include "dinechat/error.hpp"

namespace dinechat::explain {
namespace {

using prompt::PromptSequence;

void add_usage(llm::Usage& total, const llm::Usage& u) {
  total.prompt_tokens += u.prompt_tokens;
  total.completion_tokens += u.completion_tokens;
}

struct Built {
  PromptSequence sequence;
  prompt::ChainOfThought cot;
};

Built build(const PipelineConfig& config, const PreparedPrompt& p, const std::string& json) {
  Built b;
  if (p.strategy == prompt::Strategy::kZeroShot) {
    b.sequence = prompt::build_zero_shot(config.description, p.analysis.type, json, p.question);
  } else if (p.chain_of_thought) {
    b.cot = prompt::build_chain_of_thought(config.description, p.analysis.type, json, p.question,
                                           config.prompt_options);
  } else {
    b.sequence = prompt::build_engineered(config.description, p.analysis.type, json, p.question,
                                          config.prompt_options);
  }
  return b;
}

// Largest sequence estimate the built prompt can produce.
int worst_estimate(const PipelineConfig& config, const PreparedPrompt& p, const Built& b) {
  const auto& est = config.estimator;
  if (!p.chain_of_thought) return est.sequence(b.sequence);
  return std::max(est.sequence(b.cot.stage1),
                  est.sequence(prompt::render_stage2(b.cot, p.analysis.timesteps)));
}

}  // namespace

PreparedPrompt prepare(const PipelineConfig& config, const dine::DecisionTrace& trace,
                       const analyze::QuestionSpec& question, prompt::Strategy strategy,
                       const llm::CompletionParams& params, analyze::TimestepExtractor& extractor) {
  question.validate();
  params.validate();
  PreparedPrompt p;
  p.question = question;
  p.strategy = strategy;
  p.analysis = analyze::analyze_question(question.text, extractor, trace);
  p.chain_of_thought = strategy == prompt::Strategy::kEngineered &&
                       p.analysis.type == prompt::QuestionType::kB &&
                       question.form == analyze::QuestionForm::kOpen;

  // Everything but the DINE JSON counts against the cap first.
  const int skeleton = worst_estimate(config, p, build(config, p, ""));
  const int budget = config.request_token_cap - params.max_tokens - skeleton;
  if (budget <= 0) {
    throw llm::PromptTooLargeError(skeleton, params.max_tokens, config.request_token_cap);
  }
  p.selection = analyze::select_dines(p.analysis, trace, budget, config.estimator);

  Built b = build(config, p, p.selection.json);
  const int estimate = worst_estimate(config, p, b);
  if (estimate + params.max_tokens > config.request_token_cap) {
    throw llm::PromptTooLargeError(estimate, params.max_tokens, config.request_token_cap);
  }
  p.sequence = std::move(b.sequence);
  p.cot = std::move(b.cot);
  return p;
}

CotOutcome run_chain_of_thought(llm::LlmGateway& gateway, const prompt::ChainOfThought& cot,
                                const llm::CompletionParams& params) {
  const auto n = static_cast<std::size_t>(params.n);
  CotOutcome out;
  out.answers.resize(n);
  out.lists.resize(n);
  out.stage1_replies.resize(n);

  auto stage1 = gateway.chat_complete(cot.stage1, params);
  out.sent.push_back(cot.stage1);
  add_usage(out.usage, stage1.usage);
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < n; ++i) {
    out.stage1_replies[i] = stage1.responses[i];
    std::vector<int> list;
    if (analyze::parse_int_list(stage1.responses[i], list)) {
      out.lists[i] = std::move(list);
    } else {
      failed.push_back(i);
    }
  }
  if (!failed.empty()) {
    llm::CompletionParams retry = params;
    retry.n = static_cast<int>(failed.size());
    auto again = gateway.chat_complete(cot.stage1, retry);
    out.sent.push_back(cot.stage1);
    add_usage(out.usage, again.usage);
    for (std::size_t k = 0; k < failed.size(); ++k) {
      std::vector<int> list;
      if (analyze::parse_int_list(again.responses[k], list)) out.lists[failed[k]] = std::move(list);
      out.stage1_replies[failed[k]] = again.responses[k];
    }
  }

  std::map<std::vector<int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.lists[i]) groups[*out.lists[i]].push_back(i);
  }
  for (const auto& [list, members] : groups) {
    llm::CompletionParams p2 = params;
    p2.n = static_cast<int>(members.size());
    const auto seq = prompt::render_stage2(cot, list);
    auto stage2 = gateway.chat_complete(seq, p2);
    out.sent.push_back(seq);
    add_usage(out.usage, stage2.usage);
    for (std::size_t k = 0; k < members.size(); ++k) out.answers[members[k]] = stage2.responses[k];
  }
  return out;
}

AskOutcome execute(llm::LlmGateway& gateway, const PreparedPrompt& prepared,
                   const llm::CompletionParams& params) {
  AskOutcome out;
  if (!prepared.chain_of_thought) {
    auto c = gateway.chat_complete(prepared.sequence, params);
    out.answers = std::move(c.responses);
    out.sent.push_back(prepared.sequence);
    out.usage = c.usage;
    return out;
  }
  auto cot = run_chain_of_thought(gateway, prepared.cot, params);
  for (std::size_t i = 0; i < cot.answers.size(); ++i) {
    if (!cot.answers[i]) {
      throw Error("chain-of-thought stage 1 did not return a timestep list after a retry; reply "
                  "was: " +
                  cot.stage1_replies[i]);
    }
    out.answers.push_back(*cot.answers[i]);
  }
  out.sent = std::move(cot.sent);
  out.usage = cot.usage;
  out.stage1_list = cot.lists.front();
  return out;
}

}  // namespace dinechat::explain
