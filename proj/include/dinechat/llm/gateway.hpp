#pragma once

#include <memory>
#include <string>

#include "dinechat/llm/backend.hpp"
#include "dinechat/llm/clock.hpp"
#include "dinechat/llm/rate_budget.hpp"
#include "dinechat/llm/tokens.hpp"

namespace dinechat::llm {

// Prompt estimate plus reply budget exceeds the per-request token cap.
class PromptTooLargeError : public BudgetError {
 public:
  PromptTooLargeError(int prompt_tokens, int max_tokens, int cap);
  int prompt_tokens() const { return prompt_tokens_; }
  int max_tokens() const { return max_tokens_; }
  int cap() const { return cap_; }

 private:
  int prompt_tokens_;
  int max_tokens_;
  int cap_;
};

// The rate budget has no headroom and the gateway is not allowed to wait.
class RateLimitedError : public Error {
 public:
  explicit RateLimitedError(double retry_after_seconds);
  double retry_after() const { return retry_after_; }

 private:
  double retry_after_;
};

struct GatewayOptions {
  int request_token_cap = kDefaultRequestTokenCap;
  long tokens_per_minute = kDefaultTokensPerMinute;
  int max_attempts = 3;
  double initial_backoff = 1.0;  // seconds; doubles per retry
  double backoff_factor = 2.0;
  // Block on the clock until the budget has room, instead of failing fast.
  bool wait_for_budget = true;
  TokenEstimator estimator;

  static GatewayOptions from_config(const KeyValueConfig& config);
};

// Rate-limited front door to a chat backend: enforces the per-request cap
// before sending, debits a shared sliding-window budget and retries
// transient failures with exponential backoff.
class LlmGateway {
 public:
  // Gateways given the same budget share one token window.
  LlmGateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options = {},
             std::shared_ptr<Clock> clock = std::make_shared<SystemClock>(),
             std::shared_ptr<RateBudget> budget = nullptr);

  Completion chat_complete(const prompt::PromptSequence& sequence,
                           const CompletionParams& params);

  // Throws PromptTooLargeError when the sequence would not fit.
  int check_request(const prompt::PromptSequence& sequence, const CompletionParams& params) const;

  const GatewayOptions& options() const { return options_; }
  const RateBudget& budget() const { return *budget_; }
  std::shared_ptr<RateBudget> shared_budget() const { return budget_; }
  ChatBackend& backend() { return *backend_; }
  Clock& clock() { return *clock_; }

 private:
  std::shared_ptr<ChatBackend> backend_;
  GatewayOptions options_;
  std::shared_ptr<Clock> clock_;
  std::shared_ptr<RateBudget> budget_;
};

}  // namespace dinechat::llm
