#include "dinechat/llm/gateway.hpp"

#include <cmath>
#include <iostream>

namespace dinechat::llm {

PromptTooLargeError::PromptTooLargeError(int prompt_tokens, int max_tokens, int cap)
    : BudgetError("estimated prompt of " + std::to_string(prompt_tokens) +
                  " tokens + max_token " + std::to_string(max_tokens) + " = " +
                  std::to_string(prompt_tokens + max_tokens) + " exceeds the per-request limit of " +
                  std::to_string(cap) + " tokens"),
      prompt_tokens_(prompt_tokens),
      max_tokens_(max_tokens),
      cap_(cap) {}

RateLimitedError::RateLimitedError(double retry_after_seconds)
    : Error("token rate budget exhausted; retry after " +
            std::to_string(static_cast<long>(std::ceil(retry_after_seconds))) + " s"),
      retry_after_(retry_after_seconds) {}

GatewayOptions GatewayOptions::from_config(const KeyValueConfig& c) {
  GatewayOptions o;
  o.request_token_cap = static_cast<int>(c.get_int("llm.request_token_cap", o.request_token_cap));
  o.tokens_per_minute = c.get_int("llm.tokens_per_minute", o.tokens_per_minute);
  o.max_attempts = static_cast<int>(c.get_int("llm.max_attempts", o.max_attempts));
  o.initial_backoff = c.get_double("llm.initial_backoff", o.initial_backoff);
  o.backoff_factor = c.get_double("llm.backoff_factor", o.backoff_factor);
  o.estimator.safety_factor = c.get_double("llm.token_safety_factor", o.estimator.safety_factor);
  if (o.max_attempts < 1) throw ConfigError("llm.max_attempts must be >= 1");
  return o;
}

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options,
                       std::shared_ptr<Clock> clock, std::shared_ptr<RateBudget> budget)
    : backend_(std::move(backend)),
      options_(options),
      clock_(std::move(clock)),
      budget_(budget ? std::move(budget) : std::make_shared<RateBudget>(options.tokens_per_minute)) {
  if (!backend_) throw ConfigError("gateway needs a backend");
}

int LlmGateway::check_request(const prompt::PromptSequence& sequence,
                              const CompletionParams& params) const {
  const int estimate = options_.estimator.sequence(sequence);
  if (estimate + params.max_tokens > options_.request_token_cap) {
    throw PromptTooLargeError(estimate, params.max_tokens, options_.request_token_cap);
  }
  return estimate;
}

Completion LlmGateway::chat_complete(const prompt::PromptSequence& sequence,
                                     const CompletionParams& params) {
  params.validate();
  const int estimate = check_request(sequence, params);
  // Every one of the n choices may use the full reply budget.
  const long reservation = estimate + static_cast<long>(params.n) * params.max_tokens;

  BudgetDecision permit = budget_->try_acquire(reservation, clock_->now());
  while (!permit.granted) {
    if (!options_.wait_for_budget) throw RateLimitedError(permit.wait_seconds);
    clock_->sleep_for(permit.wait_seconds);
    permit = budget_->try_acquire(reservation, clock_->now());
  }

  std::vector<std::string> attempts;
  double backoff = options_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      Completion result = backend_->complete(sequence, params);
      if (static_cast<int>(result.responses.size()) != params.n) {
        budget_->settle(permit.permit, result.usage.total());
        throw GatewayError("backend '" + backend_->name() + "' returned " +
                           std::to_string(result.responses.size()) + " responses, expected " +
                           std::to_string(params.n));
      }
      budget_->settle(permit.permit, result.usage.total());
      return result;
    } catch (const TransientBackendError& e) {
      attempts.push_back("attempt " + std::to_string(attempt) + ": " + e.what());
      std::clog << "[gateway] " << attempts.back() << '\n';
      if (attempt >= options_.max_attempts) {
        budget_->settle(permit.permit, 0);
        throw GatewayError("backend '" + backend_->name() + "' failed after " +
                               std::to_string(attempt) + " attempts",
                           attempts);
      }
      clock_->sleep_for(backoff);
      backoff *= options_.backoff_factor;
    } catch (const GatewayError&) {
      throw;
    } catch (...) {
      budget_->settle(permit.permit, 0);
      throw;
    }
  }
}

}  // namespace dinechat::llm
