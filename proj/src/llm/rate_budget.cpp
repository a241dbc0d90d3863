#include "dinechat/llm/rate_budget.hpp"

#include "dinechat/error.hpp"

namespace dinechat::llm {

namespace {
constexpr std::size_t kHistoryLimit = 10000;
}  // namespace

RateBudget::RateBudget(long tokens_per_minute, double window_seconds)
    : cap_(tokens_per_minute), window_(window_seconds) {
  if (cap_ <= 0 || window_ <= 0.0) throw ConfigError("rate budget must be positive");
}

void RateBudget::expire(double now) {
  while (!entries_.empty() && entries_.front().time + window_ <= now) entries_.pop_front();
}

BudgetDecision RateBudget::try_acquire(long tokens, double now) {
  if (tokens < 0) throw ConfigError("token request must be non-negative");
  if (tokens > cap_) {
    throw BudgetError("request of " + std::to_string(tokens) +
                      " tokens can never fit a budget of " + std::to_string(cap_) +
                      " tokens per window");
  }
  std::lock_guard lock(mutex_);
  expire(now);
  long in_window = 0;
  for (const auto& e : entries_) in_window += e.tokens;

  BudgetDecision d;
  if (in_window + tokens <= cap_) {
    d.granted = true;
    d.permit = next_id_++;
    entries_.push_back({d.permit, now, tokens});
    history_.push_back(entries_.back());
    if (history_.size() > kHistoryLimit) history_.erase(history_.begin());
    return d;
  }
  long remaining = in_window;
  for (const auto& e : entries_) {
    remaining -= e.tokens;
    if (remaining + tokens <= cap_) {
      d.wait_seconds = e.time + window_ - now;
      break;
    }
  }
  return d;
}

void RateBudget::settle(std::uint64_t permit, long actual_tokens) {
  std::lock_guard lock(mutex_);
  for (auto& e : entries_) {
    if (e.id == permit) e.tokens = actual_tokens;
  }
  for (auto& e : history_) {
    if (e.id == permit) e.tokens = actual_tokens;
  }
}

long RateBudget::used(double now) const {
  std::lock_guard lock(mutex_);
  long total = 0;
  for (const auto& e : entries_) {
    if (e.time <= now && now < e.time + window_) total += e.tokens;
  }
  return total;
}

std::vector<LedgerEntry> RateBudget::ledger() const {
  std::lock_guard lock(mutex_);
  return history_;
}

}  // namespace dinechat::llm
