#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <vector>

namespace dinechat::llm {

inline constexpr long kDefaultTokensPerMinute = 90000;
inline constexpr int kDefaultRequestTokenCap = 4096;

struct LedgerEntry {
  std::uint64_t id = 0;
  double time = 0.0;
  long tokens = 0;
};

struct BudgetDecision {
  bool granted = false;
  // When refused: seconds until enough ledger entries leave the window.
  double wait_seconds = 0.0;
  std::uint64_t permit = 0;
};

// Sliding-window token ledger. An entry recorded at time t counts towards
// every window check made at times in [t, t + window).
class RateBudget {
 public:
  explicit RateBudget(long tokens_per_minute = kDefaultTokensPerMinute,
                      double window_seconds = 60.0);

  // Grants and records the tokens if the window has headroom; otherwise
  // returns the exact wait after which the request would fit.
  BudgetDecision try_acquire(long tokens, double now);

  // Replaces a reservation with the tokens actually used.
  void settle(std::uint64_t permit, long actual_tokens);

  long used(double now) const;
  long tokens_per_minute() const { return cap_; }
  double window() const { return window_; }
  // Granted requests (bounded history), including expired ones.
  std::vector<LedgerEntry> ledger() const;

 private:
  void expire(double now);

  long cap_;
  double window_;
  std::uint64_t next_id_ = 1;
  mutable std::mutex mutex_;
  std::deque<LedgerEntry> entries_;
  std::vector<LedgerEntry> history_;  // most recent grants, bounded
};

}  // namespace dinechat::llm
