#pragma once

#include <mutex>

namespace dinechat::llm {

// Seconds on an arbitrary monotonic axis.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
  virtual void sleep_for(double seconds) = 0;
};

class SystemClock : public Clock {
 public:
  double now() override;
  void sleep_for(double seconds) override;
};

// Time advances only through sleep_for/advance; for tests and replays.
class SimulatedClock : public Clock {
 public:
  explicit SimulatedClock(double start = 0.0) : now_(start) {}
  double now() override;
  void sleep_for(double seconds) override;
  void advance(double seconds) { sleep_for(seconds); }

 private:
  std::mutex mutex_;
  double now_;
};

}  // namespace dinechat::llm
