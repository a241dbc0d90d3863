#include "dinechat/llm/clock.hpp"

#include <chrono>
#include <thread>

namespace dinechat::llm {

double SystemClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for(double seconds) {
  if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

double SimulatedClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

void SimulatedClock::sleep_for(double seconds) {
  std::lock_guard lock(mutex_);
  if (seconds > 0.0) now_ += seconds;
}

}  // namespace dinechat::llm
