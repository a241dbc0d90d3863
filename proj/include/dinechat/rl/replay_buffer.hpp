#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "dinechat/sim/env.hpp"

namespace dinechat::rl {

struct Transition {
  sim::EnvState state;
  int action = 0;
  sim::RewardVector reward;
  sim::EnvState next_state;
  bool done = false;
};

// Fixed-capacity ring buffer; once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition transition);
  // Uniform sampling with replacement.
  std::vector<Transition> sample(std::size_t batch_size, std::mt19937_64& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  // Index 0 is the oldest retained transition.
  const Transition& at(std::size_t index) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next slot to overwrite once full
  std::vector<Transition> items_;
};

}  // namespace dinechat::rl
