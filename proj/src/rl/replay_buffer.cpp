#include "dinechat/rl/replay_buffer.hpp"

#include "dinechat/error.hpp"

namespace dinechat::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition transition) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(transition));
    return;
  }
  items_[head_] = std::move(transition);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t index) const {
  if (index >= items_.size()) throw OutOfRangeError("replay index out of range");
  return items_[(head_ + index) % items_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size,
                                             std::mt19937_64& rng) const {
  if (items_.empty()) throw ConfigError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(items_[pick(rng)]);
  return batch;
}

}  // namespace dinechat::rl
