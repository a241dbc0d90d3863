#pragma once

#include <string>
#include <vector>

namespace dinechat::rl {

// Per-channel, per-action values. Storage is channel-major:
// values[c * num_actions + a].
struct ChannelActionTable {
  std::vector<std::string> channels;
  std::vector<std::string> actions;
  std::vector<double> values;

  ChannelActionTable() = default;
  ChannelActionTable(std::vector<std::string> channel_names,
                     std::vector<std::string> action_names)
      : channels(std::move(channel_names)),
        actions(std::move(action_names)),
        values(channels.size() * actions.size(), 0.0) {}

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_actions() const { return actions.size(); }

  double& at(std::size_t channel, std::size_t action) {
    return values[channel * actions.size() + action];
  }
  double at(std::size_t channel, std::size_t action) const {
    return values[channel * actions.size() + action];
  }

  // Sum over channels, accumulated in channel order.
  double summed(std::size_t action) const {
    double total = 0.0;
    for (std::size_t c = 0; c < channels.size(); ++c) total += at(c, action);
    return total;
  }
  std::vector<double> summed() const {
    std::vector<double> out(actions.size());
    for (std::size_t a = 0; a < actions.size(); ++a) out[a] = summed(a);
    return out;
  }

  // Lowest index wins ties.
  std::size_t argmax_summed() const {
    std::size_t best = 0;
    double best_value = summed(0);
    for (std::size_t a = 1; a < actions.size(); ++a) {
      const double v = summed(a);
      if (v > best_value) {
        best = a;
        best_value = v;
      }
    }
    return best;
  }

  bool operator==(const ChannelActionTable&) const = default;
};

}  // namespace dinechat::rl
