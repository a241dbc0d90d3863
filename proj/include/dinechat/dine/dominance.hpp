#pragma once

#include "dinechat/rl/qtable.hpp"

namespace dinechat::dine {

// dominance_c(a) = Q_c(a) - min_a' Q_c(a'), per channel.
rl::ChannelActionTable compute_dominance(const rl::ChannelActionTable& q_values);

inline constexpr double kDefaultUncertaintyThreshold = 0.9;

struct Uncertainty {
  double score = 0.0;  // normalised entropy in [0, 1]
  bool uncertain = false;
};

// Normalised entropy H(p) / log|A| of the softmax over channel-summed
// Q-values; uncertain when the score exceeds the threshold.
Uncertainty compute_uncertainty(const rl::ChannelActionTable& q_values,
                                double threshold = kDefaultUncertaintyThreshold);

}  // namespace dinechat::dine
