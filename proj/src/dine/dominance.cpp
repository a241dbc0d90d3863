#include "dinechat/dine/dominance.hpp"

#include <algorithm>
#include <cmath>

#include "dinechat/error.hpp"

namespace dinechat::dine {

rl::ChannelActionTable compute_dominance(const rl::ChannelActionTable& q) {
  rl::ChannelActionTable out(q.channels, q.actions);
  if (q.num_actions() == 0) return out;
  for (std::size_t c = 0; c < q.num_channels(); ++c) {
    double lowest = q.at(c, 0);
    for (std::size_t a = 1; a < q.num_actions(); ++a) lowest = std::min(lowest, q.at(c, a));
    for (std::size_t a = 0; a < q.num_actions(); ++a) out.at(c, a) = q.at(c, a) - lowest;
  }
  return out;
}

Uncertainty compute_uncertainty(const rl::ChannelActionTable& q, double threshold) {
  const std::size_t n = q.num_actions();
  if (n < 2) throw ConfigError("uncertainty needs at least two actions");
  const auto summed = q.summed();
  const double peak = *std::max_element(summed.begin(), summed.end());
  std::vector<double> weights(n);
  double z = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    weights[a] = std::exp(summed[a] - peak);
    z += weights[a];
  }
  double entropy = 0.0;
  for (double w : weights) {
    const double p = w / z;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  Uncertainty u;
  u.score = std::clamp(entropy / std::log(static_cast<double>(n)), 0.0, 1.0);
  u.uncertain = u.score > threshold;
  return u;
}

}  // namespace dinechat::dine
