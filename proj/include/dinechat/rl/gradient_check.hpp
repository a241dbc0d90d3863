#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dinechat/nn/mlp.hpp"

namespace dinechat::rl {

// Analytic gradient of the check objective for a given network, input and
// target. Overridable so a deliberately wrong gradient can be checked.
using GradientFn = std::function<std::vector<double>(
    const nn::Mlp&, std::span<const double> input, std::span<const double> target)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  bool passed = false;
};

// Objective: 0.5 * sum_k (out_k - target_k)^2.
double check_objective(const nn::Mlp& net, std::span<const double> input,
                       std::span<const double> target);
// Backpropagated gradient of check_objective.
std::vector<double> analytic_gradient(const nn::Mlp& net, std::span<const double> input,
                                      std::span<const double> target);

// Central finite differences over every parameter. Relative error per
// parameter is |g_a - g_n| / max(|g_a|, |g_n|, floor).
GradientCheckResult gradient_check(const nn::Mlp& net, std::span<const double> input,
                                   std::span<const double> target, double tolerance,
                                   double step = 1e-5, const GradientFn& gradient = {},
                                   double floor = 1e-6);

}  // namespace dinechat::rl
