#include "dinechat/rl/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "dinechat/error.hpp"

namespace dinechat::rl {

double check_objective(const nn::Mlp& net, std::span<const double> input,
                       std::span<const double> target) {
  const auto out = net.forward(input);
  double sum = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = out[k] - target[k];
    sum += d * d;
  }
  return 0.5 * sum;
}

std::vector<double> analytic_gradient(const nn::Mlp& net, std::span<const double> input,
                                      std::span<const double> target) {
  nn::Matrix x(1, input.size());
  std::copy(input.begin(), input.end(), x.data.begin());
  nn::ForwardCache cache;
  const nn::Matrix out = net.forward(x, nn::KernelPolicy::kSerial, &cache);
  nn::Matrix grad(1, out.cols);
  for (std::size_t k = 0; k < out.cols; ++k) grad.data[k] = out.data[k] - target[k];
  return net.backward(cache, grad);
}

GradientCheckResult gradient_check(const nn::Mlp& net, std::span<const double> input,
                                   std::span<const double> target, double tolerance,
                                   double step, const GradientFn& gradient, double floor) {
  if (target.size() != static_cast<std::size_t>(net.output_size())) {
    throw ConfigError("gradient check target has wrong size");
  }
  const std::vector<double> analytic =
      gradient ? gradient(net, input, target) : analytic_gradient(net, input, target);
  if (analytic.size() != net.num_parameters()) {
    throw ConfigError("analytic gradient has wrong size");
  }

  nn::Mlp probe = net;
  auto params = probe.parameters();
  GradientCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + step;
    const double plus = check_objective(probe, input, target);
    params[k] = saved - step;
    const double minus = check_objective(probe, input, target);
    params[k] = saved;
    const double numeric = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[k] - numeric) / denom;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_parameter = k;
    }
  }
  result.passed = result.max_relative_error < tolerance;
  return result;
}

}  // namespace dinechat::rl
