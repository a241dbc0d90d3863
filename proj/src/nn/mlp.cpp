#include "dinechat/nn/mlp.hpp"

#include <cmath>
#include <random>

#include "dinechat/error.hpp"

namespace dinechat::nn {
namespace {

void dense_forward(KernelPolicy p, const Matrix& x, std::span<const double> w,
                   std::span<const double> b, Matrix& z) {
  if (p == KernelPolicy::kParallel) {
    kernels::parallel::dense_forward(x, w, b, z);
  } else {
    kernels::serial::dense_forward(x, w, b, z);
  }
}

void relu(KernelPolicy p, const Matrix& z, Matrix& a) {
  if (p == KernelPolicy::kParallel) {
    kernels::parallel::relu(z, a);
  } else {
    kernels::serial::relu(z, a);
  }
}

}  // namespace

Mlp::Mlp(int inputs, const std::vector<int>& hidden, int outputs, std::uint64_t seed) {
  if (inputs <= 0 || outputs <= 0) throw ConfigError("network sizes must be positive");
  int prev = inputs;
  for (int width : hidden) {
    if (width <= 0) throw ConfigError("hidden layer widths must be positive");
    layers_.push_back({prev, width});
    prev = width;
  }
  layers_.push_back({prev, outputs});
  compute_offsets();

  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const double limit = std::sqrt(6.0 / layers_[l].inputs);
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t count =
        static_cast<std::size_t>(layers_[l].inputs) * layers_[l].outputs;
    for (std::size_t k = 0; k < count; ++k) params_[offsets_[l] + k] = dist(rng);
  }
}

Mlp::Mlp(std::vector<LayerShape> layers, std::vector<double> parameters)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (layers_[l].inputs != layers_[l - 1].outputs) {
      throw ConfigError("layer shapes do not chain");
    }
  }
  compute_offsets();
  if (parameters.size() != params_.size()) {
    throw ConfigError("parameter count " + std::to_string(parameters.size()) +
                      " does not match layer shapes (" + std::to_string(params_.size()) +
                      ")");
  }
  params_ = std::move(parameters);
}

void Mlp::compute_offsets() {
  offsets_.clear();
  std::size_t total = 0;
  for (const auto& layer : layers_) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(layer.inputs) * layer.outputs + layer.outputs;
  }
  params_.assign(total, 0.0);
}

std::span<const double> Mlp::weights(std::size_t layer) const {
  const auto& s = layers_[layer];
  return {params_.data() + offsets_[layer], static_cast<std::size_t>(s.inputs) * s.outputs};
}

std::span<const double> Mlp::bias(std::size_t layer) const {
  const auto& s = layers_[layer];
  return {params_.data() + offsets_[layer] + static_cast<std::size_t>(s.inputs) * s.outputs,
          static_cast<std::size_t>(s.outputs)};
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Matrix x(1, input.size());
  std::copy(input.begin(), input.end(), x.data.begin());
  return forward(x).data;
}

Matrix Mlp::forward(const Matrix& inputs, KernelPolicy policy, ForwardCache* cache) const {
  if (inputs.cols != static_cast<std::size_t>(input_size())) {
    throw ConfigError("network expects " + std::to_string(input_size()) +
                      " inputs, got " + std::to_string(inputs.cols));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre_activations.clear();
  }
  Matrix current = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z;
    dense_forward(policy, current, weights(l), bias(l), z);
    if (cache) {
      cache->inputs.push_back(current);
      cache->pre_activations.push_back(z);
    }
    if (l + 1 < layers_.size()) {
      relu(policy, z, current);
    } else {
      current = std::move(z);
    }
  }
  return current;
}

std::vector<double> Mlp::backward(const ForwardCache& cache, const Matrix& output_grad,
                                  KernelPolicy policy) const {
  std::vector<double> grads(params_.size(), 0.0);
  Matrix grad = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& s = layers_[l];
    const std::size_t wcount = static_cast<std::size_t>(s.inputs) * s.outputs;
    std::span<double> gw(grads.data() + offsets_[l], wcount);
    std::span<double> gb(grads.data() + offsets_[l] + wcount,
                         static_cast<std::size_t>(s.outputs));
    if (policy == KernelPolicy::kParallel) {
      kernels::parallel::dense_backward_params(grad, cache.inputs[l], gw, gb);
    } else {
      kernels::serial::dense_backward_params(grad, cache.inputs[l], gw, gb);
    }
    if (l == 0) break;
    Matrix grad_a;
    Matrix grad_z;
    if (policy == KernelPolicy::kParallel) {
      kernels::parallel::dense_backward_input(grad, weights(l), grad_a);
      kernels::parallel::relu_backward(cache.pre_activations[l - 1], grad_a, grad_z);
    } else {
      kernels::serial::dense_backward_input(grad, weights(l), grad_a);
      kernels::serial::relu_backward(cache.pre_activations[l - 1], grad_a, grad_z);
    }
    grad = std::move(grad_z);
  }
  return grads;
}

}  // namespace dinechat::nn
