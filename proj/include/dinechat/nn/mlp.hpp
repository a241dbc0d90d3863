#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dinechat/nn/kernels.hpp"
#include "dinechat/nn/matrix.hpp"

namespace dinechat::nn {

struct LayerShape {
  int inputs = 0;
  int outputs = 0;

  bool operator==(const LayerShape&) const = default;
};

// Activations kept from a forward pass for backpropagation.
struct ForwardCache {
  std::vector<Matrix> inputs;      // input of each layer
  std::vector<Matrix> pre_activations;
};

// Fully connected network with ReLU hidden layers and a linear output layer.
// All parameters live in one flat vector, layer by layer, weights before
// biases, so optimisers and finite-difference checks can treat them as one.
class Mlp {
 public:
  Mlp() = default;
  // He-uniform weights, zero biases.
  Mlp(int inputs, const std::vector<int>& hidden, int outputs, std::uint64_t seed);
  Mlp(std::vector<LayerShape> layers, std::vector<double> parameters);

  int input_size() const { return layers_.front().inputs; }
  int output_size() const { return layers_.back().outputs; }
  const std::vector<LayerShape>& layers() const { return layers_; }

  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  std::vector<double> forward(std::span<const double> input) const;
  Matrix forward(const Matrix& inputs, KernelPolicy policy = KernelPolicy::kSerial,
                 ForwardCache* cache = nullptr) const;

  // Gradient of sum(output_grad .* output) w.r.t. every parameter, flat.
  std::vector<double> backward(const ForwardCache& cache, const Matrix& output_grad,
                               KernelPolicy policy = KernelPolicy::kSerial) const;

  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;

  bool operator==(const Mlp& other) const = default;

 private:
  void compute_offsets();

  std::vector<LayerShape> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

}  // namespace dinechat::nn
