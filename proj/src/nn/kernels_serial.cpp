#include "dinechat/nn/kernels.hpp"

#include <string>

#include "dinechat/error.hpp"

namespace dinechat::nn {

KernelPolicy parse_kernel_policy(std::string_view name) {
  if (name == "serial") return KernelPolicy::kSerial;
  if (name == "parallel") return KernelPolicy::kParallel;
  throw ConfigError("unknown kernel policy '" + std::string(name) + "'");
}

namespace kernels::serial {

void dense_forward(const Matrix& x, std::span<const double> weights,
                   std::span<const double> bias, Matrix& z) {
  const std::size_t in = x.cols;
  const std::size_t out = bias.size();
  z.rows = x.rows;
  z.cols = out;
  z.data.assign(x.rows * out, 0.0);
  for (std::size_t b = 0; b < x.rows; ++b) {
    const double* xr = x.data.data() + b * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double* w = weights.data() + j * in;
      double acc = bias[j];
      for (std::size_t i = 0; i < in; ++i) acc += w[i] * xr[i];
      z.data[b * out + j] = acc;
    }
  }
}

void dense_backward_input(const Matrix& grad_z, std::span<const double> weights,
                          Matrix& grad_x) {
  const std::size_t out = grad_z.cols;
  const std::size_t in = weights.size() / out;
  grad_x.rows = grad_z.rows;
  grad_x.cols = in;
  grad_x.data.assign(grad_z.rows * in, 0.0);
  for (std::size_t b = 0; b < grad_z.rows; ++b) {
    const double* g = grad_z.data.data() + b * out;
    double* gx = grad_x.data.data() + b * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double* w = weights.data() + j * in;
      for (std::size_t i = 0; i < in; ++i) gx[i] += g[j] * w[i];
    }
  }
}

void dense_backward_params(const Matrix& grad_z, const Matrix& x,
                           std::span<double> grad_weights, std::span<double> grad_bias) {
  const std::size_t out = grad_z.cols;
  const std::size_t in = x.cols;
  for (std::size_t j = 0; j < out; ++j) {
    double* gw = grad_weights.data() + j * in;
    double gb = 0.0;
    for (std::size_t b = 0; b < grad_z.rows; ++b) {
      const double g = grad_z.data[b * out + j];
      const double* xr = x.data.data() + b * in;
      gb += g;
      for (std::size_t i = 0; i < in; ++i) gw[i] += g * xr[i];
    }
    grad_bias[j] += gb;
  }
}

void relu(const Matrix& z, Matrix& a) {
  a.rows = z.rows;
  a.cols = z.cols;
  a.data.resize(z.data.size());
  for (std::size_t k = 0; k < z.data.size(); ++k) a.data[k] = z.data[k] > 0.0 ? z.data[k] : 0.0;
}

void relu_backward(const Matrix& z, const Matrix& grad_a, Matrix& grad_z) {
  grad_z.rows = z.rows;
  grad_z.cols = z.cols;
  grad_z.data.resize(z.data.size());
  for (std::size_t k = 0; k < z.data.size(); ++k) {
    grad_z.data[k] = z.data[k] > 0.0 ? grad_a.data[k] : 0.0;
  }
}

}  // namespace kernels::serial
}  // namespace dinechat::nn
