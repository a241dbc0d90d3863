#pragma once

#include <span>
#include <string_view>

#include "dinechat/nn/matrix.hpp"

namespace dinechat::nn {

enum class KernelPolicy { kSerial, kParallel };

KernelPolicy parse_kernel_policy(std::string_view name);

// Batched dense-layer kernels. Weights are (out x in) row-major.
//
// Both variants compute every output element with the same loop order, so
// their results are bit-identical; `serial` is the reference the parallel
// kernels are tested against.
namespace kernels {

namespace serial {
// z = x * W^T + b
void dense_forward(const Matrix& x, std::span<const double> weights,
                   std::span<const double> bias, Matrix& z);
// grad_x = grad_z * W
void dense_backward_input(const Matrix& grad_z, std::span<const double> weights,
                          Matrix& grad_x);
// grad_W = grad_z^T * x, grad_b = column sums of grad_z (summed in batch order)
void dense_backward_params(const Matrix& grad_z, const Matrix& x,
                           std::span<double> grad_weights, std::span<double> grad_bias);
void relu(const Matrix& z, Matrix& a);
// grad_z = grad_a where z > 0, else 0
void relu_backward(const Matrix& z, const Matrix& grad_a, Matrix& grad_z);
}  // namespace serial

namespace parallel {
void dense_forward(const Matrix& x, std::span<const double> weights,
                   std::span<const double> bias, Matrix& z);
void dense_backward_input(const Matrix& grad_z, std::span<const double> weights,
                          Matrix& grad_x);
void dense_backward_params(const Matrix& grad_z, const Matrix& x,
                           std::span<double> grad_weights, std::span<double> grad_bias);
void relu(const Matrix& z, Matrix& a);
void relu_backward(const Matrix& z, const Matrix& grad_a, Matrix& grad_z);
}  // namespace parallel

}  // namespace kernels
}  // namespace dinechat::nn
