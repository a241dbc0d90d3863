#include <omp.h>

#include "dinechat/nn/kernels.hpp"

namespace dinechat::nn::kernels::parallel {

// Loop bodies mirror the serial kernels exactly; only the outer loop is
// distributed, and no reduction crosses threads.

void dense_forward(const Matrix& x, std::span<const double> weights,
                   std::span<const double> bias, Matrix& z) {
  const long rows = static_cast<long>(x.rows);
  const std::size_t in = x.cols;
  const std::size_t out = bias.size();
  z.rows = x.rows;
  z.cols = out;
  z.data.assign(x.rows * out, 0.0);
  const double* xd = x.data.data();
  const double* wd = weights.data();
  const double* bd = bias.data();
  double* zd = z.data.data();
#pragma omp parallel for schedule(static)
  for (long b = 0; b < rows; ++b) {
    const double* xr = xd + b * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double* w = wd + j * in;
      double acc = bd[j];
      for (std::size_t i = 0; i < in; ++i) acc += w[i] * xr[i];
      zd[b * out + j] = acc;
    }
  }
}

void dense_backward_input(const Matrix& grad_z, std::span<const double> weights,
                          Matrix& grad_x) {
  const long rows = static_cast<long>(grad_z.rows);
  const std::size_t out = grad_z.cols;
  const std::size_t in = weights.size() / out;
  grad_x.rows = grad_z.rows;
  grad_x.cols = in;
  grad_x.data.assign(grad_z.rows * in, 0.0);
  const double* gd = grad_z.data.data();
  const double* wd = weights.data();
  double* gxd = grad_x.data.data();
#pragma omp parallel for schedule(static)
  for (long b = 0; b < rows; ++b) {
    const double* g = gd + b * out;
    double* gx = gxd + b * in;
    for (std::size_t j = 0; j < out; ++j) {
      const double* w = wd + j * in;
      for (std::size_t i = 0; i < in; ++i) gx[i] += g[j] * w[i];
    }
  }
}

void dense_backward_params(const Matrix& grad_z, const Matrix& x,
                           std::span<double> grad_weights, std::span<double> grad_bias) {
  const long out = static_cast<long>(grad_z.cols);
  const std::size_t in = x.cols;
  const std::size_t rows = grad_z.rows;
  const double* gd = grad_z.data.data();
  const double* xd = x.data.data();
  double* gwd = grad_weights.data();
  double* gbd = grad_bias.data();
  // Each output unit owns its weight row, so the batch sum stays in order.
#pragma omp parallel for schedule(static)
  for (long j = 0; j < out; ++j) {
    double* gw = gwd + j * in;
    double gb = 0.0;
    for (std::size_t b = 0; b < rows; ++b) {
      const double g = gd[b * out + j];
      const double* xr = xd + b * in;
      gb += g;
      for (std::size_t i = 0; i < in; ++i) gw[i] += g * xr[i];
    }
    gbd[j] += gb;
  }
}

void relu(const Matrix& z, Matrix& a) {
  a.rows = z.rows;
  a.cols = z.cols;
  a.data.resize(z.data.size());
  const long n = static_cast<long>(z.data.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) a.data[k] = z.data[k] > 0.0 ? z.data[k] : 0.0;
}

void relu_backward(const Matrix& z, const Matrix& grad_a, Matrix& grad_z) {
  grad_z.rows = z.rows;
  grad_z.cols = z.cols;
  grad_z.data.resize(z.data.size());
  const long n = static_cast<long>(z.data.size());
#pragma omp parallel for schedule(static)
  for (long k = 0; k < n; ++k) grad_z.data[k] = z.data[k] > 0.0 ? grad_a.data[k] : 0.0;
}

}  // namespace dinechat::nn::kernels::parallel
