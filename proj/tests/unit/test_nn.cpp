#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "dinechat/error.hpp"
#include "dinechat/nn/kernels.hpp"
#include "dinechat/nn/mlp.hpp"

using namespace dinechat;
using namespace dinechat::nn;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, bool with_zeros = false) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  Matrix m(r, c);
  for (auto& v : m.data) v = with_zeros && rng() % 5 == 0 ? 0.0 : d(rng);
  return m;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Bitwise comparison; EXPECT_EQ on doubles would accept -0 == +0.
bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

struct Shape {
  std::size_t batch, in, out;
};

}  // namespace

TEST(Kernels, ParsePolicy) {
  EXPECT_EQ(parse_kernel_policy("serial"), KernelPolicy::kSerial);
  EXPECT_EQ(parse_kernel_policy("parallel"), KernelPolicy::kParallel);
  EXPECT_THROW(parse_kernel_policy("gpu"), ConfigError);
}

TEST(Kernels, SerialMatchesNaiveReference) {
  std::mt19937_64 rng(1);
  const Matrix x = random_matrix(7, 5, rng);
  const auto w = random_vector(3 * 5, rng);
  const auto b = random_vector(3, rng);
  Matrix z;
  kernels::serial::dense_forward(x, w, b, z);
  ASSERT_EQ(z.rows, 7u);
  ASSERT_EQ(z.cols, 3u);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t o = 0; o < 3; ++o) {
      double s = b[o];
      for (std::size_t k = 0; k < 5; ++k) s += x(i, k) * w[o * 5 + k];
      EXPECT_NEAR(z(i, o), s, 1e-12);
    }
  }

  const Matrix gz = random_matrix(7, 3, rng);
  Matrix gx;
  kernels::serial::dense_backward_input(gz, w, gx);
  std::vector<double> gw(15), gb(3);
  kernels::serial::dense_backward_params(gz, x, gw, gb);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t k = 0; k < 5; ++k) {
      double s = 0.0;
      for (std::size_t o = 0; o < 3; ++o) s += gz(i, o) * w[o * 5 + k];
      EXPECT_NEAR(gx(i, k), s, 1e-12);
    }
  }
  for (std::size_t o = 0; o < 3; ++o) {
    double sb = 0.0;
    for (std::size_t i = 0; i < 7; ++i) sb += gz(i, o);
    EXPECT_NEAR(gb[o], sb, 1e-12);
    for (std::size_t k = 0; k < 5; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < 7; ++i) s += gz(i, o) * x(i, k);
      EXPECT_NEAR(gw[o * 5 + k], s, 1e-12);
    }
  }
}

TEST(Kernels, ReluAndBackward) {
  Matrix z(1, 4);
  z.data = {-1.0, 0.0, 2.0, -0.5};
  Matrix a;
  kernels::serial::relu(z, a);
  EXPECT_EQ(a.data, (std::vector<double>{0.0, 0.0, 2.0, 0.0}));
  Matrix ga(1, 4);
  ga.data = {1.0, 1.0, 1.0, 1.0};
  Matrix gz;
  kernels::serial::relu_backward(z, ga, gz);
  EXPECT_EQ(gz.data, (std::vector<double>{0.0, 0.0, 1.0, 0.0}));
}

// Property: for random shapes the parallel kernels reproduce the serial
// reference bit for bit.
TEST(Kernels, ParallelIsBitIdenticalToSerial) {
  std::mt19937_64 rng(42);
  const std::vector<Shape> shapes = {{1, 1, 1},   {1, 5, 64},  {32, 5, 64}, {32, 64, 64},
                                     {33, 64, 15}, {257, 17, 3}, {3, 129, 65}, {128, 64, 64}};
  for (const auto& s : shapes) {
    SCOPED_TRACE(std::to_string(s.batch) + "x" + std::to_string(s.in) + "->" +
                 std::to_string(s.out));
    const Matrix x = random_matrix(s.batch, s.in, rng);
    const auto w = random_vector(s.in * s.out, rng);
    const auto b = random_vector(s.out, rng);
    Matrix zs, zp;
    kernels::serial::dense_forward(x, w, b, zs);
    kernels::parallel::dense_forward(x, w, b, zp);
    EXPECT_TRUE(same_bits(zs.data, zp.data));

    const Matrix gz = random_matrix(s.batch, s.out, rng, true);
    Matrix gxs, gxp;
    kernels::serial::dense_backward_input(gz, w, gxs);
    kernels::parallel::dense_backward_input(gz, w, gxp);
    EXPECT_TRUE(same_bits(gxs.data, gxp.data));

    std::vector<double> gws(w.size()), gbs(b.size()), gwp(w.size()), gbp(b.size());
    kernels::serial::dense_backward_params(gz, x, gws, gbs);
    kernels::parallel::dense_backward_params(gz, x, gwp, gbp);
    EXPECT_TRUE(same_bits(gws, gwp));
    EXPECT_TRUE(same_bits(gbs, gbp));

    Matrix as, ap, rs, rp;
    kernels::serial::relu(zs, as);
    kernels::parallel::relu(zs, ap);
    EXPECT_TRUE(same_bits(as.data, ap.data));
    kernels::serial::relu_backward(zs, zs, rs);
    kernels::parallel::relu_backward(zs, zs, rp);
    EXPECT_TRUE(same_bits(rs.data, rp.data));
  }
}

TEST(Mlp, ShapesAndInitialisation) {
  Mlp net(5, {64, 64}, 15, 3);
  EXPECT_EQ(net.input_size(), 5);
  EXPECT_EQ(net.output_size(), 15);
  EXPECT_EQ(net.num_parameters(), 5u * 64 + 64 + 64 * 64 + 64 + 64 * 15 + 15);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const double limit = std::sqrt(6.0 / net.layers()[l].inputs);
    for (double w : net.weights(l)) EXPECT_LE(std::abs(w), limit);
    for (double b : net.bias(l)) EXPECT_EQ(b, 0.0);
  }
  EXPECT_EQ(Mlp(5, {8}, 2, 3), Mlp(5, {8}, 2, 3));
  EXPECT_NE(Mlp(5, {8}, 2, 3), Mlp(5, {8}, 2, 4));
  EXPECT_THROW(Mlp(0, {8}, 2, 1), ConfigError);
  EXPECT_THROW(Mlp(2, {0}, 2, 1), ConfigError);
  EXPECT_THROW(Mlp({{2, 3}, {4, 1}}, std::vector<double>(13)), ConfigError);
  EXPECT_THROW(Mlp({{2, 3}}, std::vector<double>(5)), ConfigError);
}

TEST(Mlp, ForwardMatchesHandComputation) {
  // 2 -> 2 (relu) -> 1
  Mlp net({{2, 2}, {2, 1}}, {1.0, -1.0, 0.5, 0.5, 0.1, -0.2, 2.0, -3.0, 0.25});
  const auto out = net.forward(std::vector<double>{1.0, 2.0});
  // h = relu([1-2+0.1, 0.5+1-0.2]) = [0, 1.3]; y = 2*0 - 3*1.3 + 0.25
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0], -3.65, 1e-12);
  EXPECT_THROW(net.forward(std::vector<double>{1.0}), ConfigError);
}

TEST(Mlp, BatchForwardAndPoliciesAgree) {
  std::mt19937_64 rng(9);
  Mlp net(5, {64, 64}, 15, 11);
  const Matrix x = random_matrix(32, 5, rng);
  ForwardCache cs, cp;
  const Matrix ys = net.forward(x, KernelPolicy::kSerial, &cs);
  const Matrix yp = net.forward(x, KernelPolicy::kParallel, &cp);
  EXPECT_TRUE(same_bits(ys.data, yp.data));
  for (std::size_t i = 0; i < 32; ++i) {
    const auto single = net.forward(x.row(i));
    for (std::size_t o = 0; o < 15; ++o) EXPECT_EQ(single[o], ys(i, o));
  }
  const Matrix g = random_matrix(32, 15, rng);
  EXPECT_TRUE(same_bits(net.backward(cs, g, KernelPolicy::kSerial),
                        net.backward(cp, g, KernelPolicy::kParallel)));
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  Mlp net(3, {6}, 2, 7);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix g = random_matrix(4, 2, rng);
  ForwardCache cache;
  net.forward(x, KernelPolicy::kSerial, &cache);
  const auto grads = net.backward(cache, g);
  auto objective = [&](const Mlp& m) {
    const Matrix y = m.forward(x);
    double s = 0.0;
    for (std::size_t k = 0; k < y.data.size(); ++k) s += y.data[k] * g.data[k];
    return s;
  };
  for (std::size_t k = 0; k < net.num_parameters(); ++k) {
    Mlp plus = net, minus = net;
    plus.parameters()[k] += 1e-6;
    minus.parameters()[k] -= 1e-6;
    const double numeric = (objective(plus) - objective(minus)) / 2e-6;
    EXPECT_NEAR(grads[k], numeric, 1e-6 * std::max(1.0, std::abs(numeric)));
  }
}
