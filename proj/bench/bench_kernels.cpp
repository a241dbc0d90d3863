#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dinechat/nn/kernels.hpp"
#include "dinechat/nn/mlp.hpp"
#include "dinechat/rl/agent.hpp"
#include "dinechat/sim/workload.hpp"

using namespace dinechat;

namespace {

nn::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Matrix m(rows, cols);
  for (auto& v : m.data) v = u(rng);
  return m;
}

template <bool Parallel>
void BM_DenseForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  const auto x = random_matrix(batch, width, 1);
  const auto w = random_matrix(width, width, 2);
  const std::vector<double> b(width, 0.1);
  nn::Matrix z;
  for (auto _ : state) {
    if constexpr (Parallel) {
      nn::kernels::parallel::dense_forward(x, w.data, b, z);
    } else {
      nn::kernels::serial::dense_forward(x, w.data, b, z);
    }
    benchmark::DoNotOptimize(z.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch * width * width));
}

template <bool Parallel>
void BM_DenseBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto width = static_cast<std::size_t>(state.range(1));
  const auto x = random_matrix(batch, width, 3);
  const auto gz = random_matrix(batch, width, 4);
  const auto w = random_matrix(width, width, 5);
  std::vector<double> gw(width * width), gb(width);
  nn::Matrix gx;
  for (auto _ : state) {
    if constexpr (Parallel) {
      nn::kernels::parallel::dense_backward_params(gz, x, gw, gb);
      nn::kernels::parallel::dense_backward_input(gz, w.data, gx);
    } else {
      nn::kernels::serial::dense_backward_params(gz, x, gw, gb);
      nn::kernels::serial::dense_backward_input(gz, w.data, gx);
    }
    benchmark::DoNotOptimize(gw.data());
    benchmark::DoNotOptimize(gx.data.data());
  }
}

// One agent update on a replayed batch: the hot loop of training.
void BM_AgentUpdate(benchmark::State& state) {
  rl::AgentConfig cfg;
  cfg.kernel_policy = state.range(0) ? nn::KernelPolicy::kParallel : nn::KernelPolicy::kSerial;
  cfg.batch_size = static_cast<int>(state.range(1));
  sim::EnvConfig env_cfg;
  rl::DecomposedDqn agent(cfg, env_cfg);
  sim::WebshopEnv env(env_cfg);
  auto s = env.reset(1, sim::generate_trace(1, 200, sim::WorkloadProfile::kDiurnal));
  std::vector<rl::Transition> batch;
  for (int i = 0; i < cfg.batch_size; ++i) {
    const int a = i % sim::kNumActions;
    const auto r = env.step(s, static_cast<sim::Action>(a));
    batch.push_back({s, a, r.reward, r.state, false});
    s = r.state;
  }
  for (auto _ : state) benchmark::DoNotOptimize(agent.update(batch));
}

}  // namespace

BENCHMARK(BM_DenseForward<false>)->Args({32, 64})->Args({256, 256})->Args({1024, 256});
BENCHMARK(BM_DenseForward<true>)->Args({32, 64})->Args({256, 256})->Args({1024, 256});
BENCHMARK(BM_DenseBackward<false>)->Args({32, 64})->Args({256, 256});
BENCHMARK(BM_DenseBackward<true>)->Args({32, 64})->Args({256, 256});
BENCHMARK(BM_AgentUpdate)->ArgsProduct({{0, 1}, {32, 256}});

BENCHMARK_MAIN();
