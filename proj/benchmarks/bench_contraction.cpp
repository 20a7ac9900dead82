#include <benchmark/benchmark.h>

#include "tn4ml/initializers.hpp"
#include "tn4ml/linalg.hpp"
#include "tn4ml/rng.hpp"
#include "tn4ml/tensor.hpp"
#include "tn4ml/tensor_train.hpp"

using namespace tn4ml;

namespace {

Tensor random_tensor(std::vector<Index> idx, std::uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(idx));
  CounterRng rng(seed);
  for (double& x : t.data()) x = rng.normal();
  return t;
}

TensorTrain chain(std::size_t n, std::size_t d, std::size_t bond) {
  const std::vector<std::size_t> dims{d};
  return init_model(build_shape(n, dims, std::nullopt, bond), NetworkKind::mps, InitSpec{RandnInit{}, 1});
}

}  // namespace

static void BM_PairwiseContract(benchmark::State& state) {
  const auto D = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({{"l", D}, {"p", 2}, {"m", D}}, 1);
  const Tensor b = random_tensor({{"m", D}, {"q", 2}, {"r", D}}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(contract(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PairwiseContract)->RangeMultiplier(2)->Range(4, 64)->Complexity();

static void BM_Svd(benchmark::State& state) {
  const auto D = static_cast<std::size_t>(state.range(0));
  const Tensor t = random_tensor({{"l", D}, {"p", 2}, {"q", 2}, {"r", D}}, 3);
  const std::vector<std::string> rows{"l", "p"};
  SvdOptions o;
  o.max_rank = D;
  for (auto _ : state) benchmark::DoNotOptimize(svd(t, rows, o));
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(4, 64);

static void BM_Norm(benchmark::State& state) {
  const auto tt = chain(static_cast<std::size_t>(state.range(0)), 2, static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(norm(tt));
}
BENCHMARK(BM_Norm)->Args({30, 10})->Args({196, 10})->Args({196, 30});

static void BM_Canonicalize(benchmark::State& state) {
  const auto tt = chain(static_cast<std::size_t>(state.range(0)), 3, static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(tt, tt.size() / 2));
}
BENCHMARK(BM_Canonicalize)->Args({30, 20})->Args({30, 50});
