#include <benchmark/benchmark.h>

#include <numeric>

#include "tn4ml/embeddings.hpp"
#include "tn4ml/initializers.hpp"
#include "tn4ml/objectives.hpp"
#include "tn4ml/rng.hpp"

using namespace tn4ml;

namespace {

EmbeddedDataset random_inputs(std::size_t samples, std::size_t n, const LocalMapSpec& map, std::uint64_t seed) {
  CounterRng rng(seed);
  EmbeddedDataset data;
  const std::vector<LocalMapSpec> maps{map};
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform();
    data.states.push_back(embed_product_state(x, maps));
    data.labels.push_back(i % 2);
  }
  return data;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

// 14x14 anomaly model; args are spacing and bond.
static void BM_SmpoLogQuadGradient(benchmark::State& state) {
  const std::size_t n = 196;
  const auto spacing = static_cast<std::size_t>(state.range(0));
  const auto bond = static_cast<std::size_t>(state.range(1));
  const std::vector<std::size_t> dims{2};
  const auto sigs = build_shape(n, dims, LowerSpec{SpacingSpec::uniform(spacing), 2}, bond);
  const auto model = init_model(sigs, NetworkKind::smpo, InitSpec{HaarInit{}, 4});
  const auto data = random_inputs(32, n, TrigonometricMap{1}, 5);
  LossSpec loss;
  loss.regularizers.push_back({RegularizerKind::relu_log_norm, 1.0});
  const auto batch = iota(32);
  for (auto _ : state) benchmark::DoNotOptimize(gradient_engine(model, data, batch, loss));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_SmpoLogQuadGradient)->Args({16, 10})->Args({64, 10})->Args({16, 30})->Unit(benchmark::kMillisecond);

static void BM_MpsCrossEntropyGradient(benchmark::State& state) {
  const std::size_t n = 30;
  const auto bond = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> dims{3};
  const auto sigs = build_shape(n, dims, LowerSpec{SpacingSpec::explicit_positions({15}), 2}, bond);
  const auto model = init_model(sigs, NetworkKind::mps, InitSpec{IdentityBiasInit{}, 6});
  const auto data = random_inputs(32, n, PolynomialMap{2, true, true}, 7);
  LossSpec loss;
  loss.primary = LossKind::cross_entropy_softmax;
  const auto batch = iota(32);
  for (auto _ : state) benchmark::DoNotOptimize(gradient_engine(model, data, batch, loss));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_MpsCrossEntropyGradient)->Arg(2)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_ModelOutput(benchmark::State& state) {
  const std::vector<std::size_t> dims{3};
  const auto sigs = build_shape(30, dims, LowerSpec{SpacingSpec::explicit_positions({15}), 2}, 20);
  const auto model = init_model(sigs, NetworkKind::mps, InitSpec{IdentityBiasInit{}, 8});
  const auto data = random_inputs(1, 30, PolynomialMap{2, true, true}, 9);
  for (auto _ : state) benchmark::DoNotOptimize(model_output(model, data.states[0]));
}
BENCHMARK(BM_ModelOutput);
