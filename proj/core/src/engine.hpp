#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chain_kernels.hpp"
#include "tn4ml/objectives.hpp"

namespace tn4ml::detail {

/// A chain of model blocks in (l, p, o, r) layout. When `merge_at` is set
/// block k spans model sites k and k+1 and the inputs are merged to match.
struct ChainModel {
  std::vector<SiteView> sites;
  std::optional<std::size_t> merge_at;
};

struct EngineResult {
  double value = 0.0;
  double regularizer_value = 0.0;
  std::vector<double> per_sample;
  std::vector<std::vector<double>> gradients;  // one per block, block layout
};

EngineResult evaluate(const ChainModel& chain, const EmbeddedDataset& data,
                      std::span<const std::size_t> batch, const LossSpec& loss,
                      const EngineOptions& options);

/// Deterministic chunking of [0, n): chunk size depends on n only, so the
/// reduction order is fixed for any thread count.
std::size_t chunk_size(std::size_t n);
std::size_t chunk_count(std::size_t n);
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& fn);

}  // namespace tn4ml::detail
