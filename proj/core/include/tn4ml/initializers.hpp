#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "tn4ml/rng.hpp"
#include "tn4ml/tensor.hpp"
#include "tn4ml/tensor_train.hpp"

namespace tn4ml {

struct NormalBase {
  double mu = 0.0;
  double sigma = 1.0;
};

struct UniformBase {
  double lo = -1.0;
  double hi = 1.0;
};

/// Random base tensor, matricized as (first leg) x (rest), then
/// orthonormalized along the shorter side by modified Gram-Schmidt.
struct GramSchmidtInit {
  std::variant<NormalBase, UniformBase> base = NormalBase{};
};

struct RandnInit {
  double mu = 0.0;
  double sigma = 1.0;
  std::optional<double> noise_sigma;
};

/// One Haar-random orthogonal (left x right) slice per physical index
/// combination. Rectangular slices are the leading columns (or rows) of a
/// square Haar draw, so they are isometries along the smaller side.
struct HaarInit {};

/// Gaussian noise plus 1 wherever the left and right bond coordinates agree.
/// A missing bond counts as coordinate 0.
struct IdentityBiasInit {
  double noise_sigma = 1e-2;
};

using InitScheme = std::variant<GramSchmidtInit, RandnInit, HaarInit, IdentityBiasInit>;

struct InitSpec {
  InitScheme scheme = GramSchmidtInit{};
  std::uint64_t seed = 0;
};

Tensor init_tensor(std::size_t site, const SiteSignature& signature, const InitSpec& spec,
                   CounterRng& rng);

/// Site k draws from CounterRng(derive_seed(spec.seed, k)), so the result is a
/// pure function of (signatures, kind, spec) and sites are independent.
TensorTrain init_model(std::span<const SiteSignature> signatures, NetworkKind kind,
                       const InitSpec& spec);

/// Row-orthonormalize an r x c row-major block in place when r <= c, or
/// column-orthonormalize it when r > c. Two passes of modified Gram-Schmidt.
void orthonormalize(std::span<double> block, std::size_t rows, std::size_t cols);

}  // namespace tn4ml
