#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tn4ml/state.hpp"
#include "tn4ml/tensor.hpp"

namespace tn4ml {

/// 2k-dimensional trigonometric map; needs 0 <= x <= 1.
struct TrigonometricMap {
  std::size_t k = 1;
};

/// p-dimensional Fourier map; needs 0 <= x <= 1.
struct FourierMap {
  std::size_t p = 2;
  bool normalize = false;
};

/// One Gaussian bump per center: exp(-gamma (x - c)^2).
struct GaussianRbfMap {
  std::vector<double> centers;
  double gamma = 1.0;
  bool normalize = false;
};

/// (1, x, ..., x^d) with bias, (x, ..., x^d) without.
struct PolynomialMap {
  std::size_t degree = 2;
  bool include_bias = true;
  bool normalize = false;
};

using LocalMapSpec = std::variant<TrigonometricMap, FourierMap, GaussianRbfMap, PolynomialMap>;

std::size_t output_dim(const LocalMapSpec& spec);

std::vector<double> embed_trigonometric(double x, std::size_t k);
std::vector<double> embed_fourier(double x, std::size_t p, bool normalize = false);
std::vector<double> embed_rbf(double x, std::span<const double> centers, double gamma,
                              bool normalize = false);
std::vector<double> embed_polynomial(double x, std::size_t degree, bool include_bias,
                                     bool normalize = false);
std::vector<double> embed_local(double x, const LocalMapSpec& spec);

/// Phi(x) = tensor product of maps[i](x[i]). `maps` holds one entry per
/// feature, or a single entry broadcast to all features.
EmbeddedState embed_product_state(std::span<const double> x, std::span<const LocalMapSpec> maps);

enum class FlattenOrder {
  row_major,  // row after row, each left to right
  snake,      // odd rows reversed (boustrophedon)
};

std::vector<double> flatten_zigzag(std::span<const double> image, std::size_t height,
                                   std::size_t width, FlattenOrder order = FlattenOrder::row_major);
std::vector<double> unflatten_zigzag(std::span<const double> flat, std::size_t height,
                                     std::size_t width, FlattenOrder order = FlattenOrder::row_major);

struct MpsDecomposition {
  TensorTrain mps;
  double truncation_error_sq = 0.0;
};

/// Left-to-right sequential SVD of a dense state. Legs are taken in the order
/// of `state.indices()` and become sites 0..m-1.
MpsDecomposition decompose_state_to_mps(const Tensor& state,
                                        std::optional<std::size_t> max_bond = std::nullopt);

/// Dense FRQI amplitudes, length 2n: entry 2x + c is
/// (1/sqrt n) * (c == 0 ? cos(pi p_x / 2) : sin(pi p_x / 2)).
/// Position bits are big-endian, so site 0 holds the most significant bit and
/// the last site is the colour qubit.
Tensor frqi_state(std::span<const double> pixels);

/// FRQI state decomposed into an (m+1)-site MPS with local dimension 2.
EmbeddedState embed_frqi(std::span<const double> pixels,
                         std::optional<std::size_t> max_bond = std::nullopt);

}  // namespace tn4ml
