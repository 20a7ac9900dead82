#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "tn4ml/tensor_train.hpp"

namespace tn4ml {

/// One local vector per feature, no bonds between them.
struct ProductState {
  std::vector<std::vector<double>> locals;

  std::size_t size() const { return locals.size(); }
  /// Product of the local Euclidean norms.
  double norm() const;
};

/// Embedded input Phi(x): a product state or an entangled MPS.
class EmbeddedState {
 public:
  EmbeddedState(ProductState state) : repr_(std::move(state)) {}
  EmbeddedState(TensorTrain mps);

  bool is_product() const { return std::holds_alternative<ProductState>(repr_); }
  const ProductState& product() const { return std::get<ProductState>(repr_); }
  const TensorTrain& mps() const { return std::get<TensorTrain>(repr_); }

  std::size_t size() const;
  std::size_t local_dim(std::size_t site) const;
  double norm() const;

  /// Bond-1 MPS view of a product state; the MPS itself otherwise.
  TensorTrain as_mps() const;

 private:
  std::variant<ProductState, TensorTrain> repr_;
};

/// apply_smpo on an embedded input (product states are lifted to bond-1 MPS).
TensorTrain apply_smpo(const TensorTrain& op, const EmbeddedState& state);

}  // namespace tn4ml
