#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tn4ml {

/// A named tensor leg. Two legs contract iff their labels are equal; a label
/// match with unequal dims is a contraction error.
struct Index {
  std::string label;
  std::size_t dim = 1;

  friend bool operator==(const Index&, const Index&) = default;
};

/// Dense float64 array with named indices, stored row-major over the index
/// order. A rank-0 tensor holds exactly one value.
class Tensor {
 public:
  Tensor();
  Tensor(std::vector<Index> indices, std::vector<double> data);

  static Tensor zeros(std::vector<Index> indices);
  static Tensor scalar(double value);
  /// Rank-1 tensor over `label`.
  static Tensor vector(std::string label, std::vector<double> values);

  std::size_t rank() const { return indices_.size(); }
  std::size_t size() const { return data_.size(); }
  const std::vector<Index>& indices() const { return indices_; }
  std::vector<std::size_t> dims() const;
  std::vector<std::string> labels() const;

  std::optional<std::size_t> position(std::string_view label) const;
  bool has(std::string_view label) const { return position(label).has_value(); }
  const Index& index(std::string_view label) const;
  std::size_t dim(std::string_view label) const { return index(label).dim; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Entry at a multi-index given in index order.
  double at(std::initializer_list<std::size_t> coords) const;
  double at(std::span<const std::size_t> coords) const;
  /// Value of a rank-0 (or single-element) tensor.
  double value() const;

  /// Copy with indices reordered to `order` (a permutation of labels()).
  Tensor permuted(std::span<const std::string> order) const;
  Tensor permuted(std::initializer_list<std::string> order) const;
  Tensor relabeled(std::string_view from, std::string to) const;
  Tensor relabeled(const std::map<std::string, std::string>& mapping) const;
  /// Merge the given legs (made adjacent, in the given order) into one leg
  /// named `fused_label`, placed where the first of them sat.
  Tensor fused(std::span<const std::string> labels, std::string fused_label) const;

  Tensor& operator*=(double factor);
  /// Elementwise accumulate; `other` is aligned by label, not by position.
  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  friend Tensor operator*(double factor, Tensor t) { return t *= factor; }

  bool all_finite() const;

 private:
  std::size_t offset(std::span<const std::size_t> coords) const;
  void axpy(double alpha, const Tensor& other);

  std::vector<Index> indices_;
  std::vector<double> data_;
};

/// Pairwise contraction over every shared label. The result carries the free
/// legs of `a` (in order) followed by the free legs of `b`.
Tensor contract(const Tensor& a, const Tensor& b);

/// One binary step of a contraction path. Operands are SSA ids: inputs are
/// 0..n-1 and step k produces id n+k. Each id may be consumed once.
using ContractionStep = std::pair<std::size_t, std::size_t>;

/// Contract a network along a fixed path of n-1 steps.
Tensor contract_network(std::span<const Tensor> tensors,
                        std::span<const ContractionStep> path);

/// Reshape into an order-2 tensor with legs "row" and "col". Row legs follow
/// `row_labels`; column legs keep their original relative order.
Tensor matricize(const Tensor& t, std::span<const std::string> row_labels);

/// Inverse of matricize given the leg lists of both sides.
Tensor unmatricize(const Tensor& matrix, std::span<const Index> row_indices,
                   std::span<const Index> col_indices);

double frobenius_norm(const Tensor& t);

/// Sum of elementwise products of two tensors with identical index sets.
double dot(const Tensor& a, const Tensor& b);

/// Largest absolute elementwise difference, aligning `b` to `a` by label.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace tn4ml
