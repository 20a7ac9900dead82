#include "tn4ml/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "tn4ml/error.hpp"

namespace tn4ml {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::vector<std::size_t> dims_of(const std::vector<Index>& indices) {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (const auto& idx : indices) {
    out.push_back(idx.dim);
  }
  return out;
}

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> dims) {
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) {
    strides[k - 1] = strides[k] * dims[k];
  }
  return strides;
}

std::string describe(const std::vector<Index>& indices) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < indices.size(); ++k) {
    os << (k ? ", " : "") << indices[k].label << ":" << indices[k].dim;
  }
  os << ")";
  return os.str();
}

// out[i_0..i_{r-1}] = in[perm-mapped coords], where perm[k] is the source
// axis of output axis k.
std::vector<double> permute_data(std::span<const double> in,
                                 std::span<const std::size_t> in_dims,
                                 std::span<const std::size_t> perm) {
  const std::size_t rank = perm.size();
  bool identity = true;
  for (std::size_t k = 0; k < rank; ++k) {
    identity = identity && perm[k] == k;
  }
  if (identity || rank <= 1) {
    return {in.begin(), in.end()};
  }
  const auto in_strides = row_major_strides(in_dims);
  std::vector<std::size_t> out_dims(rank), stride(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    out_dims[k] = in_dims[perm[k]];
    stride[k] = in_strides[perm[k]];
  }
  std::vector<double> out(in.size());
  if (out.empty()) {
    return out;
  }
  // Innermost output axis handled as a contiguous run.
  const std::size_t inner = out_dims[rank - 1];
  const std::size_t inner_stride = stride[rank - 1];
  std::vector<std::size_t> counter(rank - 1, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < out.size(); dst += inner) {
    for (std::size_t t = 0; t < inner; ++t) {
      out[dst + t] = in[src + t * inner_stride];
    }
    for (std::size_t k = rank - 1; k-- > 0;) {
      if (++counter[k] < out_dims[k]) {
        src += stride[k];
        break;
      }
      src -= stride[k] * (out_dims[k] - 1);
      counter[k] = 0;
    }
  }
  return out;
}

}  // namespace

Tensor::Tensor() : data_(1, 0.0) {}

Tensor::Tensor(std::vector<Index> indices, std::vector<double> data)
    : indices_(std::move(indices)), data_(std::move(data)) {
  std::set<std::string_view> seen;
  for (const auto& idx : indices_) {
    if (idx.dim == 0) {
      throw ShapeError("index '" + idx.label + "' has dimension 0");
    }
    if (idx.label.empty()) {
      throw ShapeError("index label must be nonempty");
    }
    if (!seen.insert(idx.label).second) {
      throw ShapeError("duplicate index label '" + idx.label + "' in " + describe(indices_));
    }
  }
  const auto expected = product(dims_of(indices_));
  if (data_.size() != expected) {
    throw ShapeError("tensor " + describe(indices_) + " needs " + std::to_string(expected) +
                     " entries, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::zeros(std::vector<Index> indices) {
  const auto n = product(dims_of(indices));
  return Tensor(std::move(indices), std::vector<double>(n, 0.0));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::string label, std::vector<double> values) {
  const auto n = values.size();
  return Tensor({Index{std::move(label), n}}, std::move(values));
}

std::vector<std::size_t> Tensor::dims() const { return dims_of(indices_); }

std::vector<std::string> Tensor::labels() const {
  std::vector<std::string> out;
  out.reserve(indices_.size());
  for (const auto& idx : indices_) {
    out.push_back(idx.label);
  }
  return out;
}

std::optional<std::size_t> Tensor::position(std::string_view label) const {
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k].label == label) {
      return k;
    }
  }
  return std::nullopt;
}

const Index& Tensor::index(std::string_view label) const {
  const auto pos = position(label);
  if (!pos) {
    throw ShapeError("no index '" + std::string(label) + "' in " + describe(indices_));
  }
  return indices_[*pos];
}

std::size_t Tensor::offset(std::span<const std::size_t> coords) const {
  if (coords.size() != indices_.size()) {
    throw ShapeError("expected " + std::to_string(indices_.size()) + " coordinates, got " +
                     std::to_string(coords.size()));
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] >= indices_[k].dim) {
      throw RangeError("coordinate " + std::to_string(coords[k]) + " out of range for index '" +
                       indices_[k].label + "'");
    }
    off = off * indices_[k].dim + coords[k];
  }
  return off;
}

double Tensor::at(std::initializer_list<std::size_t> coords) const {
  return at(std::span<const std::size_t>(coords.begin(), coords.size()));
}

double Tensor::at(std::span<const std::size_t> coords) const { return data_[offset(coords)]; }

double Tensor::value() const {
  if (data_.size() != 1) {
    throw ShapeError("value() on tensor with " + std::to_string(data_.size()) + " entries");
  }
  return data_[0];
}

Tensor Tensor::permuted(std::span<const std::string> order) const {
  if (order.size() != indices_.size()) {
    throw ShapeError("permutation of " + describe(indices_) + " needs " +
                     std::to_string(indices_.size()) + " labels");
  }
  std::vector<std::size_t> perm;
  std::vector<Index> out;
  perm.reserve(order.size());
  out.reserve(order.size());
  for (const auto& label : order) {
    const auto pos = position(label);
    if (!pos) {
      throw ShapeError("no index '" + label + "' in " + describe(indices_));
    }
    perm.push_back(*pos);
    out.push_back(indices_[*pos]);
  }
  const auto in_dims = dims();
  return Tensor(std::move(out), permute_data(data_, in_dims, perm));
}

Tensor Tensor::permuted(std::initializer_list<std::string> order) const {
  return permuted(std::span<const std::string>(order.begin(), order.size()));
}

Tensor Tensor::relabeled(std::string_view from, std::string to) const {
  Tensor out = *this;
  const auto pos = position(from);
  if (!pos) {
    throw ShapeError("no index '" + std::string(from) + "' in " + describe(indices_));
  }
  out.indices_[*pos].label = std::move(to);
  return Tensor(std::move(out.indices_), std::move(out.data_));
}

Tensor Tensor::relabeled(const std::map<std::string, std::string>& mapping) const {
  auto indices = indices_;
  for (auto& idx : indices) {
    if (const auto it = mapping.find(idx.label); it != mapping.end()) {
      idx.label = it->second;
    }
  }
  return Tensor(std::move(indices), data_);
}

Tensor Tensor::fused(std::span<const std::string> labels, std::string fused_label) const {
  if (labels.empty()) {
    throw ShapeError("fused() needs at least one label");
  }
  std::size_t first = indices_.size();
  std::set<std::string_view> group;
  std::size_t fused_dim = 1;
  for (const auto& label : labels) {
    const auto pos = position(label);
    if (!pos) {
      throw ShapeError("no index '" + label + "' in " + describe(indices_));
    }
    first = std::min(first, *pos);
    group.insert(label);
    fused_dim *= indices_[*pos].dim;
  }
  std::vector<std::string> order;
  std::vector<Index> out;
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k == first) {
      order.insert(order.end(), labels.begin(), labels.end());
      out.push_back(Index{fused_label, fused_dim});
    }
    if (!group.contains(indices_[k].label)) {
      order.push_back(indices_[k].label);
      out.push_back(indices_[k]);
    }
  }
  auto p = permuted(order);
  return Tensor(std::move(out), std::move(p.data_));
}

Tensor& Tensor::operator*=(double factor) {
  for (auto& x : data_) {
    x *= factor;
  }
  return *this;
}

void Tensor::axpy(double alpha, const Tensor& other) {
  if (other.indices_ == indices_) {
    for (std::size_t k = 0; k < data_.size(); ++k) {
      data_[k] += alpha * other.data_[k];
    }
    return;
  }
  const auto aligned = other.permuted(labels());
  if (aligned.indices_ != indices_) {
    throw ShapeError("cannot add " + describe(other.indices_) + " to " + describe(indices_));
  }
  for (std::size_t k = 0; k < data_.size(); ++k) {
    data_[k] += alpha * aligned.data_[k];
  }
}

Tensor& Tensor::operator+=(const Tensor& other) {
  axpy(1.0, other);
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  axpy(-1.0, other);
  return *this;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Tensor contract(const Tensor& a, const Tensor& b) {
  std::vector<std::string> a_free, shared, b_free;
  std::vector<Index> out_indices;
  std::size_t m = 1, k = 1, n = 1;
  for (const auto& idx : a.indices()) {
    if (const auto pos = b.position(idx.label)) {
      const auto& other = b.indices()[*pos];
      if (other.dim != idx.dim) {
        throw ContractionError("dimension mismatch on shared index '" + idx.label + "': " +
                               std::to_string(idx.dim) + " vs " + std::to_string(other.dim));
      }
      shared.push_back(idx.label);
      k *= idx.dim;
    } else {
      a_free.push_back(idx.label);
      out_indices.push_back(idx);
      m *= idx.dim;
    }
  }
  for (const auto& idx : b.indices()) {
    if (!a.has(idx.label)) {
      b_free.push_back(idx.label);
      out_indices.push_back(idx);
      n *= idx.dim;
    }
  }

  std::vector<std::string> a_order = a_free;
  a_order.insert(a_order.end(), shared.begin(), shared.end());
  std::vector<std::string> b_order = shared;
  b_order.insert(b_order.end(), b_free.begin(), b_free.end());
  const Tensor ap = a.permuted(a_order);
  const Tensor bp = b.permuted(b_order);

  std::vector<double> out(m * n);
  Eigen::Map<const RowMatrix> am(ap.data().data(), static_cast<Eigen::Index>(m),
                                 static_cast<Eigen::Index>(k));
  Eigen::Map<const RowMatrix> bm(bp.data().data(), static_cast<Eigen::Index>(k),
                                 static_cast<Eigen::Index>(n));
  Eigen::Map<RowMatrix> cm(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  cm.noalias() = am * bm;
  return Tensor(std::move(out_indices), std::move(out));
}

Tensor contract_network(std::span<const Tensor> tensors, std::span<const ContractionStep> path) {
  if (tensors.empty()) {
    throw PathError("contract_network needs at least one tensor");
  }
  const std::size_t n = tensors.size();
  if (path.size() != n - 1) {
    throw PathError("a path over " + std::to_string(n) + " tensors needs " +
                    std::to_string(n - 1) + " steps, got " + std::to_string(path.size()));
  }
  if (n == 1) {
    return tensors[0];
  }
  std::vector<std::optional<Tensor>> pool(2 * n - 1);
  std::vector<bool> consumed(2 * n - 1, false);
  auto take = [&](std::size_t id, std::size_t step) -> Tensor {
    if (id >= n + step) {
      throw PathError("step " + std::to_string(step) + " references unknown operand " +
                      std::to_string(id));
    }
    if (consumed[id]) {
      throw PathError("step " + std::to_string(step) + " reuses operand " + std::to_string(id));
    }
    consumed[id] = true;
    if (id < n) {
      return tensors[id];
    }
    return std::move(*pool[id]);
  };
  for (std::size_t s = 0; s < path.size(); ++s) {
    const auto [i, j] = path[s];
    if (i == j) {
      throw PathError("step " + std::to_string(s) + " contracts operand " + std::to_string(i) +
                      " with itself");
    }
    Tensor lhs = take(i, s);
    Tensor rhs = take(j, s);
    pool[n + s] = contract(lhs, rhs);
  }
  return std::move(*pool[2 * n - 2]);
}

Tensor matricize(const Tensor& t, std::span<const std::string> row_labels) {
  if (row_labels.empty() || row_labels.size() >= t.rank()) {
    throw ShapeError("matricize needs a nonempty proper subset of the tensor's labels");
  }
  std::set<std::string_view> rows;
  std::vector<std::string> order;
  std::size_t r = 1, c = 1;
  for (const auto& label : row_labels) {
    r *= t.dim(label);
    if (!rows.insert(label).second) {
      throw ShapeError("row label '" + label + "' listed twice");
    }
    order.push_back(label);
  }
  for (const auto& idx : t.indices()) {
    if (!rows.contains(idx.label)) {
      order.push_back(idx.label);
      c *= idx.dim;
    }
  }
  auto p = t.permuted(order);
  std::vector<double> data(p.data().begin(), p.data().end());
  return Tensor({Index{"row", r}, Index{"col", c}}, std::move(data));
}

Tensor unmatricize(const Tensor& matrix, std::span<const Index> row_indices,
                   std::span<const Index> col_indices) {
  if (matrix.rank() != 2) {
    throw ShapeError("unmatricize expects an order-2 tensor");
  }
  std::vector<Index> indices(row_indices.begin(), row_indices.end());
  indices.insert(indices.end(), col_indices.begin(), col_indices.end());
  std::size_t r = 1, c = 1;
  for (const auto& idx : row_indices) r *= idx.dim;
  for (const auto& idx : col_indices) c *= idx.dim;
  if (matrix.indices()[0].dim != r || matrix.indices()[1].dim != c) {
    throw ShapeError("matrix shape does not match the requested row/column legs");
  }
  return Tensor(std::move(indices), {matrix.data().begin(), matrix.data().end()});
}

double frobenius_norm(const Tensor& t) {
  double scale = 0.0;
  for (double x : t.data()) {
    scale = std::max(scale, std::abs(x));
  }
  if (scale == 0.0) {
    return 0.0;
  }
  double sum = 0.0;
  for (double x : t.data()) {
    const double y = x / scale;
    sum += y * y;
  }
  return scale * std::sqrt(sum);
}

double dot(const Tensor& a, const Tensor& b) {
  const Tensor aligned = b.indices() == a.indices() ? b : b.permuted(a.labels());
  if (aligned.indices() != a.indices()) {
    throw ShapeError("dot() requires identical index sets");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sum += a.data()[k] * aligned.data()[k];
  }
  return sum;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  const Tensor aligned = b.indices() == a.indices() ? b : b.permuted(a.labels());
  if (aligned.indices() != a.indices()) {
    throw ShapeError("max_abs_diff() requires identical index sets");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::abs(a.data()[k] - aligned.data()[k]));
  }
  return m;
}

}  // namespace tn4ml
