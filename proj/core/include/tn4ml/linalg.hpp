#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tn4ml/tensor.hpp"

namespace tn4ml {

struct SvdOptions {
  /// Keep at most this many singular values. Must be >= 1 when set.
  std::optional<std::size_t> max_rank;
  /// Discard singular values strictly below this (at least one is kept).
  double cutoff = 0.0;
  /// Label of the new leg joining u and v.
  std::string bond_label = "bond";
};

struct SvdResult {
  Tensor u;                      // row legs + bond, orthonormal columns
  std::vector<double> s;         // descending, >= 0
  Tensor v;                      // bond + column legs, orthonormal rows
  double truncation_error_sq = 0.0;
};

/// Truncated thin SVD of `t` matricized with `row_labels` as rows.
SvdResult svd(const Tensor& t, std::span<const std::string> row_labels,
              const SvdOptions& options = {});

struct QrResult {
  Tensor q;  // row legs + bond
  Tensor r;  // bond + column legs, upper triangular with diag(r) >= 0
};

/// Thin QR of `t` matricized with `row_labels` as rows; the new leg is
/// `bond_label` with dimension min(rows, cols).
QrResult qr(const Tensor& t, std::span<const std::string> row_labels,
            const std::string& bond_label = "bond");

}  // namespace tn4ml
