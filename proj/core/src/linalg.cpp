#include "tn4ml/linalg.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tn4ml/error.hpp"

namespace tn4ml {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Split {
  std::vector<Index> rows;
  std::vector<Index> cols;
  RowMatrix matrix;
};

Split split(const Tensor& t, std::span<const std::string> row_labels, const char* op) {
  if (!t.all_finite()) {
    throw NumericalError(std::string(op) + ": input contains non-finite entries");
  }
  Split out;
  std::set<std::string_view> rows(row_labels.begin(), row_labels.end());
  for (const auto& label : row_labels) {
    out.rows.push_back(t.index(label));
  }
  for (const auto& idx : t.indices()) {
    if (!rows.contains(idx.label)) {
      out.cols.push_back(idx);
    }
  }
  const Tensor m = matricize(t, row_labels);
  const auto r = static_cast<Eigen::Index>(m.indices()[0].dim);
  const auto c = static_cast<Eigen::Index>(m.indices()[1].dim);
  out.matrix = Eigen::Map<const RowMatrix>(m.data().data(), r, c);
  return out;
}

std::vector<double> to_vector(const RowMatrix& m) {
  return {m.data(), m.data() + m.size()};
}

}  // namespace

SvdResult svd(const Tensor& t, std::span<const std::string> row_labels, const SvdOptions& options) {
  if (options.max_rank && *options.max_rank == 0) {
    throw RangeError("svd: max_rank must be >= 1");
  }
  auto parts = split(t, row_labels, "svd");
  Eigen::BDCSVD<RowMatrix> solver(parts.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = solver.singularValues();
  const auto full = static_cast<std::size_t>(sv.size());

  std::size_t keep = full;
  if (options.max_rank) {
    keep = std::min(keep, *options.max_rank);
  }
  while (keep > 1 && sv(static_cast<Eigen::Index>(keep - 1)) < options.cutoff) {
    --keep;
  }
  keep = std::max<std::size_t>(keep, 1);

  SvdResult out;
  for (std::size_t k = 0; k < full; ++k) {
    const double s = std::max(0.0, sv(static_cast<Eigen::Index>(k)));
    if (k < keep) {
      out.s.push_back(s);
    } else {
      out.truncation_error_sq += s * s;
    }
  }
  const auto kk = static_cast<Eigen::Index>(keep);
  RowMatrix u = solver.matrixU().leftCols(kk);
  RowMatrix v = solver.matrixV().leftCols(kk).transpose();

  auto u_idx = parts.rows;
  u_idx.push_back(Index{options.bond_label, keep});
  std::vector<Index> v_idx{Index{options.bond_label, keep}};
  v_idx.insert(v_idx.end(), parts.cols.begin(), parts.cols.end());
  out.u = Tensor(std::move(u_idx), to_vector(u));
  out.v = Tensor(std::move(v_idx), to_vector(v));
  return out;
}

QrResult qr(const Tensor& t, std::span<const std::string> row_labels, const std::string& bond_label) {
  auto parts = split(t, row_labels, "qr");
  const auto m = parts.matrix.rows();
  const auto n = parts.matrix.cols();
  const auto k = std::min(m, n);
  Eigen::HouseholderQR<RowMatrix> solver(parts.matrix);
  RowMatrix q = solver.householderQ() * RowMatrix::Identity(m, k);
  RowMatrix r = solver.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) {
      r.row(j) *= -1.0;
      q.col(j) *= -1.0;
    }
  }
  auto q_idx = parts.rows;
  q_idx.push_back(Index{bond_label, static_cast<std::size_t>(k)});
  std::vector<Index> r_idx{Index{bond_label, static_cast<std::size_t>(k)}};
  r_idx.insert(r_idx.end(), parts.cols.begin(), parts.cols.end());
  return QrResult{Tensor(std::move(q_idx), to_vector(q)), Tensor(std::move(r_idx), to_vector(r))};
}

}  // namespace tn4ml
