#pragma once

// Per-sample chain contractions used by the objectives and the trainers.
// A model site is viewed as a dense block in layout (l, p, o, r), with
// absent legs of size 1; an input site as (sl, p, sr). Contracting the
// physical leg gives a reduced site R[o] of shape (l*sl) x (r*sr).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tn4ml/state.hpp"
#include "tn4ml/tensor_train.hpp"

namespace tn4ml::detail {

struct SiteView {
  const double* data = nullptr;
  std::size_t l = 1, p = 1, o = 1, r = 1;
};

struct InputBlock {
  std::vector<double> data;
  std::size_t sl = 1, p = 1, sr = 1;
};

/// Layout (o, L, R), o-slices contiguous and row-major.
struct Reduced {
  std::size_t o = 1, L = 1, R = 1;
  std::vector<double> data;

  std::size_t slice() const { return L * R; }
};

std::vector<SiteView> view_model(const TensorTrain& model);

/// Input blocks of `state`; when `merge_at` is set, sites k and k+1 are
/// combined into one block whose physical index is (p_k, p_{k+1}).
std::vector<InputBlock> input_blocks(const EmbeddedState& state,
                                     std::optional<std::size_t> merge_at = std::nullopt);

Reduced reduce(const SiteView& site, const InputBlock& input);

/// site_grad (l,p,o,r) += factor * d(reduced)/d(site)^T grad.
void backproject(const Reduced& grad, const InputBlock& input, double factor, const SiteView& site,
                 std::span<double> site_grad);

/// Site reinterpreted as reduced block with o' = p*o, L = l, R = r.
Reduced as_reduced(const SiteView& site);
/// Inverse layout change of as_reduced, accumulated with a factor.
void add_from_reduced(const Reduced& grad, double factor, const SiteView& site,
                      std::span<double> site_grad);

struct QuadraticResult {
  double log_q = 0.0;
  /// d log q / d R_k, same layout as the chain. Empty unless requested.
  std::vector<Reduced> dlogq;
};

/// q = sum over all open o legs of the squared chain contraction.
QuadraticResult quadratic(std::span<const Reduced> chain, bool want_gradients);

/// Chain where only `out_site` may have o > 1. Environments are kept with
/// separate log scales so long chains neither overflow nor underflow.
class LinearChain {
 public:
  LinearChain(std::span<const Reduced> chain, std::size_t out_site);

  std::vector<double> output() const;
  /// d(w . y)/d R_k for every site.
  std::vector<Reduced> backward(std::span<const double> w) const;

 private:
  std::span<const Reduced> chain_;
  std::size_t out_;
  std::vector<std::vector<double>> left_;   // left_[k]: sites 0..k-1, k <= out_
  std::vector<double> left_scale_;
  std::vector<std::vector<double>> right_;  // right_[k]: sites k..n-1, k > out_
  std::vector<double> right_scale_;
};

}  // namespace tn4ml::detail
