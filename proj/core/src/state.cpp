#include "tn4ml/state.hpp"

#include <cmath>

#include "tn4ml/error.hpp"

namespace tn4ml {

double ProductState::norm() const {
  double n = 1.0;
  for (const auto& v : locals) {
    double s = 0.0;
    for (double x : v) s += x * x;
    n *= std::sqrt(s);
  }
  return n;
}

EmbeddedState::EmbeddedState(TensorTrain mps) : repr_(std::move(mps)) {
  const auto& tt = std::get<TensorTrain>(repr_);
  if (tt.kind() != NetworkKind::mps || !tt.lower_positions().empty()) {
    throw ShapeError("an entangled embedding must be a plain MPS");
  }
}

std::size_t EmbeddedState::size() const {
  return is_product() ? product().size() : mps().size();
}

std::size_t EmbeddedState::local_dim(std::size_t site) const {
  return is_product() ? product().locals.at(site).size() : *mps().signature(site).upper_dim;
}

double EmbeddedState::norm() const { return is_product() ? product().norm() : tn4ml::norm(mps()); }

TensorTrain EmbeddedState::as_mps() const {
  if (!is_product()) {
    return mps();
  }
  const auto& locals = product().locals;
  const std::size_t n = locals.size();
  if (n == 0) {
    throw ShapeError("empty product state");
  }
  std::vector<Tensor> sites;
  sites.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    SiteSignature sig;
    sig.upper_dim = locals[k].size();
    sig.left_bond = k > 0 ? 1 : 0;
    sig.right_bond = k + 1 < n ? 1 : 0;
    sites.emplace_back(site_indices(k, sig), locals[k]);
  }
  return TensorTrain(NetworkKind::mps, std::move(sites));
}

TensorTrain apply_smpo(const TensorTrain& op, const EmbeddedState& state) {
  return apply_smpo(op, state.as_mps());
}

}  // namespace tn4ml
