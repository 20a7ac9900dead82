#include "tn4ml/tensor_train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tn4ml/error.hpp"
#include "tn4ml/linalg.hpp"

namespace tn4ml {
namespace {

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

std::vector<std::string> canonical_order(const Tensor& t, std::size_t k, std::size_t n) {
  std::vector<std::string> order;
  if (k > 0) order.push_back(bond_label(k - 1));
  order.push_back(upper_label(k));
  if (t.has(lower_label(k))) order.push_back(lower_label(k));
  if (k + 1 < n) order.push_back(bond_label(k));
  return order;
}

Tensor to_canonical(const Tensor& t, std::size_t k, std::size_t n) {
  const auto order = canonical_order(t, k, n);
  std::set<std::string> allowed(order.begin(), order.end());
  for (const auto& idx : t.indices()) {
    if (!allowed.contains(idx.label)) {
      throw ShapeError("site " + std::to_string(k) + " of a " + std::to_string(n) +
                       "-site chain has unexpected leg '" + idx.label + "'");
    }
  }
  if (order.size() != t.rank()) {
    throw ShapeError("site " + std::to_string(k) + " is missing a required leg");
  }
  return t.labels() == order ? t : t.permuted(order);
}

std::string primed_bond(std::size_t k) { return "B" + std::to_string(k); }

// Relabel the bonds of site k of `b` so it can be zipped against `a`.
Tensor primed_site(const TensorTrain& tt, std::size_t k) {
  std::map<std::string, std::string> mapping;
  if (k > 0) mapping[bond_label(k - 1)] = primed_bond(k - 1);
  if (k + 1 < tt.size()) mapping[bond_label(k)] = primed_bond(k);
  return tt.site(k).relabeled(mapping);
}

void check_same_open_legs(const TensorTrain& a, const TensorTrain& b) {
  if (a.size() != b.size()) {
    throw ShapeError("chains have different lengths: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  for (std::size_t k = 0; k < a.size(); ++k) {
    const auto sa = a.signature(k);
    const auto sb = b.signature(k);
    if (sa.upper_dim != sb.upper_dim || sa.lower_dim != sb.lower_dim) {
      throw ShapeError("open legs differ at site " + std::to_string(k));
    }
  }
}

// Zipper over all open legs; when `rescale` is set, the running environment
// is normalised each step and the log of the scale accumulated.
std::pair<double, double> zipper(const TensorTrain& a, const TensorTrain& b, bool rescale) {
  check_same_open_legs(a, b);
  Tensor env = contract(a.site(0), primed_site(b, 0));
  double log_scale = 0.0;
  auto renormalise = [&] {
    if (!rescale) return;
    double m = 0.0;
    for (double x : env.data()) m = std::max(m, std::abs(x));
    if (m > 0.0 && std::isfinite(m)) {
      env *= 1.0 / m;
      log_scale += std::log(m);
    }
  };
  renormalise();
  for (std::size_t k = 1; k < a.size(); ++k) {
    env = contract(contract(env, a.site(k)), primed_site(b, k));
    renormalise();
  }
  return {env.value(), log_scale};
}

}  // namespace

std::string_view to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::mps: return "mps";
    case NetworkKind::mpo: return "mpo";
    case NetworkKind::smpo: return "smpo";
  }
  return "unknown";
}

NetworkKind network_kind_from_string(std::string_view name) {
  if (name == "mps") return NetworkKind::mps;
  if (name == "mpo") return NetworkKind::mpo;
  if (name == "smpo") return NetworkKind::smpo;
  throw ParseError("unknown network kind '" + std::string(name) + "'");
}

std::string upper_label(std::size_t site) { return "p" + std::to_string(site); }
std::string lower_label(std::size_t site) { return "o" + std::to_string(site); }
std::string bond_label(std::size_t bond) { return "b" + std::to_string(bond); }

SpacingSpec SpacingSpec::uniform(std::size_t stride) {
  if (stride == 0) {
    throw RangeError("spacing stride must be >= 1");
  }
  SpacingSpec s;
  s.stride_ = stride;
  return s;
}

SpacingSpec SpacingSpec::explicit_positions(std::vector<std::size_t> positions) {
  if (positions.empty()) {
    throw RangeError("explicit spacing needs at least one position");
  }
  for (std::size_t k = 1; k < positions.size(); ++k) {
    if (positions[k] <= positions[k - 1]) {
      throw RangeError("explicit spacing positions must be strictly increasing");
    }
  }
  SpacingSpec s;
  s.positions_ = std::move(positions);
  return s;
}

std::vector<std::size_t> SpacingSpec::resolve(std::size_t n_sites) const {
  if (is_uniform()) {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < n_sites; p += stride_) out.push_back(p);
    return out;
  }
  for (auto p : positions_) {
    if (p >= n_sites) {
      throw RangeError("lower-leg position " + std::to_string(p) + " outside a " +
                       std::to_string(n_sites) + "-site chain");
    }
  }
  return positions_;
}

std::vector<SiteSignature> build_shape(std::size_t n_sites, std::span<const std::size_t> upper_dims,
                                       const std::optional<LowerSpec>& lower, std::size_t max_bond) {
  if (n_sites < 2) {
    throw RangeError("build_shape needs at least 2 sites");
  }
  if (max_bond == 0) {
    throw RangeError("max_bond must be >= 1");
  }
  if (upper_dims.size() != 1 && upper_dims.size() != n_sites) {
    throw ShapeError("upper_dims must hold 1 or n_sites entries");
  }
  std::vector<SiteSignature> sigs(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) {
    sigs[k].upper_dim = upper_dims.size() == 1 ? upper_dims[0] : upper_dims[k];
    if (*sigs[k].upper_dim == 0) throw RangeError("upper dims must be >= 1");
  }
  if (lower) {
    if (lower->lower_dim == 0) throw RangeError("lower_dim must be >= 1");
    for (auto p : lower->spacing.resolve(n_sites)) sigs[p].lower_dim = lower->lower_dim;
  }
  std::vector<std::size_t> local(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) {
    local[k] = saturating_mul(*sigs[k].upper_dim, sigs[k].lower_dim.value_or(1));
  }
  for (std::size_t b = 0; b + 1 < n_sites; ++b) {
    std::size_t left = 1, right = 1;
    for (std::size_t k = 0; k <= b; ++k) left = saturating_mul(left, local[k]);
    for (std::size_t k = b + 1; k < n_sites; ++k) right = saturating_mul(right, local[k]);
    const auto dim = std::min({max_bond, left, right});
    sigs[b].right_bond = dim;
    sigs[b + 1].left_bond = dim;
  }
  validate_chain(sigs);
  return sigs;
}

void validate_chain(std::span<const SiteSignature> sigs) {
  if (sigs.empty()) throw ShapeError("empty chain");
  for (std::size_t k = 0; k < sigs.size(); ++k) {
    const auto& s = sigs[k];
    if (!s.upper_dim && !s.lower_dim) {
      throw ShapeError("site " + std::to_string(k) + " has neither upper nor lower leg");
    }
    if ((k == 0) != (s.left_bond == 0)) {
      throw ShapeError("site " + std::to_string(k) + ": only the first site lacks a left bond");
    }
    if ((k + 1 == sigs.size()) != (s.right_bond == 0)) {
      throw ShapeError("site " + std::to_string(k) + ": only the last site lacks a right bond");
    }
    if (k + 1 < sigs.size() && s.right_bond != sigs[k + 1].left_bond) {
      throw ShapeError("bond " + std::to_string(k) + " dims disagree between neighbours");
    }
  }
}

std::vector<Index> site_indices(std::size_t k, const SiteSignature& s) {
  std::vector<Index> out;
  if (s.left_bond) out.push_back({bond_label(k - 1), s.left_bond});
  if (s.upper_dim) out.push_back({upper_label(k), *s.upper_dim});
  if (s.lower_dim) out.push_back({lower_label(k), *s.lower_dim});
  if (s.right_bond) out.push_back({bond_label(k), s.right_bond});
  return out;
}

TensorTrain::TensorTrain(NetworkKind kind, std::vector<Tensor> sites,
                         std::optional<std::size_t> canonical_center)
    : kind_(kind), sites_(std::move(sites)), center_(canonical_center) {
  if (sites_.empty()) {
    throw ShapeError("a tensor train needs at least one site");
  }
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    sites_[k] = to_canonical(sites_[k], k, sites_.size());
  }
  validate();
}

void TensorTrain::validate() const {
  const auto sigs = signatures();
  validate_chain(sigs);
  std::size_t n_lower = 0;
  for (const auto& s : sigs) {
    if (!s.upper_dim) throw ShapeError("every site needs an upper leg");
    n_lower += s.lower_dim ? 1 : 0;
  }
  switch (kind_) {
    case NetworkKind::mps:
      if (n_lower > 1) throw ShapeError("an MPS carries at most one output leg");
      break;
    case NetworkKind::mpo:
      if (n_lower != sigs.size()) throw ShapeError("every MPO site needs a lower leg");
      break;
    case NetworkKind::smpo:
      if (n_lower == 0 || n_lower == sigs.size()) {
        throw ShapeError("an SMPO needs lower legs on a proper nonempty subset of sites");
      }
      break;
  }
  if (center_ && *center_ >= sites_.size()) {
    throw RangeError("canonical center out of range");
  }
}

SiteSignature TensorTrain::signature(std::size_t k) const {
  const Tensor& t = sites_.at(k);
  SiteSignature s;
  if (auto p = t.position(upper_label(k))) s.upper_dim = t.indices()[*p].dim;
  if (auto p = t.position(lower_label(k))) s.lower_dim = t.indices()[*p].dim;
  if (k > 0) s.left_bond = t.dim(bond_label(k - 1));
  if (k + 1 < sites_.size()) s.right_bond = t.dim(bond_label(k));
  return s;
}

std::vector<SiteSignature> TensorTrain::signatures() const {
  std::vector<SiteSignature> out;
  out.reserve(sites_.size());
  for (std::size_t k = 0; k < sites_.size(); ++k) out.push_back(signature(k));
  return out;
}

std::vector<std::size_t> TensorTrain::bond_dims() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k + 1 < sites_.size(); ++k) out.push_back(sites_[k].dim(bond_label(k)));
  return out;
}

std::size_t TensorTrain::max_bond_dim() const {
  const auto b = bond_dims();
  return b.empty() ? 0 : *std::max_element(b.begin(), b.end());
}

std::vector<std::size_t> TensorTrain::lower_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    if (sites_[k].has(lower_label(k))) out.push_back(k);
  }
  return out;
}

std::size_t TensorTrain::parameter_count() const {
  std::size_t n = 0;
  for (const auto& s : sites_) n += s.size();
  return n;
}

void TensorTrain::set_site(std::size_t k, Tensor t) {
  Tensor c = to_canonical(t, k, sites_.size());
  if (c.labels() != sites_.at(k).labels()) {
    throw ShapeError("replacement for site " + std::to_string(k) + " changes its legs");
  }
  std::swap(sites_[k], c);
  center_.reset();
  try {
    validate();
  } catch (...) {
    std::swap(sites_[k], c);
    throw;
  }
}

void TensorTrain::set_sites(std::size_t k, Tensor left, Tensor right) {
  Tensor l = to_canonical(left, k, sites_.size());
  Tensor r = to_canonical(right, k + 1, sites_.size());
  if (l.labels() != sites_.at(k).labels() || r.labels() != sites_.at(k + 1).labels()) {
    throw ShapeError("replacement for sites " + std::to_string(k) + "," + std::to_string(k + 1) +
                     " changes their legs");
  }
  std::swap(sites_[k], l);
  std::swap(sites_[k + 1], r);
  center_.reset();
  try {
    validate();
  } catch (...) {
    std::swap(sites_[k], l);
    std::swap(sites_[k + 1], r);
    throw;
  }
}

void TensorTrain::scale_site(std::size_t k, double factor) { sites_.at(k) *= factor; }

std::span<double> TensorTrain::site_data(std::size_t k) {
  center_.reset();
  return sites_.at(k).data();
}

Tensor to_dense(const TensorTrain& tt, std::size_t max_entries) {
  std::size_t entries = 1;
  for (const auto& s : tt.signatures()) {
    entries = saturating_mul(entries, s.upper_dim.value_or(1));
    entries = saturating_mul(entries, s.lower_dim.value_or(1));
  }
  if (entries > max_entries) {
    throw ShapeError("to_dense would create " + std::to_string(entries) +
                     " entries (cap " + std::to_string(max_entries) + ")");
  }
  Tensor out = tt.site(0);
  for (std::size_t k = 1; k < tt.size(); ++k) out = contract(out, tt.site(k));
  return out;
}

double inner_product(const TensorTrain& a, const TensorTrain& b) {
  return zipper(a, b, false).first;
}

double log_norm(const TensorTrain& tt) {
  const auto [value, log_scale] = zipper(tt, tt, true);
  if (!(value > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  return 0.5 * (std::log(value) + log_scale);
}

double norm(const TensorTrain& tt) {
  const double l = log_norm(tt);
  return std::isinf(l) ? 0.0 : std::exp(l);
}

TensorTrain apply_smpo(const TensorTrain& op, const TensorTrain& state) {
  if (op.kind() == NetworkKind::mps) {
    throw ShapeError("apply_smpo needs an MPO or SMPO operator");
  }
  if (state.kind() != NetworkKind::mps || !state.lower_positions().empty()) {
    throw ShapeError("apply_smpo needs a plain MPS state");
  }
  if (op.size() != state.size()) {
    throw ShapeError("operator has " + std::to_string(op.size()) + " sites, state has " +
                     std::to_string(state.size()));
  }
  const std::size_t n = op.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (op.signature(k).upper_dim != state.signature(k).upper_dim) {
      throw ShapeError("operator and state physical dims differ at site " + std::to_string(k));
    }
  }
  auto state_bond = [](std::size_t k) { return "s" + std::to_string(k); };

  std::vector<Tensor> absorbed;
  absorbed.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::map<std::string, std::string> mapping;
    if (k > 0) mapping[bond_label(k - 1)] = state_bond(k - 1);
    if (k + 1 < n) mapping[bond_label(k)] = state_bond(k);
    absorbed.push_back(contract(op.site(k), state.site(k).relabeled(mapping)));
  }

  const auto lowers = op.lower_positions();
  std::vector<Tensor> out_sites;
  for (std::size_t g = 0; g < lowers.size(); ++g) {
    const std::size_t begin = g == 0 ? 0 : lowers[g];
    const std::size_t end = g + 1 < lowers.size() ? lowers[g + 1] : n;  // exclusive
    Tensor block = absorbed[begin];
    for (std::size_t k = begin + 1; k < end; ++k) block = contract(block, absorbed[k]);

    std::map<std::string, std::string> mapping{{lower_label(lowers[g]), upper_label(g)}};
    if (begin > 0) {
      const std::vector<std::string> left{bond_label(begin - 1), state_bond(begin - 1)};
      block = block.fused(left, "_left");
      mapping["_left"] = bond_label(g - 1);
    }
    if (end < n) {
      const std::vector<std::string> right{bond_label(end - 1), state_bond(end - 1)};
      block = block.fused(right, "_right");
      mapping["_right"] = bond_label(g);
    }
    out_sites.push_back(block.relabeled(mapping));
  }
  return TensorTrain(NetworkKind::mps, std::move(out_sites));
}

TensorTrain canonicalize(const TensorTrain& tt, std::size_t center) {
  const std::size_t n = tt.size();
  if (center >= n) {
    throw RangeError("canonical center " + std::to_string(center) + " outside a " +
                     std::to_string(n) + "-site chain");
  }
  std::vector<Tensor> sites = tt.sites();
  const std::string tmp = "_qr";
  for (std::size_t k = 0; k < center; ++k) {
    std::vector<std::string> rows;
    for (const auto& l : sites[k].labels()) {
      if (l != bond_label(k)) rows.push_back(l);
    }
    auto [q, r] = qr(sites[k], rows, tmp);
    sites[k] = q.relabeled(tmp, bond_label(k));
    sites[k + 1] = contract(r, sites[k + 1]).relabeled(tmp, bond_label(k));
  }
  for (std::size_t k = n - 1; k > center; --k) {
    std::vector<std::string> rows;
    for (const auto& l : sites[k].labels()) {
      if (l != bond_label(k - 1)) rows.push_back(l);
    }
    auto [q, r] = qr(sites[k], rows, tmp);
    sites[k] = q.relabeled(tmp, bond_label(k - 1));
    sites[k - 1] = contract(sites[k - 1], r).relabeled(tmp, bond_label(k - 1));
  }
  return TensorTrain(tt.kind(), std::move(sites), center);
}

TensorTrain normalize(const TensorTrain& tt) {
  const std::size_t center = tt.canonical_center().value_or(0);
  TensorTrain out = canonicalize(tt, center);
  const double n = frobenius_norm(out.site(center));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NumericalError("cannot normalize a tensor train with norm " + std::to_string(n));
  }
  out.scale_site(center, 1.0 / n);
  out.set_canonical_center(center);
  return out;
}

}  // namespace tn4ml
