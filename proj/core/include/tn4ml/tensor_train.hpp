#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tn4ml/tensor.hpp"

namespace tn4ml {

enum class NetworkKind { mps, mpo, smpo };

std::string_view to_string(NetworkKind kind);
NetworkKind network_kind_from_string(std::string_view name);

/// Leg layout of one chain site. A bond of 0 means "no neighbour".
struct SiteSignature {
  std::optional<std::size_t> upper_dim;
  std::optional<std::size_t> lower_dim;
  std::size_t left_bond = 0;
  std::size_t right_bond = 0;

  friend bool operator==(const SiteSignature&, const SiteSignature&) = default;
};

/// Placement of lower (output) legs along a chain: either every S-th site
/// starting at 0, or an explicit strictly increasing position list.
class SpacingSpec {
 public:
  static SpacingSpec uniform(std::size_t stride);
  static SpacingSpec explicit_positions(std::vector<std::size_t> positions);

  bool is_uniform() const { return stride_ != 0; }
  std::size_t stride() const { return stride_; }
  const std::vector<std::size_t>& positions() const { return positions_; }

  /// Concrete positions for a chain of `n_sites`; throws on out-of-range.
  std::vector<std::size_t> resolve(std::size_t n_sites) const;

 private:
  std::size_t stride_ = 0;
  std::vector<std::size_t> positions_;
};

struct LowerSpec {
  SpacingSpec spacing;
  std::size_t lower_dim = 2;
};

/// Site signatures for an open chain. Bond k (between sites k and k+1) is
/// min(max_bond, product of local dims on the nearer side), so no bond is
/// larger than what an exact representation needs.
std::vector<SiteSignature> build_shape(std::size_t n_sites, std::span<const std::size_t> upper_dims,
                                       const std::optional<LowerSpec>& lower, std::size_t max_bond);

/// Throws ShapeError when `signatures` do not form an open chain.
void validate_chain(std::span<const SiteSignature> signatures);

/// Canonical leg labels: p{k} upper, o{k} lower, b{k} the bond between k and k+1.
std::string upper_label(std::size_t site);
std::string lower_label(std::size_t site);
std::string bond_label(std::size_t bond);

/// Open 1D chain of site tensors. Each site stores its legs in the order
/// [left bond], upper, [lower], [right bond] under the canonical labels.
///
/// MPS sites carry no lower leg, except that one site may carry the output
/// leg of a classifier. MPO sites all carry both. SMPO sites carry lower legs
/// on a proper nonempty subset.
class TensorTrain {
 public:
  TensorTrain(NetworkKind kind, std::vector<Tensor> sites,
              std::optional<std::size_t> canonical_center = std::nullopt);

  NetworkKind kind() const { return kind_; }
  std::size_t size() const { return sites_.size(); }
  const Tensor& site(std::size_t k) const { return sites_.at(k); }
  const std::vector<Tensor>& sites() const { return sites_; }
  std::optional<std::size_t> canonical_center() const { return center_; }

  SiteSignature signature(std::size_t k) const;
  std::vector<SiteSignature> signatures() const;
  std::vector<std::size_t> bond_dims() const;
  std::size_t max_bond_dim() const;
  std::vector<std::size_t> lower_positions() const;
  std::size_t parameter_count() const;

  /// Replace one site (legs must keep their labels; dims of bonds may change
  /// only consistently with the neighbours). Clears the canonical center.
  void set_site(std::size_t k, Tensor t);
  /// Replace a pair of neighbouring sites at once (bond k may change size).
  void set_sites(std::size_t k, Tensor left, Tensor right);
  void set_canonical_center(std::optional<std::size_t> center) { center_ = center; }
  void scale_site(std::size_t k, double factor);
  /// In-place access to the entries of site k (shape fixed). Clears the
  /// canonical center.
  std::span<double> site_data(std::size_t k);

 private:
  void validate() const;

  NetworkKind kind_;
  std::vector<Tensor> sites_;
  std::optional<std::size_t> center_;
};

/// Canonical-order site tensor for a signature.
std::vector<Index> site_indices(std::size_t k, const SiteSignature& signature);

/// Full contraction over all bonds (test oracle). Throws ShapeError above
/// `max_entries` open entries.
Tensor to_dense(const TensorTrain& tt, std::size_t max_entries = std::size_t{1} << 20);

/// Contraction of two chains over every open leg, along the site-by-site
/// zipper. Both must expose identical open legs.
double inner_product(const TensorTrain& a, const TensorTrain& b);

/// log of the Frobenius norm, accumulated with per-step rescaling so long
/// chains do not overflow.
double log_norm(const TensorTrain& tt);
double norm(const TensorTrain& tt);

/// Apply an MPO/SMPO to an MPS on its upper legs. The result has one site per
/// lower leg of `op`; output-less sites merge into the nearest lower-leg site
/// to their left (the leading block merges right).
TensorTrain apply_smpo(const TensorTrain& op, const TensorTrain& state);

/// QR sweeps towards `center`; representation preserving, no truncation.
TensorTrain canonicalize(const TensorTrain& tt, std::size_t center);

/// Canonicalize (at the current center, else 0) and rescale the center so
/// the norm is 1.
TensorTrain normalize(const TensorTrain& tt);

}  // namespace tn4ml
