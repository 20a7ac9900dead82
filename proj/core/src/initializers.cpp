#include "tn4ml/initializers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "tn4ml/error.hpp"

namespace tn4ml {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_positive(double sigma, const char* what) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw RangeError(std::string(what) + " must be positive, got " + std::to_string(sigma));
  }
}

// Orthonormal rows, strided view: vector i lives at data[i * stride_i + j * stride_j].
void mgs(std::span<double> data, std::size_t count, std::size_t length, std::size_t stride_i,
         std::size_t stride_j) {
  auto at = [&](std::size_t i, std::size_t j) -> double& { return data[i * stride_i + j * stride_j]; };
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t q = 0; q < i; ++q) {
        double d = 0.0;
        for (std::size_t j = 0; j < length; ++j) d += at(i, j) * at(q, j);
        for (std::size_t j = 0; j < length; ++j) at(i, j) -= d * at(q, j);
      }
      double s = 0.0;
      for (std::size_t j = 0; j < length; ++j) s += at(i, j) * at(i, j);
      if (!(s > 1e-24)) {
        throw NumericalError("Gram-Schmidt met a linearly dependent vector");
      }
      const double inv = 1.0 / std::sqrt(s);
      for (std::size_t j = 0; j < length; ++j) at(i, j) *= inv;
    }
  }
}

RowMatrix haar_orthogonal(std::size_t n, CounterRng& rng) {
  RowMatrix g(n, n);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<RowMatrix> qr(g);
  RowMatrix q = qr.householderQ();
  const RowMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

void fill_haar(Tensor& t, const SiteSignature& sig, CounterRng& rng) {
  const std::size_t l = std::max<std::size_t>(sig.left_bond, 1);
  const std::size_t r = std::max<std::size_t>(sig.right_bond, 1);
  const std::size_t phys = sig.upper_dim.value_or(1) * sig.lower_dim.value_or(1);
  auto data = t.data();
  for (std::size_t s = 0; s < phys; ++s) {
    const RowMatrix q = haar_orthogonal(std::max(l, r), rng);
    for (std::size_t a = 0; a < l; ++a) {
      for (std::size_t b = 0; b < r; ++b) {
        const double v = l >= r ? q(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))
                                : q(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
        // Layout is (l, phys, r).
        data[(a * phys + s) * r + b] = v;
      }
    }
  }
}

}  // namespace

void orthonormalize(std::span<double> block, std::size_t rows, std::size_t cols) {
  if (block.size() != rows * cols) throw ShapeError("orthonormalize: block size mismatch");
  if (rows <= cols) {
    mgs(block, rows, cols, cols, 1);
  } else {
    mgs(block, cols, rows, 1, cols);
  }
}

Tensor init_tensor(std::size_t site, const SiteSignature& sig, const InitSpec& spec, CounterRng& rng) {
  Tensor t = Tensor::zeros(site_indices(site, sig));
  auto data = t.data();
  std::visit(
      [&](const auto& scheme) {
        using T = std::decay_t<decltype(scheme)>;
        if constexpr (std::is_same_v<T, GramSchmidtInit>) {
          std::visit(
              [&](const auto& base) {
                using B = std::decay_t<decltype(base)>;
                if constexpr (std::is_same_v<B, NormalBase>) {
                  require_positive(base.sigma, "sigma");
                  for (double& x : data) x = rng.normal(base.mu, base.sigma);
                } else {
                  if (!(base.hi > base.lo)) throw RangeError("uniform base needs lo < hi");
                  for (double& x : data) x = rng.uniform(base.lo, base.hi);
                }
              },
              scheme.base);
          const std::size_t rows = t.indices().front().dim;
          orthonormalize(data, rows, t.size() / rows);
        } else if constexpr (std::is_same_v<T, RandnInit>) {
          require_positive(scheme.sigma, "sigma");
          for (double& x : data) x = rng.normal(scheme.mu, scheme.sigma);
          if (scheme.noise_sigma) {
            require_positive(*scheme.noise_sigma, "noise_sigma");
            for (double& x : data) x += rng.normal(0.0, *scheme.noise_sigma);
          }
        } else if constexpr (std::is_same_v<T, HaarInit>) {
          fill_haar(t, sig, rng);
        } else {
          if (!(scheme.noise_sigma >= 0.0)) throw RangeError("noise_sigma must be >= 0");
          if (scheme.noise_sigma > 0.0) {
            for (double& x : data) x = rng.normal(0.0, scheme.noise_sigma);
          }
          const std::size_t l = std::max<std::size_t>(sig.left_bond, 1);
          const std::size_t r = std::max<std::size_t>(sig.right_bond, 1);
          const std::size_t phys = t.size() / (l * r);
          for (std::size_t a = 0; a < std::min(l, r); ++a) {
            for (std::size_t s = 0; s < phys; ++s) data[(a * phys + s) * r + a] += 1.0;
          }
        }
      },
      spec.scheme);
  return t;
}

TensorTrain init_model(std::span<const SiteSignature> signatures, NetworkKind kind, const InitSpec& spec) {
  validate_chain(signatures);
  std::vector<Tensor> sites;
  sites.reserve(signatures.size());
  for (std::size_t k = 0; k < signatures.size(); ++k) {
    CounterRng rng(derive_seed(spec.seed, k));
    try {
      sites.push_back(init_tensor(k, signatures[k], spec, rng));
    } catch (const NumericalError& e) {
      throw NumericalError("site " + std::to_string(k) + ": " + e.what());
    } catch (const RangeError& e) {
      throw RangeError("site " + std::to_string(k) + ": " + e.what());
    }
  }
  return TensorTrain(kind, std::move(sites));
}

}  // namespace tn4ml
