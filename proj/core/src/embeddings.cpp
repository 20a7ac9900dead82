#include "tn4ml/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>

#include "tn4ml/error.hpp"
#include "tn4ml/linalg.hpp"

namespace tn4ml {
namespace {

void require_unit_interval(double x, const char* map) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw RangeError(std::string(map) + " embedding needs 0 <= x <= 1, got " + std::to_string(x));
  }
}

void require_finite(double x, const char* map) {
  if (!std::isfinite(x)) {
    throw RangeError(std::string(map) + " embedding got a non-finite input");
  }
}

void normalize_in_place(std::vector<double>& v, const char* map) {
  double s = 0.0;
  for (double x : v) s += x * x;
  if (!(s > 0.0)) {
    throw NumericalError(std::string(map) + " embedding produced a zero vector; cannot normalize");
  }
  const double inv = 1.0 / std::sqrt(s);
  for (double& x : v) x *= inv;
}

}  // namespace

std::size_t output_dim(const LocalMapSpec& spec) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TrigonometricMap>) return 2 * m.k;
        if constexpr (std::is_same_v<T, FourierMap>) return m.p;
        if constexpr (std::is_same_v<T, GaussianRbfMap>) return m.centers.size();
        if constexpr (std::is_same_v<T, PolynomialMap>) return m.degree + (m.include_bias ? 1 : 0);
      },
      spec);
}

std::vector<double> embed_trigonometric(double x, std::size_t k) {
  if (k == 0) throw RangeError("trigonometric embedding needs k >= 1");
  require_unit_interval(x, "trigonometric");
  std::vector<double> out;
  out.reserve(2 * k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  double denom = 2.0;
  for (std::size_t m = 1; m <= k; ++m, denom *= 2.0) {
    const double angle = std::numbers::pi * x / denom;
    out.push_back(scale * std::cos(angle));
    out.push_back(scale * std::sin(angle));
  }
  return out;
}

std::vector<double> embed_fourier(double x, std::size_t p, bool normalize) {
  if (p < 2) throw RangeError("fourier embedding needs p >= 2");
  require_unit_interval(x, "fourier");
  const double pd = static_cast<double>(p);
  std::vector<double> out(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double phase = 2.0 * std::numbers::pi * ((pd - 1.0) * x / pd - static_cast<double>(j) / pd);
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t k = 0; k < p; ++k) {
      sum += std::polar(1.0, phase * static_cast<double>(k));
    }
    out[j] = std::abs(sum) / pd;
  }
  if (normalize) normalize_in_place(out, "fourier");
  return out;
}

std::vector<double> embed_rbf(double x, std::span<const double> centers, double gamma, bool normalize) {
  if (centers.size() < 2) throw RangeError("rbf embedding needs at least two centers");
  if (!(gamma > 0.0)) throw RangeError("rbf embedding needs gamma > 0");
  require_finite(x, "rbf");
  std::vector<double> out;
  out.reserve(centers.size());
  for (double c : centers) {
    const double r = x - c;
    out.push_back(std::exp(-gamma * r * r));
  }
  if (normalize) normalize_in_place(out, "rbf");
  return out;
}

std::vector<double> embed_polynomial(double x, std::size_t degree, bool include_bias, bool normalize) {
  if (degree == 0) throw RangeError("polynomial embedding needs degree >= 1");
  require_finite(x, "polynomial");
  std::vector<double> out;
  out.reserve(degree + 1);
  if (include_bias) out.push_back(1.0);
  double power = 1.0;
  for (std::size_t d = 1; d <= degree; ++d) {
    power *= x;
    out.push_back(power);
  }
  if (normalize) normalize_in_place(out, "polynomial");
  return out;
}

std::vector<double> embed_local(double x, const LocalMapSpec& spec) {
  return std::visit(
      [x](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TrigonometricMap>) return embed_trigonometric(x, m.k);
        if constexpr (std::is_same_v<T, FourierMap>) return embed_fourier(x, m.p, m.normalize);
        if constexpr (std::is_same_v<T, GaussianRbfMap>)
          return embed_rbf(x, m.centers, m.gamma, m.normalize);
        if constexpr (std::is_same_v<T, PolynomialMap>)
          return embed_polynomial(x, m.degree, m.include_bias, m.normalize);
      },
      spec);
}

EmbeddedState embed_product_state(std::span<const double> x, std::span<const LocalMapSpec> maps) {
  if (maps.size() != 1 && maps.size() != x.size()) {
    throw ShapeError("embed_product_state: " + std::to_string(maps.size()) + " maps for " +
                     std::to_string(x.size()) + " features");
  }
  ProductState state;
  state.locals.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    try {
      state.locals.push_back(embed_local(x[i], maps.size() == 1 ? maps[0] : maps[i]));
    } catch (const RangeError& e) {
      throw RangeError("feature " + std::to_string(i) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("feature " + std::to_string(i) + ": " + e.what());
    }
  }
  return EmbeddedState(std::move(state));
}

std::vector<double> flatten_zigzag(std::span<const double> image, std::size_t height,
                                   std::size_t width, FlattenOrder order) {
  if (height == 0 || width == 0 || image.size() != height * width) {
    throw ShapeError("flatten_zigzag: image does not match " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  std::vector<double> out(image.begin(), image.end());
  if (order == FlattenOrder::snake) {
    for (std::size_t r = 1; r < height; r += 2) {
      std::reverse(out.begin() + static_cast<std::ptrdiff_t>(r * width),
                   out.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
    }
  }
  return out;
}

std::vector<double> unflatten_zigzag(std::span<const double> flat, std::size_t height,
                                     std::size_t width, FlattenOrder order) {
  // Both orders are involutions on the row layout.
  return flatten_zigzag(flat, height, width, order);
}

MpsDecomposition decompose_state_to_mps(const Tensor& state, std::optional<std::size_t> max_bond) {
  if (state.rank() == 0) throw ShapeError("decompose_state_to_mps needs at least one leg");
  if (!(frobenius_norm(state) > 0.0)) throw NumericalError("cannot decompose a zero state");
  const std::size_t m = state.rank();
  std::map<std::string, std::string> mapping;
  for (std::size_t k = 0; k < m; ++k) mapping[state.indices()[k].label] = upper_label(k);
  Tensor rest = state.relabeled(mapping);

  double err_sq = 0.0;
  std::vector<Tensor> sites;
  SvdOptions opts;
  opts.max_rank = max_bond;
  opts.cutoff = 1e-14 * frobenius_norm(state);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    std::vector<std::string> rows;
    if (k > 0) rows.push_back(bond_label(k - 1));
    rows.push_back(upper_label(k));
    opts.bond_label = bond_label(k);
    auto res = svd(rest, rows, opts);
    err_sq += res.truncation_error_sq;
    sites.push_back(std::move(res.u));
    Tensor sv = res.v;
    const std::size_t cols = sv.size() / res.s.size();
    for (std::size_t r = 0; r < res.s.size(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) sv.data()[r * cols + c] *= res.s[r];
    }
    rest = std::move(sv);
  }
  sites.push_back(std::move(rest));
  return MpsDecomposition{TensorTrain(NetworkKind::mps, std::move(sites)), err_sq};
}

Tensor frqi_state(std::span<const double> pixels) {
  const std::size_t n = pixels.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ShapeError("FRQI needs a power-of-two pixel count, got " + std::to_string(n));
  }
  std::size_t m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> data(2 * n);
  for (std::size_t x = 0; x < n; ++x) {
    require_unit_interval(pixels[x], "FRQI");
    const double angle = std::numbers::pi * pixels[x] / 2.0;
    data[2 * x] = amp * std::cos(angle);
    data[2 * x + 1] = amp * std::sin(angle);
  }
  std::vector<Index> indices;
  for (std::size_t k = 0; k <= m; ++k) indices.push_back({upper_label(k), 2});
  return Tensor(std::move(indices), std::move(data));
}

EmbeddedState embed_frqi(std::span<const double> pixels, std::optional<std::size_t> max_bond) {
  const Tensor dense = frqi_state(pixels);
  double sq = 0.0;
  for (double x : dense.data()) sq += x * x;
  if (std::abs(sq - 1.0) > 1e-12) {
    throw NumericalError("FRQI state is not unit norm");
  }
  return EmbeddedState(decompose_state_to_mps(dense, max_bond).mps);
}

}  // namespace tn4ml
