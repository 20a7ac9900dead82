#include "chain_kernels.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "tn4ml/error.hpp"

namespace tn4ml::detail {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const Mat>;
using MapM = Eigen::Map<Mat>;
using VecC = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

// Rescale by a power of two so the largest entry lies in [0.5, 1); exact.
template <typename Range>
double rescale(Range& values) {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  if (!(m > 0.0) || !std::isfinite(m)) return 0.0;
  int e = 0;
  std::frexp(m, &e);
  if (e < -1000) {
    // 2^-e itself would overflow.
    for (double& x : values) x = std::ldexp(x, -e);
  } else {
    const double f = std::ldexp(1.0, -e);
    for (double& x : values) x *= f;
  }
  return static_cast<double>(e) * std::numbers::ln2;
}

MapC slice(const Reduced& r, std::size_t o) {
  return MapC(r.data.data() + o * r.slice(), static_cast<Eigen::Index>(r.L),
              static_cast<Eigen::Index>(r.R));
}

MapM slice(Reduced& r, std::size_t o) {
  return MapM(r.data.data() + o * r.slice(), static_cast<Eigen::Index>(r.L),
              static_cast<Eigen::Index>(r.R));
}

Reduced zeros_like(const Reduced& r) {
  return Reduced{r.o, r.L, r.R, std::vector<double>(r.data.size(), 0.0)};
}

void check_chain(std::span<const Reduced> chain) {
  if (chain.empty()) throw ShapeError("empty chain");
  if (chain.front().L != 1 || chain.back().R != 1) throw ShapeError("chain is not open");
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    if (chain[k].R != chain[k + 1].L) {
      throw ShapeError("bond mismatch between chain sites " + std::to_string(k) + " and " +
                       std::to_string(k + 1));
    }
  }
}

}  // namespace

std::vector<SiteView> view_model(const TensorTrain& model) {
  std::vector<SiteView> out;
  out.reserve(model.size());
  for (std::size_t k = 0; k < model.size(); ++k) {
    const auto sig = model.signature(k);
    SiteView v;
    v.data = model.site(k).data().data();
    v.l = std::max<std::size_t>(sig.left_bond, 1);
    v.r = std::max<std::size_t>(sig.right_bond, 1);
    v.p = sig.upper_dim.value_or(1);
    v.o = sig.lower_dim.value_or(1);
    out.push_back(v);
  }
  return out;
}

std::vector<InputBlock> input_blocks(const EmbeddedState& state, std::optional<std::size_t> merge_at) {
  const std::size_t n = state.size();
  std::vector<InputBlock> blocks;
  blocks.reserve(n);
  if (state.is_product()) {
    for (const auto& local : state.product().locals) {
      blocks.push_back(InputBlock{local, 1, local.size(), 1});
    }
  } else {
    const auto& mps = state.mps();
    for (std::size_t k = 0; k < n; ++k) {
      const auto sig = mps.signature(k);
      const auto span = mps.site(k).data();
      blocks.push_back(InputBlock{std::vector<double>(span.begin(), span.end()),
                                  std::max<std::size_t>(sig.left_bond, 1), sig.upper_dim.value_or(1),
                                  std::max<std::size_t>(sig.right_bond, 1)});
    }
  }
  if (!merge_at) return blocks;
  const std::size_t k = *merge_at;
  if (k + 1 >= n) throw RangeError("cannot merge input sites " + std::to_string(k) + " and " +
                                   std::to_string(k + 1));
  const InputBlock& a = blocks[k];
  const InputBlock& b = blocks[k + 1];
  InputBlock m{std::vector<double>(a.sl * a.p * b.p * b.sr, 0.0), a.sl, a.p * b.p, b.sr};
  const MapC bm(b.data.data(), static_cast<Eigen::Index>(b.sl), static_cast<Eigen::Index>(b.p * b.sr));
  const MapC am(a.data.data(), static_cast<Eigen::Index>(a.sl * a.p), static_cast<Eigen::Index>(a.sr));
  MapM(m.data.data(), static_cast<Eigen::Index>(a.sl * a.p), static_cast<Eigen::Index>(b.p * b.sr)).noalias() =
      am * bm;
  std::vector<InputBlock> merged;
  merged.reserve(n - 1);
  for (std::size_t i = 0; i < k; ++i) merged.push_back(std::move(blocks[i]));
  merged.push_back(std::move(m));
  for (std::size_t i = k + 2; i < n; ++i) merged.push_back(std::move(blocks[i]));
  return merged;
}

Reduced reduce(const SiteView& s, const InputBlock& in) {
  if (s.p != in.p) {
    throw ShapeError("physical dim mismatch: model " + std::to_string(s.p) + ", input " +
                     std::to_string(in.p));
  }
  Reduced out{s.o, s.l * in.sl, s.r * in.sr, std::vector<double>(s.o * s.l * in.sl * s.r * in.sr, 0.0)};
  const std::size_t L = out.L, R = out.R;
  if (in.sl == 1 && in.sr == 1) {
    // R[o, l, r] = sum_p P[l, p, o, r] phi[p]
    for (std::size_t l = 0; l < s.l; ++l) {
      for (std::size_t p = 0; p < s.p; ++p) {
        const double phi = in.data[p];
        if (phi == 0.0) continue;
        const double* src = s.data + (l * s.p + p) * s.o * s.r;
        for (std::size_t o = 0; o < s.o; ++o) {
          double* dst = out.data.data() + o * L * R + l * R;
          for (std::size_t r = 0; r < s.r; ++r) dst[r] += phi * src[o * s.r + r];
        }
      }
    }
    return out;
  }
  for (std::size_t l = 0; l < s.l; ++l) {
    for (std::size_t p = 0; p < s.p; ++p) {
      for (std::size_t o = 0; o < s.o; ++o) {
        const double* prow = s.data + ((l * s.p + p) * s.o + o) * s.r;
        for (std::size_t a = 0; a < in.sl; ++a) {
          const double* irow = in.data.data() + (a * in.p + p) * in.sr;
          double* dst = out.data.data() + o * L * R + (l * in.sl + a) * R;
          for (std::size_t r = 0; r < s.r; ++r) {
            const double w = prow[r];
            if (w == 0.0) continue;
            for (std::size_t b = 0; b < in.sr; ++b) dst[r * in.sr + b] += w * irow[b];
          }
        }
      }
    }
  }
  return out;
}

void backproject(const Reduced& g, const InputBlock& in, double factor, const SiteView& s,
                 std::span<double> site_grad) {
  const std::size_t L = g.L, R = g.R;
  if (in.sl == 1 && in.sr == 1) {
    for (std::size_t l = 0; l < s.l; ++l) {
      for (std::size_t p = 0; p < s.p; ++p) {
        const double phi = factor * in.data[p];
        if (phi == 0.0) continue;
        double* dst = site_grad.data() + (l * s.p + p) * s.o * s.r;
        for (std::size_t o = 0; o < s.o; ++o) {
          const double* src = g.data.data() + o * L * R + l * R;
          for (std::size_t r = 0; r < s.r; ++r) dst[o * s.r + r] += phi * src[r];
        }
      }
    }
    return;
  }
  for (std::size_t l = 0; l < s.l; ++l) {
    for (std::size_t p = 0; p < s.p; ++p) {
      for (std::size_t o = 0; o < s.o; ++o) {
        double* prow = site_grad.data() + ((l * s.p + p) * s.o + o) * s.r;
        for (std::size_t a = 0; a < in.sl; ++a) {
          const double* irow = in.data.data() + (a * in.p + p) * in.sr;
          const double* src = g.data.data() + o * L * R + (l * in.sl + a) * R;
          for (std::size_t r = 0; r < s.r; ++r) {
            double acc = 0.0;
            for (std::size_t b = 0; b < in.sr; ++b) acc += src[r * in.sr + b] * irow[b];
            prow[r] += factor * acc;
          }
        }
      }
    }
  }
}

Reduced as_reduced(const SiteView& s) {
  const std::size_t po = s.p * s.o;
  Reduced out{po, s.l, s.r, std::vector<double>(s.l * po * s.r)};
  for (std::size_t l = 0; l < s.l; ++l) {
    for (std::size_t q = 0; q < po; ++q) {
      for (std::size_t r = 0; r < s.r; ++r) {
        out.data[(q * s.l + l) * s.r + r] = s.data[(l * po + q) * s.r + r];
      }
    }
  }
  return out;
}

void add_from_reduced(const Reduced& g, double factor, const SiteView& s, std::span<double> site_grad) {
  const std::size_t po = s.p * s.o;
  for (std::size_t l = 0; l < s.l; ++l) {
    for (std::size_t q = 0; q < po; ++q) {
      for (std::size_t r = 0; r < s.r; ++r) {
        site_grad[(l * po + q) * s.r + r] += factor * g.data[(q * s.l + l) * s.r + r];
      }
    }
  }
}

QuadraticResult quadratic(std::span<const Reduced> chain, bool want_gradients) {
  check_chain(chain);
  const std::size_t n = chain.size();
  std::vector<Mat> left(n + 1);
  left[0] = Mat::Ones(1, 1);
  double log_scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Reduced& c = chain[k];
    Mat next = Mat::Zero(static_cast<Eigen::Index>(c.R), static_cast<Eigen::Index>(c.R));
    for (std::size_t o = 0; o < c.o; ++o) {
      const auto r = slice(c, o);
      next.noalias() += r.transpose() * (left[k] * r);
    }
    std::span<double> view(next.data(), static_cast<std::size_t>(next.size()));
    log_scale += rescale(view);
    left[k + 1] = std::move(next);
  }
  const double top = left[n](0, 0);
  if (!(top > 0.0) || !std::isfinite(top)) {
    throw NumericalError("zero or non-finite squared norm");
  }
  QuadraticResult out;
  out.log_q = log_scale + std::log(top);
  if (!want_gradients) return out;

  out.dlogq.resize(n);
  Mat right = Mat::Ones(1, 1);
  for (std::size_t k = n; k-- > 0;) {
    const Reduced& c = chain[k];
    Reduced g = zeros_like(c);
    double qhat = 0.0;
    for (std::size_t o = 0; o < c.o; ++o) {
      auto m = slice(g, o);
      m.noalias() = left[k] * slice(c, o) * right;
      qhat += m.cwiseProduct(slice(c, o)).sum();
    }
    if (!(qhat > 0.0) || !std::isfinite(qhat)) {
      throw NumericalError("degenerate environment at chain site " + std::to_string(k));
    }
    const double f = 2.0 / qhat;
    for (double& x : g.data) x *= f;
    out.dlogq[k] = std::move(g);
    if (k == 0) break;
    Mat next = Mat::Zero(static_cast<Eigen::Index>(c.L), static_cast<Eigen::Index>(c.L));
    for (std::size_t o = 0; o < c.o; ++o) {
      const auto r = slice(c, o);
      next.noalias() += r * (right * r.transpose());
    }
    std::span<double> view(next.data(), static_cast<std::size_t>(next.size()));
    rescale(view);
    right = std::move(next);
  }
  return out;
}

LinearChain::LinearChain(std::span<const Reduced> chain, std::size_t out_site)
    : chain_(chain), out_(out_site) {
  check_chain(chain);
  const std::size_t n = chain.size();
  if (out_ >= n) throw RangeError("output site out of range");
  for (std::size_t k = 0; k < n; ++k) {
    if (k != out_ && chain[k].o != 1) {
      throw ShapeError("linear chain has a second open output leg at site " + std::to_string(k));
    }
  }
  left_.resize(out_ + 1);
  left_scale_.assign(out_ + 1, 0.0);
  left_[0] = {1.0};
  for (std::size_t k = 0; k < out_; ++k) {
    const auto r = slice(chain[k], 0);
    std::vector<double> next(chain[k].R);
    Vec(next.data(), static_cast<Eigen::Index>(next.size())).noalias() =
        r.transpose() * VecC(left_[k].data(), static_cast<Eigen::Index>(left_[k].size()));
    left_scale_[k + 1] = left_scale_[k] + rescale(next);
    left_[k + 1] = std::move(next);
  }
  right_.resize(n + 1);
  right_scale_.assign(n + 1, 0.0);
  right_[n] = {1.0};
  for (std::size_t k = n; k-- > out_ + 1;) {
    const auto r = slice(chain[k], 0);
    std::vector<double> next(chain[k].L);
    Vec(next.data(), static_cast<Eigen::Index>(next.size())).noalias() =
        r * VecC(right_[k + 1].data(), static_cast<Eigen::Index>(right_[k + 1].size()));
    right_scale_[k] = right_scale_[k + 1] + rescale(next);
    right_[k] = std::move(next);
  }
}

std::vector<double> LinearChain::output() const {
  const Reduced& c = chain_[out_];
  const VecC l(left_[out_].data(), static_cast<Eigen::Index>(c.L));
  const VecC r(right_[out_ + 1].data(), static_cast<Eigen::Index>(c.R));
  const double scale = std::exp(left_scale_[out_] + right_scale_[out_ + 1]);
  std::vector<double> y(c.o);
  for (std::size_t o = 0; o < c.o; ++o) {
    y[o] = scale * l.dot(slice(c, o) * r);
    if (!std::isfinite(y[o])) throw NumericalError("non-finite model output");
  }
  return y;
}

std::vector<Reduced> LinearChain::backward(std::span<const double> w) const {
  const std::size_t n = chain_.size();
  const Reduced& c = chain_[out_];
  if (w.size() != c.o) throw ShapeError("output cotangent has the wrong size");
  std::vector<Reduced> grads(n);

  Mat a = Mat::Zero(static_cast<Eigen::Index>(c.L), static_cast<Eigen::Index>(c.R));
  for (std::size_t o = 0; o < c.o; ++o) a += w[o] * slice(c, o);

  const VecC lj(left_[out_].data(), static_cast<Eigen::Index>(c.L));
  const VecC rj(right_[out_ + 1].data(), static_cast<Eigen::Index>(c.R));
  {
    Reduced g = zeros_like(c);
    const double scale = std::exp(left_scale_[out_] + right_scale_[out_ + 1]);
    const Mat outer = lj * rj.transpose();
    for (std::size_t o = 0; o < c.o; ++o) slice(g, o) = (scale * w[o]) * outer;
    grads[out_] = std::move(g);
  }

  // Sites left of the output: right environment carries the contracted output.
  std::vector<double> rho(c.L);
  Vec(rho.data(), static_cast<Eigen::Index>(rho.size())).noalias() = a * rj;
  double rho_scale = right_scale_[out_ + 1] + rescale(rho);
  for (std::size_t k = out_; k-- > 0;) {
    const Reduced& ck = chain_[k];
    Reduced g = zeros_like(ck);
    const double scale = std::exp(left_scale_[k] + rho_scale);
    slice(g, 0) = scale * (VecC(left_[k].data(), static_cast<Eigen::Index>(ck.L)) *
                           VecC(rho.data(), static_cast<Eigen::Index>(ck.R)).transpose());
    grads[k] = std::move(g);
    std::vector<double> next(ck.L);
    Vec(next.data(), static_cast<Eigen::Index>(next.size())).noalias() =
        slice(ck, 0) * VecC(rho.data(), static_cast<Eigen::Index>(rho.size()));
    rho_scale += rescale(next);
    rho = std::move(next);
  }

  std::vector<double> lam(c.R);
  Vec(lam.data(), static_cast<Eigen::Index>(lam.size())).noalias() = a.transpose() * lj;
  double lam_scale = left_scale_[out_] + rescale(lam);
  for (std::size_t k = out_ + 1; k < n; ++k) {
    const Reduced& ck = chain_[k];
    Reduced g = zeros_like(ck);
    const double scale = std::exp(lam_scale + right_scale_[k + 1]);
    slice(g, 0) = scale * (VecC(lam.data(), static_cast<Eigen::Index>(ck.L)) *
                           VecC(right_[k + 1].data(), static_cast<Eigen::Index>(ck.R)).transpose());
    grads[k] = std::move(g);
    std::vector<double> next(ck.R);
    Vec(next.data(), static_cast<Eigen::Index>(next.size())).noalias() =
        slice(ck, 0).transpose() * VecC(lam.data(), static_cast<Eigen::Index>(lam.size()));
    lam_scale += rescale(next);
    lam = std::move(next);
  }
  for (const auto& g : grads) {
    for (double x : g.data) {
      if (!std::isfinite(x)) throw NumericalError("non-finite gradient in linear chain");
    }
  }
  return grads;
}

}  // namespace tn4ml::detail
