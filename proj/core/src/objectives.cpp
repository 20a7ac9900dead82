#include "tn4ml/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "engine.hpp"
#include "tn4ml/error.hpp"

namespace tn4ml {
namespace detail {
namespace {

enum class Path { quadratic, linear };

Path path_for(LossKind kind) {
  switch (kind) {
    case LossKind::log_quad_norm:
    case LossKind::neg_log_likelihood: return Path::quadratic;
    default: return Path::linear;
  }
}

std::size_t output_block(const ChainModel& chain) {
  std::optional<std::size_t> out;
  for (std::size_t k = 0; k < chain.sites.size(); ++k) {
    if (chain.sites[k].o > 1) {
      if (out) throw ShapeError("this loss needs a model with at most one output leg");
      out = k;
    }
  }
  return out.value_or(0);
}

std::vector<std::size_t> block_sizes(const ChainModel& chain) {
  std::vector<std::size_t> out;
  for (const auto& s : chain.sites) out.push_back(s.l * s.p * s.o * s.r);
  return out;
}

// Loss of one sample; when `grads` is non-null, adds scale * dL/dblock.
double sample_loss(const ChainModel& chain, const EmbeddedDataset& data, std::size_t i,
                   const LossSpec& loss, double scale, std::vector<std::vector<double>>* grads) {
  const auto inputs = input_blocks(data.states[i], chain.merge_at);
  if (inputs.size() != chain.sites.size()) {
    throw ShapeError("sample has " + std::to_string(inputs.size()) + " sites, model has " +
                     std::to_string(chain.sites.size()));
  }
  std::vector<Reduced> reduced;
  reduced.reserve(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) reduced.push_back(reduce(chain.sites[k], inputs[k]));

  if (path_for(loss.primary) == Path::quadratic) {
    auto q = quadratic(reduced, grads != nullptr);
    double value = 0.0;
    double dlog = 0.0;
    if (loss.primary == LossKind::log_quad_norm) {
      const double c = loss.logquad_variant == LogQuadVariant::shifted ? 1.0 : 0.0;
      value = (q.log_q - c) * (q.log_q - c);
      dlog = 2.0 * (q.log_q - c);
    } else {
      value = -q.log_q;
      dlog = -1.0;
    }
    if (grads) {
      for (std::size_t k = 0; k < reduced.size(); ++k) {
        backproject(q.dlogq[k], inputs[k], scale * dlog, chain.sites[k], (*grads)[k]);
      }
    }
    return value;
  }

  const std::size_t out = output_block(chain);
  LinearChain lin(reduced, out);
  const auto y = lin.output();
  std::vector<double> w(y.size());
  double value = 0.0;
  if (loss.primary == LossKind::cross_entropy_softmax) {
    if (i >= data.labels.size()) throw ShapeError("cross entropy needs a label per sample");
    const std::size_t label = data.labels[i];
    if (label >= y.size()) {
      throw RangeError("label " + std::to_string(label) + " out of range for " +
                       std::to_string(y.size()) + " classes");
    }
    const auto p = softmax(y);
    const double m = *std::max_element(y.begin(), y.end());
    double z = 0.0;
    for (double v : y) z += std::exp(v - m);
    value = -(y[label] - m - std::log(z));
    for (std::size_t c = 0; c < y.size(); ++c) w[c] = p[c] - (c == label ? 1.0 : 0.0);
  } else {
    std::vector<double> target;
    if (i < data.targets.size()) {
      target = data.targets[i];
    } else if (i < data.labels.size()) {
      target.assign(y.size(), 0.0);
      if (data.labels[i] >= y.size()) throw RangeError("label out of range for one-hot target");
      target[data.labels[i]] = 1.0;
    } else {
      throw ShapeError("mean squared error needs targets or labels");
    }
    if (target.size() != y.size()) {
      throw ShapeError("target has " + std::to_string(target.size()) + " entries, output has " +
                       std::to_string(y.size()));
    }
    const double inv = 1.0 / static_cast<double>(y.size());
    for (std::size_t c = 0; c < y.size(); ++c) {
      const double d = y[c] - target[c];
      value += d * d * inv;
      w[c] = 2.0 * d * inv;
    }
  }
  if (grads) {
    const auto g = lin.backward(w);
    for (std::size_t k = 0; k < reduced.size(); ++k) {
      backproject(g[k], inputs[k], scale, chain.sites[k], (*grads)[k]);
    }
  }
  return value;
}

// Adds weight * d/dblock of the regularizer; returns weight * value.
double regularize(const ChainModel& chain, const Regularizer& reg,
                  std::vector<std::vector<double>>* grads) {
  std::vector<Reduced> blocks;
  blocks.reserve(chain.sites.size());
  for (const auto& s : chain.sites) blocks.push_back(as_reduced(s));
  const bool relu = reg.kind == RegularizerKind::relu_log_norm;
  const auto q = quadratic(blocks, grads != nullptr);
  const bool active = !relu || q.log_q > 0.0;
  if (grads && active) {
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      add_from_reduced(q.dlogq[k], reg.weight, chain.sites[k], (*grads)[k]);
    }
  }
  return reg.weight * (active ? q.log_q : 0.0);
}

}  // namespace

std::size_t chunk_size(std::size_t n) { return std::max<std::size_t>(4, (n + 63) / 64); }

std::size_t chunk_count(std::size_t n) { return n == 0 ? 0 : (n + chunk_size(n) - 1) / chunk_size(n); }

void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t size = chunk_size(n);
  const std::size_t count = chunk_count(n);
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t c = 0; c < count; ++c) fn(c, c * size, std::min(n, (c + 1) * size));
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < count; c += workers) fn(c, c * size, std::min(n, (c + 1) * size));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EngineResult evaluate(const ChainModel& chain, const EmbeddedDataset& data,
                      std::span<const std::size_t> batch, const LossSpec& loss,
                      const EngineOptions& options) {
  if (batch.empty()) throw ShapeError("empty batch");
  for (std::size_t i : batch) {
    if (i >= data.size()) throw RangeError("sample index " + std::to_string(i) + " out of range");
  }
  const std::size_t n = batch.size();
  const double scale = loss.reduction == Reduction::mean ? 1.0 / static_cast<double>(n) : 1.0;
  const auto sizes = block_sizes(chain);
  const bool want = options.want_gradients;

  EngineResult out;
  out.per_sample.assign(n, 0.0);
  std::vector<std::vector<std::vector<double>>> partial(want ? chunk_count(n) : 0);

  parallel_chunks(n, options.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<std::vector<double>>* acc = nullptr;
    if (want) {
      auto& g = partial[c];
      g.resize(sizes.size());
      for (std::size_t k = 0; k < sizes.size(); ++k) g[k].assign(sizes[k], 0.0);
      acc = &g;
    }
    for (std::size_t j = begin; j < end; ++j) {
      const std::size_t i = batch[j];
      try {
        out.per_sample[j] = sample_loss(chain, data, i, loss, scale, acc);
      } catch (const NumericalError& e) {
        throw NumericalError("sample " + std::to_string(i) + ": " + e.what());
      }
    }
  });

  double total = 0.0;
  for (double v : out.per_sample) total += v;
  out.value = total * scale;

  if (want) {
    out.gradients.resize(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) out.gradients[k].assign(sizes[k], 0.0);
    for (const auto& g : partial) {
      for (std::size_t k = 0; k < sizes.size(); ++k) {
        for (std::size_t e = 0; e < sizes[k]; ++e) out.gradients[k][e] += g[k][e];
      }
    }
  }
  for (const auto& reg : loss.regularizers) {
    if (reg.weight < 0.0) throw RangeError("regularizer weight must be >= 0");
    if (reg.weight == 0.0) continue;
    out.regularizer_value += regularize(chain, reg, want ? &out.gradients : nullptr);
  }
  out.value += out.regularizer_value;
  if (!std::isfinite(out.value)) throw NumericalError("non-finite loss value");
  return out;
}

}  // namespace detail

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::log_quad_norm: return "log_quad_norm";
    case LossKind::neg_log_likelihood: return "neg_log_likelihood";
    case LossKind::cross_entropy_softmax: return "cross_entropy_softmax";
    case LossKind::mean_squared_error: return "mean_squared_error";
  }
  return "?";
}

LossKind loss_kind_from_string(std::string_view name) {
  for (auto k : {LossKind::log_quad_norm, LossKind::neg_log_likelihood, LossKind::cross_entropy_softmax,
                 LossKind::mean_squared_error}) {
    if (to_string(k) == name) return k;
  }
  if (name == "nll") return LossKind::neg_log_likelihood;
  if (name == "mse") return LossKind::mean_squared_error;
  if (name == "cross_entropy") return LossKind::cross_entropy_softmax;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ShapeError("softmax of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

Tensor model_output(const TensorTrain& model, const EmbeddedState& state) {
  const auto lowers = model.lower_positions();
  if (lowers.size() > 1) {
    throw ShapeError("model_output: " + std::to_string(lowers.size()) + " open output legs");
  }
  detail::ChainModel chain{detail::view_model(model), std::nullopt};
  const auto inputs = detail::input_blocks(state);
  if (inputs.size() != chain.sites.size()) throw ShapeError("model and state lengths differ");
  std::vector<detail::Reduced> reduced;
  for (std::size_t k = 0; k < inputs.size(); ++k) reduced.push_back(detail::reduce(chain.sites[k], inputs[k]));
  const std::size_t out = lowers.empty() ? 0 : lowers.front();
  const auto y = detail::LinearChain(reduced, out).output();
  if (lowers.empty()) return Tensor::scalar(y.front());
  return Tensor::vector(lower_label(out), y);
}

double log_output_norm_sq(const TensorTrain& model, const EmbeddedState& state) {
  const auto sites = detail::view_model(model);
  const auto inputs = detail::input_blocks(state);
  if (inputs.size() != sites.size()) throw ShapeError("model and state lengths differ");
  std::vector<detail::Reduced> reduced;
  for (std::size_t k = 0; k < inputs.size(); ++k) reduced.push_back(detail::reduce(sites[k], inputs[k]));
  return detail::quadratic(reduced, false).log_q;
}

LossReport gradient_engine(const TensorTrain& model, const EmbeddedDataset& data,
                           std::span<const std::size_t> batch, const LossSpec& loss,
                           const EngineOptions& options) {
  detail::ChainModel chain{detail::view_model(model), std::nullopt};
  auto res = detail::evaluate(chain, data, batch, loss, options);
  LossReport report;
  report.value = res.value;
  report.regularizer_value = res.regularizer_value;
  report.per_sample_values = std::move(res.per_sample);
  if (options.want_gradients) {
    report.gradients.reserve(model.size());
    for (std::size_t k = 0; k < model.size(); ++k) {
      for (double x : res.gradients[k]) {
        if (!std::isfinite(x)) throw NumericalError("non-finite gradient at site " + std::to_string(k));
      }
      report.gradients.emplace_back(model.site(k).indices(), std::move(res.gradients[k]));
    }
  }
  return report;
}

LossReport gradient_engine(const TensorTrain& model, const EmbeddedDataset& data, const LossSpec& loss,
                           const EngineOptions& options) {
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return gradient_engine(model, data, all, loss, options);
}

namespace {

LossReport run_simple(const TensorTrain& model, EmbeddedDataset data, const LossSpec& loss) {
  return gradient_engine(model, data, loss);
}

}  // namespace

LossReport loss_log_quad_norm(const TensorTrain& model, std::span<const EmbeddedState> batch,
                              LogQuadVariant variant) {
  LossSpec loss;
  loss.primary = LossKind::log_quad_norm;
  loss.logquad_variant = variant;
  return run_simple(model, EmbeddedDataset{{batch.begin(), batch.end()}, {}, {}}, loss);
}

LossReport loss_nll(const TensorTrain& model, std::span<const EmbeddedState> batch) {
  LossSpec loss;
  loss.primary = LossKind::neg_log_likelihood;
  return run_simple(model, EmbeddedDataset{{batch.begin(), batch.end()}, {}, {}}, loss);
}

LossReport loss_cross_entropy_softmax(const TensorTrain& model, std::span<const EmbeddedState> batch,
                                      std::span<const std::size_t> labels, Reduction reduction) {
  if (labels.size() != batch.size()) throw ShapeError("one label per sample is required");
  LossSpec loss;
  loss.primary = LossKind::cross_entropy_softmax;
  loss.reduction = reduction;
  return run_simple(model, EmbeddedDataset{{batch.begin(), batch.end()}, {labels.begin(), labels.end()}, {}},
                    loss);
}

LossReport loss_mse(const TensorTrain& model, std::span<const EmbeddedState> batch,
                    std::span<const std::vector<double>> targets) {
  if (targets.size() != batch.size()) throw ShapeError("one target per sample is required");
  LossSpec loss;
  loss.primary = LossKind::mean_squared_error;
  return run_simple(model, EmbeddedDataset{{batch.begin(), batch.end()}, {}, {targets.begin(), targets.end()}},
                    loss);
}

double reg_log_norm(const TensorTrain& model, RegularizerKind kind) {
  const double plain = 2.0 * log_norm(model);
  if (!std::isfinite(plain)) throw NumericalError("zero-norm model");
  return kind == RegularizerKind::relu_log_norm ? std::max(0.0, plain) : plain;
}

std::vector<Tensor> finite_difference_gradient(const TensorTrain& model, const EmbeddedDataset& data,
                                               std::span<const std::size_t> batch,
                                               const LossSpec& loss, double h) {
  if (!(h > 0.0)) throw RangeError("finite difference step must be > 0");
  EngineOptions opts;
  opts.want_gradients = false;
  TensorTrain work = model;
  std::vector<Tensor> out;
  for (std::size_t k = 0; k < model.size(); ++k) {
    Tensor g = Tensor::zeros(model.site(k).indices());
    for (std::size_t e = 0; e < g.size(); ++e) {
      Tensor site = model.site(k);
      const double x = site.data()[e];
      site.data()[e] = x + h;
      work.set_site(k, site);
      const double up = gradient_engine(work, data, batch, loss, opts).value;
      site.data()[e] = x - h;
      work.set_site(k, site);
      const double down = gradient_engine(work, data, batch, loss, opts).value;
      g.data()[e] = (up - down) / (2.0 * h);
    }
    work.set_site(k, model.site(k));
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace tn4ml
