#include "tn4ml/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "engine.hpp"
#include "tn4ml/error.hpp"
#include "tn4ml/linalg.hpp"
#include "tn4ml/rng.hpp"

namespace tn4ml {
namespace {

using Clock = std::chrono::steady_clock;

void check_config(const TrainConfig& c, const EmbeddedDataset& train) {
  if (train.size() == 0) throw ShapeError("training set is empty");
  if (c.epochs == 0) throw RangeError("epochs must be >= 1");
  if (c.batch_size == 0) throw RangeError("batch_size must be >= 1");
  const double lr = learning_rate(c.optimizer);
  if (!(lr >= 0.0)) throw RangeError("learning rate must be >= 0");
  if (c.max_bond && *c.max_bond == 0) throw RangeError("max_bond must be >= 1");
  if (c.grad_clip && !(*c.grad_clip > 0.0)) throw RangeError("grad_clip must be > 0");
  if (c.early_stopping && c.early_stopping->patience == 0) {
    throw RangeError("early stopping patience must be >= 1");
  }
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, CounterRng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch_size) {
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(b),
                     perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + batch_size)));
  }
  return out;
}

double dataset_loss(const TensorTrain& model, const EmbeddedDataset& data, const LossSpec& loss,
                    std::size_t threads) {
  EngineOptions opts;
  opts.threads = threads;
  opts.want_gradients = false;
  return gradient_engine(model, data, loss, opts).value;
}

void normalize_uniformly(TensorTrain& model) {
  const double ln = log_norm(model);
  if (!std::isfinite(ln)) throw NumericalError("cannot normalize a zero-norm model");
  const double f = std::exp(-ln / static_cast<double>(model.size()));
  const auto center = model.canonical_center();
  for (std::size_t k = 0; k < model.size(); ++k) model.scale_site(k, f);
  model.set_canonical_center(center);
}

// Shared epoch bookkeeping and early stopping.
class Tracker {
 public:
  Tracker(const TrainConfig& config, const EmbeddedDataset& train, const EmbeddedDataset* validation,
          const LossSpec& loss)
      : config_(config), train_(train), validation_(validation), loss_(loss) {
    if (config.early_stopping && config.early_stopping->monitor == Monitor::validation && !validation) {
      throw ConfigError("early stopping on validation loss needs a validation set");
    }
  }

  // Returns true when training should stop.
  bool end_epoch(std::size_t epoch, const TensorTrain& model, Clock::time_point start) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = dataset_loss(model, train_, loss_, config_.threads);
    if (validation_ && validation_->size() > 0) {
      rec.val_loss = dataset_loss(model, *validation_, loss_, config_.threads);
    }
    rec.epoch_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    rec.throughput = rec.epoch_seconds > 0.0 ? static_cast<double>(train_.size()) / rec.epoch_seconds : 0.0;
    rec.bond_dims = model.bond_dims();
    rec.max_bond = model.max_bond_dim();
    log_.epochs.push_back(rec);
    if (config_.on_epoch) config_.on_epoch(rec);

    if (!config_.early_stopping) return false;
    const auto& es = *config_.early_stopping;
    const double monitored = es.monitor == Monitor::train ? rec.train_loss : *rec.val_loss;
    if (!best_ || monitored < best_value_ - es.min_delta) {
      best_value_ = monitored;
      best_.emplace(model);
      log_.best_epoch = epoch;
      stale_ = 0;
      return false;
    }
    if (++stale_ >= es.patience) {
      log_.stopped_early = true;
      return true;
    }
    return false;
  }

  TrainResult finish(TensorTrain model) {
    if (best_) return TrainResult{std::move(*best_), std::move(log_)};
    return TrainResult{std::move(model), std::move(log_)};
  }

 private:
  const TrainConfig& config_;
  const EmbeddedDataset& train_;
  const EmbeddedDataset* validation_;
  const LossSpec& loss_;
  TrainLog log_;
  std::optional<TensorTrain> best_;
  double best_value_ = 0.0;
  std::size_t stale_ = 0;
};

std::string coords(std::size_t epoch, std::size_t batch) {
  return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch);
}

bool end_epoch(Tracker& tracker, std::size_t epoch, const TensorTrain& model, Clock::time_point start) {
  try {
    return tracker.end_epoch(epoch, model, start);
  } catch (const NumericalError& e) {
    throw NumericalError("diverged at epoch " + std::to_string(epoch) + " (evaluation): " + e.what());
  }
}

}  // namespace

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,epoch_seconds,throughput\n";
  char buf[64];
  for (const auto& e : epochs) {
    out << e.epoch << ',';
    std::snprintf(buf, sizeof buf, "%.17g", e.train_loss);
    out << buf << ',';
    if (e.val_loss) {
      std::snprintf(buf, sizeof buf, "%.17g", *e.val_loss);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6f,%.3f\n", e.epoch_seconds, e.throughput);
    out << buf;
  }
  return out.str();
}

nlohmann::json TrainLog::to_json() const {
  nlohmann::json j;
  j["epochs"] = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json r;
    r["epoch"] = e.epoch;
    r["train_loss"] = e.train_loss;
    r["val_loss"] = e.val_loss ? nlohmann::json(*e.val_loss) : nlohmann::json(nullptr);
    r["epoch_seconds"] = e.epoch_seconds;
    r["throughput"] = e.throughput;
    r["bond_dims"] = e.bond_dims;
    r["max_bond"] = e.max_bond;
    j["epochs"].push_back(r);
  }
  j["best_epoch"] = best_epoch ? nlohmann::json(*best_epoch) : nlohmann::json(nullptr);
  j["stopped_early"] = stopped_early;
  return j;
}

TrainResult train_gradient_descent(TensorTrain model, const EmbeddedDataset& train,
                                   const EmbeddedDataset* validation, const LossSpec& loss,
                                   const TrainConfig& config) {
  check_config(config, train);
  Tracker tracker(config, train, validation, loss);
  Optimizer opt(config.optimizer);
  CounterRng rng(config.seed);
  EngineOptions eopts;
  eopts.threads = config.threads;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    const auto batches = make_batches(train.size(), config.batch_size, rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      detail::ChainModel chain{detail::view_model(model), std::nullopt};
      detail::EngineResult res;
      try {
        res = detail::evaluate(chain, train, batches[b], loss, eopts);
      } catch (const NumericalError& e) {
        throw NumericalError("diverged at " + coords(epoch, b) + ": " + e.what());
      }
      if (config.grad_clip) clip_by_global_norm(res.gradients, *config.grad_clip);
      for (std::size_t k = 0; k < model.size(); ++k) {
        opt.step(k, model.site_data(k), res.gradients[k]);
      }
      if (config.normalize_after_update) normalize_uniformly(model);
      if (config.canonical_center) model = canonicalize(model, *config.canonical_center);
      for (std::size_t k = 0; k < model.size(); ++k) {
        if (!model.site(k).all_finite()) {
          throw NumericalError("diverged at " + coords(epoch, b) + ": non-finite site " + std::to_string(k));
        }
      }
    }
    if (end_epoch(tracker, epoch, model, start)) break;
  }
  return tracker.finish(std::move(model));
}

TrainResult train_sweeping(TensorTrain model, const EmbeddedDataset& train,
                           const EmbeddedDataset* validation, const LossSpec& loss,
                           const TrainConfig& config) {
  check_config(config, train);
  if (!config.max_bond) throw ConfigError("sweeping needs max_bond");
  if (model.size() < 2) throw ShapeError("sweeping needs at least two sites");
  Tracker tracker(config, train, validation, loss);
  Optimizer opt(config.optimizer);
  CounterRng rng(config.seed);
  EngineOptions eopts;
  eopts.threads = config.threads;
  const std::size_t n = model.size();

  model = canonicalize(model, 0);
  SvdOptions svd_opts;
  svd_opts.max_rank = config.max_bond;
  svd_opts.cutoff = config.svd_cutoff;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = Clock::now();
    const auto batches = make_batches(train.size(), config.batch_size, rng);
    std::size_t cursor = 0;
    for (int direction = 0; direction < 2; ++direction) {
      const bool rightward = direction == 0;
      for (std::size_t step = 0; step + 1 < n; ++step) {
        const std::size_t k = rightward ? step : n - 2 - step;
        const Tensor& a = model.site(k);
        const Tensor& b = model.site(k + 1);
        const auto sa = model.signature(k);
        const auto sb = model.signature(k + 1);

        std::vector<std::string> rows;
        if (k > 0) rows.push_back(bond_label(k - 1));
        rows.push_back(upper_label(k));
        std::vector<std::string> order = rows;
        order.push_back(upper_label(k + 1));
        if (sa.lower_dim) {
          rows.push_back(lower_label(k));
          order.push_back(lower_label(k));
        }
        if (sb.lower_dim) order.push_back(lower_label(k + 1));
        if (k + 2 < n) order.push_back(bond_label(k + 1));
        Tensor merged = contract(a, b).permuted(order);

        detail::ChainModel chain;
        chain.merge_at = k;
        const auto views = detail::view_model(model);
        for (std::size_t i = 0; i < n; ++i) {
          if (i == k) {
            detail::SiteView m;
            m.data = merged.data().data();
            m.l = std::max<std::size_t>(sa.left_bond, 1);
            m.p = *sa.upper_dim * *sb.upper_dim;
            m.o = sa.lower_dim.value_or(1) * sb.lower_dim.value_or(1);
            m.r = std::max<std::size_t>(sb.right_bond, 1);
            chain.sites.push_back(m);
          } else if (i != k + 1) {
            chain.sites.push_back(views[i]);
          }
        }

        const auto& batch = batches[cursor];
        cursor = (cursor + 1) % batches.size();
        detail::EngineResult res;
        try {
          res = detail::evaluate(chain, train, batch, loss, eopts);
        } catch (const NumericalError& e) {
          throw NumericalError("diverged at epoch " + std::to_string(epoch) + ", bond " +
                               std::to_string(k) + ": " + e.what());
        }
        std::span<std::vector<double>> block(&res.gradients[k], 1);
        if (config.grad_clip) clip_by_global_norm(block, *config.grad_clip);
        opt.step(k, merged.data(), res.gradients[k]);

        svd_opts.bond_label = bond_label(k);
        SvdResult split;
        try {
          split = svd(merged, rows, svd_opts);
        } catch (const Error& e) {
          throw NumericalError("SVD failed at epoch " + std::to_string(epoch) + ", bond " +
                               std::to_string(k) + ": " + e.what());
        }
        if (config.normalize_after_update) {
          double sq = 0.0;
          for (double s : split.s) sq += s * s;
          const double inv = 1.0 / std::sqrt(sq);
          for (double& s : split.s) s *= inv;
        }
        const std::size_t rank = split.s.size();
        if (rank > *config.max_bond) throw NumericalError("split exceeded max_bond");
        Tensor left = std::move(split.u);
        Tensor right = std::move(split.v);
        if (rightward) {
          const std::size_t cols = right.size() / rank;
          for (std::size_t r = 0; r < rank; ++r) {
            for (std::size_t c = 0; c < cols; ++c) right.data()[r * cols + c] *= split.s[r];
          }
        } else {
          for (std::size_t i = 0; i < left.size(); ++i) left.data()[i] *= split.s[i % rank];
        }
        model.set_sites(k, std::move(left), std::move(right));
        model.set_canonical_center(rightward ? k + 1 : k);
      }
    }
    if (end_epoch(tracker, epoch, model, start)) break;
  }
  return tracker.finish(std::move(model));
}

TrainResult train(TensorTrain model, const EmbeddedDataset& train_set, const EmbeddedDataset* validation,
                  const LossSpec& loss, const TrainConfig& config) {
  if (config.strategy == Strategy::sweeping) {
    return train_sweeping(std::move(model), train_set, validation, loss, config);
  }
  return train_gradient_descent(std::move(model), train_set, validation, loss, config);
}

Prediction predict(const TensorTrain& model, const EmbeddedDataset& data, std::size_t threads) {
  const std::size_t n = data.size();
  const bool has_output = model.lower_positions().size() <= 1;
  Prediction out;
  out.log_scores.resize(n);
  out.scores.resize(n);
  if (has_output) {
    out.outputs.resize(n);
    out.probabilities.resize(n);
    out.labels.resize(n);
  }
  detail::parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out.log_scores[i] = log_output_norm_sq(model, data.states[i]);
      out.scores[i] = std::exp(out.log_scores[i]);
      if (!has_output) continue;
      const Tensor y = model_output(model, data.states[i]);
      out.outputs[i].assign(y.data().begin(), y.data().end());
      out.probabilities[i] = softmax(out.outputs[i]);
      out.labels[i] = static_cast<std::size_t>(
          std::max_element(out.outputs[i].begin(), out.outputs[i].end()) - out.outputs[i].begin());
    }
  });
  return out;
}

}  // namespace tn4ml
