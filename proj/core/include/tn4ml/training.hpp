#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tn4ml/objectives.hpp"
#include "tn4ml/optimizers.hpp"
#include "tn4ml/tensor_train.hpp"

namespace tn4ml {

enum class Strategy { gradient_descent, sweeping };
enum class Monitor { train, validation };

struct EarlyStopping {
  std::size_t patience = 5;
  double min_delta = 0.0;
  Monitor monitor = Monitor::validation;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> val_loss;
  double epoch_seconds = 0.0;
  double throughput = 0.0;  // training samples per second
  std::vector<std::size_t> bond_dims;
  std::size_t max_bond = 0;
};

struct TrainConfig {
  Strategy strategy = Strategy::gradient_descent;
  OptimizerConfig optimizer = AdamConfig{};
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  /// Rescale every site by the same factor so the model norm is 1.
  bool normalize_after_update = false;
  /// Re-canonicalize at this site after each gradient-descent update.
  std::optional<std::size_t> canonical_center;
  std::optional<std::size_t> max_bond;
  double svd_cutoff = 0.0;
  std::optional<EarlyStopping> early_stopping;
  std::optional<double> grad_clip;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool deterministic = true;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch;
  bool stopped_early = false;

  /// epoch,train_loss,val_loss,epoch_seconds,throughput
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

struct TrainResult {
  TensorTrain model;
  TrainLog log;
};

TrainResult train_gradient_descent(TensorTrain model, const EmbeddedDataset& train,
                                   const EmbeddedDataset* validation, const LossSpec& loss,
                                   const TrainConfig& config);

/// One epoch is a left-to-right then right-to-left pass over all bonds.
TrainResult train_sweeping(TensorTrain model, const EmbeddedDataset& train,
                           const EmbeddedDataset* validation, const LossSpec& loss,
                           const TrainConfig& config);

TrainResult train(TensorTrain model, const EmbeddedDataset& train, const EmbeddedDataset* validation,
                  const LossSpec& loss, const TrainConfig& config);

struct Prediction {
  /// Model output per sample; empty for models with several output legs.
  std::vector<std::vector<double>> outputs;
  std::vector<std::vector<double>> probabilities;
  std::vector<std::size_t> labels;
  /// log D(x) with D(x) = ||P Phi(x)||^2, and D itself (may overflow to inf).
  std::vector<double> log_scores;
  std::vector<double> scores;
};

Prediction predict(const TensorTrain& model, const EmbeddedDataset& data, std::size_t threads = 1);

}  // namespace tn4ml
