#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tn4ml/error.hpp"
#include "tn4ml/evaluation.hpp"
#include "tn4ml/pipeline/config.hpp"
#include "tn4ml/pipeline/dataset.hpp"

namespace tn4ml {

/// A pipeline failure tagged with the stage it happened in
/// (config, data, model, train, eval, write).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Command-line level overrides, applied on top of the config file.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<bool> deterministic;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::filesystem::path> data_root;
  /// Read TN4ML_SEED from the environment (below an explicit seed).
  bool use_env_seed = true;
  std::ostream* log = nullptr;
};

PipelineConfig resolve(PipelineConfig cfg, const RunOptions& options);

struct PreparedData {
  EmbeddedDataset train, validation, test;
  /// Binary ground truth for ROC metrics on test (anomaly: 1 = normal class).
  std::vector<int> test_binary, validation_binary;
  std::size_t n_features = 0;
  std::vector<std::size_t> local_dims;
  std::optional<MinMaxScaler> scaler;
};

/// Loads, splits, scales and embeds the data of `cfg`. With `scaler` given,
/// it replaces the one fitted on the training split.
PreparedData prepare_data(const PipelineConfig& cfg, const std::optional<MinMaxScaler>& scaler = std::nullopt);

TensorTrain build_initial_model(const PipelineConfig& cfg, const PreparedData& data);

/// Metrics of a trained model on the validation and test splits, in the layout
/// of metrics.json.
nlohmann::json evaluate_model(const PipelineConfig& cfg, const TensorTrain& model, const PreparedData& data);

struct RunResult {
  std::filesystem::path dir;
  PipelineConfig config;
  TensorTrain model;
  TrainLog log;
  nlohmann::json metrics;
  double wall_seconds = 0.0;
};

/// Full pipeline. Writes into cfg.output_dir:
///   config.resolved.json, run_manifest.json, scaler.json (when scaling),
///   model_initial/, model_final/, train_log.{csv,json}, metrics.json,
///   eval/<split>/{roc.csv,metrics.json,scores.csv}.
RunResult run_pipeline(const PipelineConfig& cfg, const RunOptions& options = {});

/// Reload a run directory and recompute its metrics (same json layout).
nlohmann::json evaluate_run(const std::filesystem::path& run_dir,
                            const std::optional<std::filesystem::path>& data_root = std::nullopt,
                            std::size_t threads = 1);

struct SweepGrid {
  std::vector<std::size_t> bond;
  std::vector<std::size_t> spacing;
  std::vector<InitScheme> init;
};

SweepGrid parse_grid(const nlohmann::json& j);

struct SweepPoint {
  std::size_t bond = 0;
  std::optional<std::size_t> spacing;
  std::string init;
  /// metrics.json of each successful repeat.
  std::vector<nlohmann::json> runs;
  std::vector<std::string> failures;
  /// metric name -> mean/std over successful repeats (primary split).
  std::vector<std::pair<std::string, MeanStd>> summary;
};

/// Repeat r of every grid point uses seed derive_seed(base.seed, r) and runs in
/// <output_dir>/<point>_r<r>. Writes <output_dir>/summary.csv and runs.csv.
std::vector<SweepPoint> sweep_hyperparameters(const PipelineConfig& base, const SweepGrid& grid, std::size_t repeats,
                                              const RunOptions& options = {});

/// Summary of a run directory or a bare model directory.
nlohmann::json inspect(const std::filesystem::path& path);

}  // namespace tn4ml
