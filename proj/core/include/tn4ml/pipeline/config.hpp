#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tn4ml/embeddings.hpp"
#include "tn4ml/initializers.hpp"
#include "tn4ml/objectives.hpp"
#include "tn4ml/tensor_train.hpp"
#include "tn4ml/training.hpp"

namespace tn4ml {

enum class Task { classify, anomaly };

struct DataConfig {
  std::string format = "csv";        // csv | idx
  std::filesystem::path root = ".";  // base for every relative path below

  // csv
  std::string path;
  std::optional<std::string> label_column;
  std::vector<std::string> drop_columns;

  // idx
  std::string train_images, train_labels, test_images, test_labels;
  std::optional<std::size_t> normal_class;
  std::optional<std::pair<std::size_t, std::size_t>> downsample;
  FlattenOrder flatten = FlattenOrder::row_major;

  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  /// Test samples; for csv the default is every sample left after train and
  /// validation, for idx the whole test file.
  std::optional<std::size_t> test_size;
  bool minmax = true;
  /// Seed of the split shuffle; derived from the run seed when absent.
  std::optional<std::uint64_t> split_seed;
};

struct ModelConfig {
  NetworkKind kind = NetworkKind::mps;
  std::size_t max_bond = 10;
  std::optional<SpacingSpec> spacing;
  std::size_t lower_dim = 2;
  std::optional<std::size_t> output_dim;
  /// Defaults to n_sites / 2.
  std::optional<std::size_t> output_site;
};

struct EvalConfig {
  std::vector<double> fpr_targets{0.01, 0.10};
  std::vector<double> tpr_targets{0.95};
  bool positive_means_high = true;
};

struct PipelineConfig {
  std::string name = "run";
  Task task = Task::classify;
  std::uint64_t seed = 0;
  DataConfig data;
  /// One map broadcast to every feature, or one per feature.
  std::vector<LocalMapSpec> embedding{TrigonometricMap{1}};
  ModelConfig model;
  InitScheme init = GramSchmidtInit{};
  LossSpec loss;
  TrainConfig train;
  EvalConfig eval;
  std::filesystem::path output_dir = "runs/run";
};

/// Unknown keys and ill-typed values throw ConfigError naming the JSON path.
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
/// Every field spelled out, so the snapshot parses back to the same config.
nlohmann::json to_json(const PipelineConfig& cfg);

/// Cross-field rules that need the feature count (known after loading).
void validate(const PipelineConfig& cfg, std::size_t n_features);

std::string_view to_string(Task t);

}  // namespace tn4ml
