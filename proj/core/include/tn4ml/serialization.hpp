#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "tn4ml/tensor_train.hpp"

namespace tn4ml {

inline constexpr int kModelFormatVersion = 1;

/// Writes `dir/manifest.json` and `dir/weights.bin` (each site's row-major
/// float64 data, little-endian, in site order). Creates `dir` if needed.
void save_model(const TensorTrain& tt, const std::filesystem::path& dir);
TensorTrain load_model(const std::filesystem::path& dir);

nlohmann::json model_manifest(const TensorTrain& tt);

}  // namespace tn4ml
