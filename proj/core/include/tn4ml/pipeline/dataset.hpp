#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tn4ml {

/// Row-per-sample feature matrix. Images keep their height/width so they can
/// be downsampled and flattened later; tabular data leaves both at 0.
struct Dataset {
  std::vector<std::vector<double>> samples;
  std::vector<std::size_t> labels;  // empty when unlabeled
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;  // label_names[i] is the raw value mapped to i
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return samples.size(); }
  std::size_t n_features() const { return samples.empty() ? feature_names.size() : samples.front().size(); }
  bool has_labels() const { return !labels.empty(); }
};

/// RFC-4180 CSV with a header row. Every column other than `label_column` and
/// `drop_columns` must be numeric. Labels map to 0, 1, ... by first appearance.
Dataset load_csv(const std::filesystem::path& path, std::optional<std::string> label_column,
                 std::span<const std::string> drop_columns = {});

/// MNIST IDX pair. Pixels are scaled by 1/255.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

Dataset subset(const Dataset& d, std::span<const std::size_t> rows);

/// Per-feature min/max fitted on one split and applied to any other.
/// Constant features map to 0; values outside the fitted range are clamped.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Dataset& train);

  Dataset transform(Dataset d) const;
  std::vector<double> transform(std::span<const double> row) const;

  const std::vector<double>& mins() const { return min_; }
  const std::vector<double>& maxs() const { return max_; }

  nlohmann::json to_json() const;
  static MinMaxScaler from_json(const nlohmann::json& j);

 private:
  std::vector<double> min_, max_;
};

/// Non-overlapping block mean of an h x w row-major image.
std::vector<double> downsample(std::span<const double> image, std::size_t height, std::size_t width,
                               std::size_t target_height, std::size_t target_width);
Dataset downsample(const Dataset& images, std::size_t target_height, std::size_t target_width);

}  // namespace tn4ml
