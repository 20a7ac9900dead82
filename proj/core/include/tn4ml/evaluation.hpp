#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tn4ml {

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

struct RocPoint {
  double threshold = std::numeric_limits<double>::infinity();
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Knots by descending threshold, starting at (+inf, 0, 0) and ending at
/// (min score, 1, 1). Tied scores share one knot.
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// labels: 1 positive, 0 negative. With positive_means_high = false the
/// score is negated first. The stored thresholds are the oriented scores.
RocCurve roc(std::span<const double> scores, std::span<const int> labels, bool positive_means_high = true);

double auc(const RocCurve& curve);
/// Linear interpolation of TPR at the given FPR.
double tpr_at_fpr(const RocCurve& curve, double fpr_target);
/// Smallest linearly interpolated FPR whose TPR reaches the target.
double fpr_at_tpr(const RocCurve& curve, double tpr_target);

struct MetricsSummary {
  double auc = 0.0;
  double tpr_at_fpr_01 = 0.0;
  double tpr_at_fpr_10 = 0.0;
  double fpr_at_tpr_95 = 0.0;
  std::optional<double> accuracy;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

MetricsSummary summarize(const RocCurve& curve, std::optional<double> accuracy, std::uint64_t seed);

nlohmann::json to_json(const MetricsSummary& m);
MetricsSummary metrics_from_json(const nlohmann::json& j);

/// threshold,fpr,tpr with %.17g; header only for an empty curve.
std::string roc_to_csv(const RocCurve& curve);

/// Writes <dir>/roc.csv and <dir>/metrics.json.
void export_metrics(const std::filesystem::path& dir, const RocCurve& curve, const MetricsSummary& metrics);
MetricsSummary import_metrics(const std::filesystem::path& dir);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 below two values
  std::size_t n = 0;
};

MeanStd mean_std(std::span<const double> values);

}  // namespace tn4ml
