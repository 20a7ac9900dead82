#include "tn4ml/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tn4ml/error.hpp"

namespace tn4ml {

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("accuracy: length mismatch");
  if (predicted.empty()) throw ShapeError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

RocCurve roc(std::span<const double> scores, std::span<const int> labels, bool positive_means_high) {
  if (scores.size() != labels.size()) throw ShapeError("roc: scores and labels differ in length");
  RocCurve curve;
  std::vector<double> s(scores.begin(), scores.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (std::isnan(s[i])) throw NumericalError("roc: NaN score");
    if (!positive_means_high) s[i] = -s[i];
    if (labels[i] == 1) {
      ++curve.n_pos;
    } else if (labels[i] == 0) {
      ++curve.n_neg;
    } else {
      throw RangeError("roc: labels must be 0 or 1");
    }
  }
  if (curve.n_pos == 0 || curve.n_neg == 0) throw RangeError("roc needs both classes");
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  curve.points.push_back(RocPoint{});
  std::size_t tp = 0, fp = 0;
  const double np = static_cast<double>(curve.n_pos);
  const double nn = static_cast<double>(curve.n_neg);
  for (std::size_t i = 0; i < order.size();) {
    const double t = s[order[i]];
    while (i < order.size() && s[order[i]] == t) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back(RocPoint{t, static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

double tpr_at_fpr(const RocCurve& curve, double target) {
  const auto& p = curve.points;
  if (p.empty()) throw ShapeError("empty ROC curve");
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i].fpr > target) {
      const auto& a = p[i - 1];
      const auto& b = p[i];
      return a.tpr + (target - a.fpr) / (b.fpr - a.fpr) * (b.tpr - a.tpr);
    }
  }
  return p.back().tpr;
}

double fpr_at_tpr(const RocCurve& curve, double target) {
  const auto& p = curve.points;
  if (p.empty()) throw ShapeError("empty ROC curve");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].tpr >= target) {
      if (i == 0) return p[0].fpr;
      const auto& a = p[i - 1];
      const auto& b = p[i];
      return a.fpr + (target - a.tpr) / (b.tpr - a.tpr) * (b.fpr - a.fpr);
    }
  }
  return p.back().fpr;
}

MetricsSummary summarize(const RocCurve& curve, std::optional<double> acc, std::uint64_t seed) {
  MetricsSummary m;
  m.auc = auc(curve);
  m.tpr_at_fpr_01 = tpr_at_fpr(curve, 0.01);
  m.tpr_at_fpr_10 = tpr_at_fpr(curve, 0.10);
  m.fpr_at_tpr_95 = fpr_at_tpr(curve, 0.95);
  m.accuracy = acc;
  m.n_pos = curve.n_pos;
  m.n_neg = curve.n_neg;
  m.seed = seed;
  return m;
}

nlohmann::json to_json(const MetricsSummary& m) {
  nlohmann::json j;
  j["auc"] = m.auc;
  j["tpr_at_fpr_01"] = m.tpr_at_fpr_01;
  j["tpr_at_fpr_10"] = m.tpr_at_fpr_10;
  j["fpr_at_tpr_95"] = m.fpr_at_tpr_95;
  if (m.accuracy) j["accuracy"] = *m.accuracy;
  j["n_pos"] = m.n_pos;
  j["n_neg"] = m.n_neg;
  j["seed"] = m.seed;
  return j;
}

MetricsSummary metrics_from_json(const nlohmann::json& j) {
  try {
    MetricsSummary m;
    m.auc = j.at("auc").get<double>();
    m.tpr_at_fpr_01 = j.at("tpr_at_fpr_01").get<double>();
    m.tpr_at_fpr_10 = j.at("tpr_at_fpr_10").get<double>();
    m.fpr_at_tpr_95 = j.at("fpr_at_tpr_95").get<double>();
    if (j.contains("accuracy")) m.accuracy = j.at("accuracy").get<double>();
    m.n_pos = j.at("n_pos").get<std::size_t>();
    m.n_neg = j.at("n_neg").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics json: ") + e.what());
  }
}

std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "threshold,fpr,tpr\n";
  char buf[96];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
    out << buf;
  }
  return out.str();
}

void export_metrics(const std::filesystem::path& dir, const RocCurve& curve, const MetricsSummary& metrics) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "roc.csv", std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / "roc.csv").string());
    f << roc_to_csv(curve);
    if (!f) throw Error("write failed: " + (dir / "roc.csv").string());
  }
  std::ofstream f(dir / "metrics.json", std::ios::binary);
  if (!f) throw Error("cannot write " + (dir / "metrics.json").string());
  f << to_json(metrics).dump(2) << '\n';
  if (!f) throw Error("write failed: " + (dir / "metrics.json").string());
}

MetricsSummary import_metrics(const std::filesystem::path& dir) {
  std::ifstream f(dir / "metrics.json", std::ios::binary);
  if (!f) throw Error("cannot read " + (dir / "metrics.json").string());
  try {
    return metrics_from_json(nlohmann::json::parse(f));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("metrics json: ") + e.what());
  }
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  return out;
}

}  // namespace tn4ml
