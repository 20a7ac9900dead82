#include "tn4ml/optimizers.hpp"

#include <cmath>

#include "tn4ml/error.hpp"

namespace tn4ml {

double learning_rate(const OptimizerConfig& config) {
  return std::visit([](const auto& c) { return c.lr; }, config);
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
  const double lr = learning_rate(config_);
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw RangeError("learning rate must be finite and >= 0");
  if (const auto* a = std::get_if<AdamConfig>(&config_)) {
    if (!(a->beta1 >= 0.0 && a->beta1 < 1.0) || !(a->beta2 >= 0.0 && a->beta2 < 1.0)) {
      throw RangeError("adam betas must lie in [0, 1)");
    }
    if (!(a->eps > 0.0)) throw RangeError("adam eps must be > 0");
  }
}

void Optimizer::step(std::size_t slot, std::span<double> param, std::span<const double> grad) {
  if (param.size() != grad.size()) throw ShapeError("parameter and gradient sizes differ");
  if (const auto* sgd = std::get_if<SgdConfig>(&config_)) {
    if (sgd->lr == 0.0) return;
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= sgd->lr * grad[i];
    return;
  }
  const auto& a = std::get<AdamConfig>(config_);
  if (slot >= slots_.size()) slots_.resize(slot + 1);
  Slot& s = slots_[slot];
  if (s.m.size() != param.size()) {
    s.m.assign(param.size(), 0.0);
    s.v.assign(param.size(), 0.0);
    s.t = 0;
  }
  ++s.t;
  if (a.lr == 0.0) return;
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    s.m[i] = a.beta1 * s.m[i] + (1.0 - a.beta1) * grad[i];
    s.v[i] = a.beta2 * s.v[i] + (1.0 - a.beta2) * grad[i] * grad[i];
    const double mhat = s.m[i] / c1;
    const double vhat = s.v[i] / c2;
    param[i] -= a.lr * mhat / (std::sqrt(vhat) + a.eps);
  }
}

double clip_by_global_norm(std::span<std::vector<double>> grads, double max_norm) {
  if (!(max_norm > 0.0)) throw RangeError("clip norm must be > 0");
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double f = max_norm / norm;
    for (auto& g : grads) {
      for (double& x : g) x *= f;
    }
  }
  return norm;
}

}  // namespace tn4ml
