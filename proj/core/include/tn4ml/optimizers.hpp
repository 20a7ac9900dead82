#pragma once

#include <cstddef>
#include <span>
#include <vector>
#include <variant>

namespace tn4ml {

struct SgdConfig {
  double lr = 0.01;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

using OptimizerConfig = std::variant<SgdConfig, AdamConfig>;

double learning_rate(const OptimizerConfig& config);

/// First-order optimizer with independent state per parameter slot (a site,
/// or a bond position when sweeping). A slot whose size changes starts over.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  void step(std::size_t slot, std::span<double> param, std::span<const double> grad);
  void reset() { slots_.clear(); }

  const OptimizerConfig& config() const { return config_; }

 private:
  struct Slot {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;
  };

  OptimizerConfig config_;
  std::vector<Slot> slots_;
};

/// Scale all gradients so their joint Euclidean norm is at most max_norm.
/// Returns the norm before clipping.
double clip_by_global_norm(std::span<std::vector<double>> grads, double max_norm);

}  // namespace tn4ml
