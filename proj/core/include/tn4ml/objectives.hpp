#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tn4ml/state.hpp"
#include "tn4ml/tensor.hpp"
#include "tn4ml/tensor_train.hpp"

namespace tn4ml {

enum class LossKind { log_quad_norm, neg_log_likelihood, cross_entropy_softmax, mean_squared_error };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

/// shifted: (log q - 1)^2. centered: (log q)^2, i.e. a unit-norm target.
enum class LogQuadVariant { shifted, centered };

enum class RegularizerKind { log_norm, relu_log_norm };

struct Regularizer {
  RegularizerKind kind = RegularizerKind::log_norm;
  double weight = 0.0;
};

enum class Reduction { mean, sum };

struct LossSpec {
  LossKind primary = LossKind::log_quad_norm;
  std::vector<Regularizer> regularizers;
  LogQuadVariant logquad_variant = LogQuadVariant::shifted;
  Reduction reduction = Reduction::mean;
};

/// Embedded samples with optional class labels (cross entropy, and MSE
/// one-hot targets when `targets` is empty) or dense targets (MSE).
struct EmbeddedDataset {
  std::vector<EmbeddedState> states;
  std::vector<std::size_t> labels;
  std::vector<std::vector<double>> targets;

  std::size_t size() const { return states.size(); }
};

struct LossReport {
  double value = 0.0;
  /// Primary loss of each sample, before the batch reduction.
  std::vector<double> per_sample_values;
  /// d value / d site, one per model site; empty when not requested.
  std::vector<Tensor> gradients;
  /// Weighted sum of the regularizer terms included in `value`.
  double regularizer_value = 0.0;
};

struct EngineOptions {
  std::size_t threads = 1;
  bool want_gradients = true;
};

/// W Phi(x): rank-0 when the model has no output leg, rank-1 over the output
/// label when it has one. More than one open leg is a ShapeError.
Tensor model_output(const TensorTrain& model, const EmbeddedState& state);

/// log ||P Phi(x)||^2 for any model kind, computed with per-site rescaling.
double log_output_norm_sq(const TensorTrain& model, const EmbeddedState& state);

/// Loss and analytic gradients on the samples `batch` (indices into `data`).
LossReport gradient_engine(const TensorTrain& model, const EmbeddedDataset& data,
                           std::span<const std::size_t> batch, const LossSpec& loss,
                           const EngineOptions& options = {});
/// Same over the whole dataset.
LossReport gradient_engine(const TensorTrain& model, const EmbeddedDataset& data, const LossSpec& loss,
                           const EngineOptions& options = {});

LossReport loss_log_quad_norm(const TensorTrain& model, std::span<const EmbeddedState> batch,
                              LogQuadVariant variant = LogQuadVariant::shifted);
LossReport loss_nll(const TensorTrain& model, std::span<const EmbeddedState> batch);
LossReport loss_cross_entropy_softmax(const TensorTrain& model, std::span<const EmbeddedState> batch,
                                      std::span<const std::size_t> labels,
                                      Reduction reduction = Reduction::mean);
LossReport loss_mse(const TensorTrain& model, std::span<const EmbeddedState> batch,
                    std::span<const std::vector<double>> targets);

/// log ||P||_F^2 (plain) or max(0, log ||P||_F^2) (relu).
double reg_log_norm(const TensorTrain& model, RegularizerKind kind);

/// Central differences of the batch loss value, entry by entry.
std::vector<Tensor> finite_difference_gradient(const TensorTrain& model, const EmbeddedDataset& data,
                                               std::span<const std::size_t> batch,
                                               const LossSpec& loss, double h = 1e-5);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace tn4ml
