#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "oversmooth/dataset.hpp"
#include "oversmooth/graph.hpp"
#include "oversmooth/metrics.hpp"

namespace oversmooth {

struct GcnArchitecture {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 16;
  std::size_t class_count = 0;
  int layers = 2;
};

/// Dense GCN: H(l+1) = ReLU(A_hat H(l) W(l)) for hidden layers, and
/// logits = A_hat H(k-1) W(k-1) on the last layer.
struct GcnModel {
  std::vector<Matrix> weights;

  /// Glorot uniform: each weight drawn from U(-b, b) with
  /// b = sqrt(6 / (fan_in + fan_out)), row-major per layer from mt19937_64(seed).
  static GcnModel initialize(const GcnArchitecture& arch, std::uint64_t seed);

  int layer_count() const noexcept { return static_cast<int>(weights.size()); }
  std::size_t input_dim() const;
  std::size_t class_count() const;
  /// Throws DimensionMismatch when adjacent layers do not chain.
  void validate() const;
};

struct Prediction {
  std::vector<Label> label_hat;
  std::vector<double> confidence;
  Matrix logits;
  Matrix probabilities;
};

struct ForwardPass {
  /// A_hat * H(l) for every layer l, the input to W(l).
  std::vector<Matrix> propagated;
  /// A_hat * H(l) * W(l) before the activation.
  std::vector<Matrix> pre_activation;
  Prediction prediction;

  /// Output of the final layer; the representation MAD and MADGap read.
  const Matrix& representation() const { return prediction.logits; }
};

ForwardPass gcn_forward(const GcnModel& model, const Matrix& a_hat, const Matrix& x);

/// Row-wise softmax with argmax ties resolved to the lowest class.
Prediction predict_from_logits(Matrix logits);

/// Mean negative log-probability of the gold class over `nodes`. Throws
/// EmptyMask when `nodes` is empty.
double cross_entropy(const Prediction& pred, std::span<const Label> labels,
                     std::span<const NodeId> nodes);

double accuracy(const Prediction& pred, std::span<const Label> labels,
                std::span<const NodeId> nodes);

/// MADGap restricted to pairs of training nodes, re-indexed onto them.
struct MadRegTerm {
  std::vector<NodeId> nodes;
  MadGapMasks masks;
};

/// Throws UndefinedGap when the training nodes contain no remote or no
/// neighbouring pair.
MadRegTerm make_madreg_term(const Graph& g, std::span<const NodeId> train_nodes,
                            const MetricConfig& cfg);

struct Objective {
  double cross_entropy = 0.0;
  /// NaN when no regularizer was requested or the gap is undefined at the
  /// current point (the term then contributes nothing).
  double madgap = std::numeric_limits<double>::quiet_NaN();
  double weight_penalty = 0.0;
  double total = 0.0;
  std::vector<Matrix> gradient;
  /// Prediction of the evaluated weights.
  Prediction prediction;
};

/// total = CE(train) - lambda * MADGap(train) + weight_decay / 2 * sum ||W||^2,
/// with its exact gradient for every weight matrix. `madreg` may be null
/// when lambda == 0.
Objective evaluate_objective(const GcnModel& model, const Matrix& a_hat, const Matrix& x,
                             std::span<const Label> labels, std::span<const NodeId> train_nodes,
                             double lambda, double weight_decay, const MadRegTerm* madreg);

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int max_epochs = 200;
  int patience = 30;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  MetricConfig metric_cfg;
  /// Compute MADGap and MAD_global of every epoch for the history.
  bool record_metrics = true;
  /// Called once per MADGap-regularizer evaluation.
  std::function<void()> on_regularizer;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double madgap = std::numeric_limits<double>::quiet_NaN();
  double mad_global = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  GcnModel model;
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_val_accuracy = std::numeric_limits<double>::quiet_NaN();
};

/// Full-batch gradient descent on the objective above. Epoch e evaluates
/// the current weights, records them, then takes one step; the returned
/// model is the last weights reaching the best validation accuracy.
/// Stops after `patience` epochs below the best.
TrainResult train(GcnModel model, const Graph& g, const Matrix& x, std::span<const Label> labels,
                  const Split& split, const TrainConfig& cfg);

/// Fresh Glorot model seeded by cfg.seed, then `train`.
TrainResult train_from_scratch(const GcnArchitecture& arch, const Graph& g, const Matrix& x,
                               std::span<const Label> labels, const Split& split,
                               const TrainConfig& cfg);

struct ModelEvaluation {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  /// NaN when undefined for the representation.
  double mad_global = std::numeric_limits<double>::quiet_NaN();
  double madgap = std::numeric_limits<double>::quiet_NaN();
  Prediction prediction;
};

/// Accuracies on every split plus MAD_global and MADGap over all nodes of g.
ModelEvaluation evaluate_model(const GcnModel& model, const Graph& g, const Matrix& x,
                               std::span<const Label> labels, const Split& split,
                               const MetricConfig& cfg);

struct SweepRow {
  int layers = 0;
  double accuracy = 0.0;  // test
  double val_accuracy = 0.0;
  double mad_global = std::numeric_limits<double>::quiet_NaN();
  double madgap = std::numeric_limits<double>::quiet_NaN();
};

/// Trains one model per depth in `layer_range` (each within [1, 6]) with the
/// same seed and reports the best-validation model of each.
std::vector<SweepRow> layer_sweep(const Graph& g, const Matrix& x, std::span<const Label> labels,
                                  const Split& split, std::span<const int> layer_range,
                                  const TrainConfig& cfg, std::size_t hidden_dim = 16);

}  // namespace oversmooth
