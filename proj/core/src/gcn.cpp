#include "oversmooth/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "oversmooth/error.hpp"

namespace oversmooth {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t class_count_of(std::span<const Label> labels) {
  Label max_label = -1;
  for (Label l : labels) max_label = std::max(max_label, l);
  return static_cast<std::size_t>(max_label + 1);
}

void check_labels(std::span<const Label> labels, std::size_t n, std::size_t classes) {
  if (labels.size() != n) throw Error(ErrorCode::DimensionMismatch, "labels length differs from node count");
  for (Label l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(l) + " outside the model's classes");
    }
  }
}

double metric_or_nan(auto&& compute) {
  try {
    return compute();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::EmptyTarget:
      case ErrorCode::NoRemotePairs:
      case ErrorCode::NoNeighbourPairs:
        return kNaN;
      default:
        throw;
    }
  }
}

Matrix gather_rows(const Matrix& m, std::span<const NodeId> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

// MADGap of the training rows and d/d(logits), or nullopt when the gap is
// undefined or not differentiable at this point.
struct RegularizerValue {
  double gap = 0.0;
  Matrix gradient;  // full n x C, zero outside the regularized rows
};

std::optional<RegularizerValue> regularizer_at(const Matrix& logits, const MadRegTerm& term) {
  const Matrix sub = gather_rows(logits, term.nodes);
  RegularizerValue v;
  try {
    v.gap = madgap_terms(sub, term.masks).gap;
    const Matrix sub_grad = madgap_gradient(sub, term.masks);
    v.gradient = Matrix::Zero(logits.rows(), logits.cols());
    for (std::size_t k = 0; k < term.nodes.size(); ++k) {
      v.gradient.row(static_cast<Eigen::Index>(term.nodes[k])) = sub_grad.row(static_cast<Eigen::Index>(k));
    }
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::NoRemotePairs:
      case ErrorCode::NoNeighbourPairs:
      case ErrorCode::ZeroNormRow:
        return std::nullopt;
      default:
        throw;
    }
  }
  return v;
}

}  // namespace

GcnModel GcnModel::initialize(const GcnArchitecture& arch, std::uint64_t seed) {
  if (arch.layers < 1) throw Error(ErrorCode::InvalidArgument, "GCN needs at least one layer");
  if (arch.input_dim == 0 || arch.class_count == 0 || (arch.layers > 1 && arch.hidden_dim == 0)) {
    throw Error(ErrorCode::InvalidArgument, "GCN dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  GcnModel model;
  for (int l = 0; l < arch.layers; ++l) {
    const auto fan_in = static_cast<Eigen::Index>(l == 0 ? arch.input_dim : arch.hidden_dim);
    const auto fan_out =
        static_cast<Eigen::Index>(l == arch.layers - 1 ? arch.class_count : arch.hidden_dim);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_in, fan_out);
    for (Eigen::Index r = 0; r < fan_in; ++r) {
      for (Eigen::Index c = 0; c < fan_out; ++c) w(r, c) = dist(rng);
    }
    model.weights.push_back(std::move(w));
  }
  return model;
}

std::size_t GcnModel::input_dim() const {
  return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().rows());
}

std::size_t GcnModel::class_count() const {
  return weights.empty() ? 0 : static_cast<std::size_t>(weights.back().cols());
}

void GcnModel::validate() const {
  if (weights.empty()) throw Error(ErrorCode::DimensionMismatch, "model has no layers");
  for (std::size_t l = 1; l < weights.size(); ++l) {
    if (weights[l - 1].cols() != weights[l].rows()) {
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l - 1) + " outputs " +
                                                    std::to_string(weights[l - 1].cols()) +
                                                    " columns but layer " + std::to_string(l) +
                                                    " expects " + std::to_string(weights[l].rows()));
    }
  }
}

Prediction predict_from_logits(Matrix logits) {
  Prediction p;
  const auto n = logits.rows();
  const auto c = logits.cols();
  p.probabilities.resize(n, c);
  p.label_hat.resize(static_cast<std::size_t>(n));
  p.confidence.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < c; ++k) {
      if (logits(i, k) > logits(i, best)) best = k;
    }
    const double top = logits(i, best);
    double total = 0.0;
    for (Eigen::Index k = 0; k < c; ++k) {
      p.probabilities(i, k) = std::exp(logits(i, k) - top);
      total += p.probabilities(i, k);
    }
    p.probabilities.row(i) /= total;
    p.label_hat[static_cast<std::size_t>(i)] = static_cast<Label>(best);
    p.confidence[static_cast<std::size_t>(i)] = p.probabilities(i, best);
  }
  p.logits = std::move(logits);
  return p;
}

ForwardPass gcn_forward(const GcnModel& model, const Matrix& a_hat, const Matrix& x) {
  model.validate();
  if (a_hat.rows() != a_hat.cols() || a_hat.rows() != x.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "propagation matrix and features disagree on node count");
  }
  if (x.cols() != model.weights.front().rows()) {
    throw Error(ErrorCode::DimensionMismatch, "features have " + std::to_string(x.cols()) +
                                                  " columns, model expects " +
                                                  std::to_string(model.weights.front().rows()));
  }
  ForwardPass fp;
  Matrix h = x;
  const int k = model.layer_count();
  for (int l = 0; l < k; ++l) {
    fp.propagated.push_back(a_hat * h);
    fp.pre_activation.push_back(fp.propagated.back() * model.weights[static_cast<std::size_t>(l)]);
    if (l + 1 < k) h = fp.pre_activation.back().cwiseMax(0.0);
  }
  fp.prediction = predict_from_logits(fp.pre_activation.back());
  return fp;
}

double cross_entropy(const Prediction& pred, std::span<const Label> labels,
                     std::span<const NodeId> nodes) {
  if (nodes.empty()) throw Error(ErrorCode::EmptyMask, "cross-entropy over an empty node set");
  double total = 0.0;
  for (NodeId i : nodes) {
    const auto row = static_cast<Eigen::Index>(i);
    const double top = pred.logits.row(row).maxCoeff();
    const double log_z = top + std::log((pred.logits.row(row).array() - top).exp().sum());
    total -= pred.logits(row, labels[i]) - log_z;
  }
  return total / static_cast<double>(nodes.size());
}

double accuracy(const Prediction& pred, std::span<const Label> labels,
                std::span<const NodeId> nodes) {
  if (nodes.empty()) return kNaN;
  std::size_t correct = 0;
  for (NodeId i : nodes) correct += pred.label_hat[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

MadRegTerm make_madreg_term(const Graph& g, std::span<const NodeId> train_nodes,
                            const MetricConfig& cfg) {
  MadRegTerm term;
  term.nodes.assign(train_nodes.begin(), train_nodes.end());
  const auto full = madgap_masks(g, cfg, train_nodes);
  term.masks.neighbour = full.neighbour.restricted_to(term.nodes);
  term.masks.remote = full.remote.restricted_to(term.nodes);
  if (term.masks.remote.empty() || term.masks.neighbour.empty()) {
    throw Error(ErrorCode::UndefinedGap,
                "training nodes contain no remote or no neighbouring pair for MADReg");
  }
  return term;
}

Objective evaluate_objective(const GcnModel& model, const Matrix& a_hat, const Matrix& x,
                             std::span<const Label> labels, std::span<const NodeId> train_nodes,
                             double lambda, double weight_decay, const MadRegTerm* madreg) {
  if (lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (lambda > 0.0 && madreg == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "lambda > 0 needs a MADReg term");
  }
  auto fp = gcn_forward(model, a_hat, x);
  check_labels(labels, static_cast<std::size_t>(x.rows()), model.class_count());

  Objective obj;
  obj.cross_entropy = cross_entropy(fp.prediction, labels, train_nodes);

  const auto& probs = fp.prediction.probabilities;
  Matrix d_out = Matrix::Zero(probs.rows(), probs.cols());
  const double inv_train = 1.0 / static_cast<double>(train_nodes.size());
  for (NodeId i : train_nodes) {
    const auto row = static_cast<Eigen::Index>(i);
    d_out.row(row) = probs.row(row) * inv_train;
    d_out(row, labels[i]) -= inv_train;
  }

  if (lambda > 0.0) {
    if (auto reg = regularizer_at(fp.prediction.logits, *madreg)) {
      obj.madgap = reg->gap;
      d_out -= lambda * reg->gradient;
    }
  }

  for (const auto& w : model.weights) obj.weight_penalty += 0.5 * weight_decay * w.squaredNorm();
  obj.total = obj.cross_entropy + obj.weight_penalty - (std::isnan(obj.madgap) ? 0.0 : lambda * obj.madgap);

  const int k = model.layer_count();
  obj.gradient.resize(static_cast<std::size_t>(k));
  Matrix d_pre = std::move(d_out);
  for (int l = k - 1; l >= 0; --l) {
    const auto ul = static_cast<std::size_t>(l);
    obj.gradient[ul] = fp.propagated[ul].transpose() * d_pre + weight_decay * model.weights[ul];
    if (l == 0) break;
    // A_hat is symmetric, so its transpose is itself.
    Matrix d_hidden = a_hat * (d_pre * model.weights[ul].transpose());
    d_pre = d_hidden.cwiseProduct((fp.pre_activation[ul - 1].array() > 0.0).cast<double>().matrix());
  }
  obj.prediction = std::move(fp.prediction);
  return obj;
}

TrainResult train(GcnModel model, const Graph& g, const Matrix& x, std::span<const Label> labels,
                  const Split& split, const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
  if (cfg.lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (cfg.max_epochs < 0) throw Error(ErrorCode::InvalidArgument, "max_epochs must be >= 0");
  model.validate();
  if (static_cast<std::size_t>(x.rows()) != g.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows differ from graph node count");
  }
  check_labels(labels, g.num_nodes(), model.class_count());
  if (split.train.empty()) throw Error(ErrorCode::EmptyMask, "training set is empty");
  cfg.metric_cfg.validate();

  TrainResult result;
  result.model = model;
  if (cfg.max_epochs == 0) return result;

  const Matrix a_hat = normalize_propagation(g);
  std::optional<MadRegTerm> madreg;
  if (cfg.lambda > 0.0) madreg = make_madreg_term(g, split.train, cfg.metric_cfg);
  std::optional<MadGapMasks> report_masks;
  if (cfg.record_metrics) report_masks = madgap_masks(g, cfg.metric_cfg);

  int since_best = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    auto obj = evaluate_objective(model, a_hat, x, labels, split.train, cfg.lambda,
                                  cfg.weight_decay, madreg ? &*madreg : nullptr);
    if (madreg && cfg.on_regularizer) cfg.on_regularizer();
    if (!std::isfinite(obj.total)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss became " + std::to_string(obj.total) +
                                                " at epoch " + std::to_string(epoch));
    }

    const auto& pred = obj.prediction;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = obj.total;
    rec.train_accuracy = accuracy(pred, labels, split.train);
    rec.val_accuracy = accuracy(pred, labels, split.valid);
    if (report_masks) {
      const auto& rep = pred.logits;
      rec.madgap = metric_or_nan([&] { return madgap_terms(rep, *report_masks).gap; });
      rec.mad_global = metric_or_nan([&] { return mad_global(rep); });
    }
    result.history.push_back(rec);

    const double val = std::isnan(rec.val_accuracy) ? rec.train_accuracy : rec.val_accuracy;
    // Ties move the checkpoint forward: later weights at equal validation
    // accuracy have seen more training signal.
    if (result.best_epoch < 0 || val >= result.best_val_accuracy) {
      result.best_epoch = epoch;
      result.best_val_accuracy = val;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }

    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      model.weights[l] -= cfg.learning_rate * obj.gradient[l];
    }
  }
  return result;
}

TrainResult train_from_scratch(const GcnArchitecture& arch, const Graph& g, const Matrix& x,
                               std::span<const Label> labels, const Split& split,
                               const TrainConfig& cfg) {
  return train(GcnModel::initialize(arch, cfg.seed), g, x, labels, split, cfg);
}

ModelEvaluation evaluate_model(const GcnModel& model, const Graph& g, const Matrix& x,
                               std::span<const Label> labels, const Split& split,
                               const MetricConfig& cfg) {
  const auto fp = gcn_forward(model, normalize_propagation(g), x);
  ModelEvaluation ev;
  ev.train_accuracy = accuracy(fp.prediction, labels, split.train);
  ev.val_accuracy = accuracy(fp.prediction, labels, split.valid);
  ev.test_accuracy = accuracy(fp.prediction, labels, split.test);
  const auto& rep = fp.representation();
  ev.mad_global = metric_or_nan([&] { return mad_global(rep); });
  ev.madgap = metric_or_nan([&] { return madgap(rep, g, cfg); });
  ev.prediction = fp.prediction;
  return ev;
}

std::vector<SweepRow> layer_sweep(const Graph& g, const Matrix& x, std::span<const Label> labels,
                                  const Split& split, std::span<const int> layer_range,
                                  const TrainConfig& cfg, std::size_t hidden_dim) {
  for (int layers : layer_range) {
    if (layers < 1 || layers > 6) throw Error(ErrorCode::InvalidArgument, "layer counts must lie in [1, 6]");
  }
  GcnArchitecture arch;
  arch.input_dim = static_cast<std::size_t>(x.cols());
  arch.hidden_dim = hidden_dim;
  arch.class_count = class_count_of(labels);

  TrainConfig quiet = cfg;
  quiet.record_metrics = false;
  std::vector<SweepRow> rows;
  for (int layers : layer_range) {
    arch.layers = layers;
    const auto trained = train_from_scratch(arch, g, x, labels, split, quiet);
    const auto ev = evaluate_model(trained.model, g, x, labels, split, cfg.metric_cfg);
    rows.push_back({layers, ev.test_accuracy, ev.val_accuracy, ev.mad_global, ev.madgap});
  }
  return rows;
}

}  // namespace oversmooth
