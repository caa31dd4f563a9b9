#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oversmooth/dataset.hpp"
#include "oversmooth/gcn.hpp"
#include "oversmooth/graph.hpp"

namespace oversmooth {

enum class EditOrder { AddFirst, RemoveFirst };

/// How add_edges enumerates candidate pairs.
enum class CandidateMode {
  /// Every pair (i, j), i < j, in ascending order.
  Exhaustive,
  /// `sampled_candidates` uniformly drawn pairs, for graphs too large to scan.
  Sampled,
};

struct DegreeBounds {
  std::size_t min = 0;
  std::size_t max = static_cast<std::size_t>(-1);
};

struct AdaEdgeConfig {
  EditOrder order = EditOrder::AddFirst;
  std::size_t num_add = 0;
  std::size_t num_remove = 0;
  double conf_add = 1.0;
  double conf_remove = 1.0;
  int max_rounds = 1;
  /// Eligible edits are skipped with this probability.
  double skip_prob = 0.0;
  /// Both endpoints must have a degree (in the graph being edited) inside
  /// the bounds.
  std::optional<DegreeBounds> degree_bounds;
  /// Both endpoints must be predicted as a class whose validation precision
  /// reaches this value. Disabled when empty.
  std::optional<double> min_class_precision;
  CandidateMode candidate_mode = CandidateMode::Exhaustive;
  std::size_t sampled_candidates = 0;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when a threshold leaves [0, 1] or max_rounds < 1.
  void validate() const;
};

struct RoundEdits {
  std::size_t added = 0;
  std::size_t removed = 0;
};

struct EditLog {
  std::vector<Edge> added;
  std::vector<Edge> removed;
  std::vector<RoundEdits> rounds;
  /// Parallel to added / removed once annotate_with_labels has run.
  std::vector<bool> added_intra_class;
  std::vector<bool> removed_intra_class;

  void append(const EditLog& other);
  /// Fills the intra-class flags from gold labels.
  void annotate_with_labels(std::span<const Label> labels);
  std::string to_json() const;
};

struct EditResult {
  Graph graph;
  EditLog log;
};

/// Per-class precision of `pred` on `nodes`; classes never predicted there
/// get 0.
std::vector<double> class_precision(const Prediction& pred, std::span<const Label> labels,
                                    std::span<const NodeId> nodes, std::size_t class_count);

/// Adds absent edges between nodes with equal predicted labels whose
/// confidences both reach conf_add, at most num_add of them. `precision` is
/// only read when cfg.min_class_precision is set.
EditResult add_edges(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
                     std::span<const double> precision = {});

/// Removes edges, in ascending order, between nodes with different predicted
/// labels whose confidences both reach conf_remove, at most num_remove.
EditResult remove_edges(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
                        std::span<const double> precision = {});

/// add_edges then remove_edges on its output, or the reverse for
/// RemoveFirst. The log holds one round.
EditResult adjust_graph(const Graph& g, const Prediction& pred, const AdaEdgeConfig& cfg,
                        std::span<const double> precision = {});

struct AdaEdgeRound {
  int round = 0;
  std::uint64_t seed = 0;
  std::size_t edges = 0;  // edges of the graph trained on
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
  double mad_global = 0.0;
  double madgap = 0.0;
  RoundEdits edits;  // edits derived from this round's predictions
};

struct AdaEdgeResult {
  /// The graph the returned model was trained on.
  Graph graph;
  /// That graph after adjustment by the returned model's predictions.
  Graph adjusted;
  GcnModel model;
  int best_round = 0;
  std::vector<AdaEdgeRound> history;
  /// Edits of every completed round, including the returned one.
  EditLog log;
};

/// Seed used for the retraining in `round` >= 1. Round 0 trains with
/// train_cfg.seed.
std::uint64_t adaedge_round_seed(std::uint64_t seed, int round);

/// Train, adjust, retrain from scratch on the adjusted graph, and repeat
/// while validation accuracy strictly improves, for at most max_rounds
/// trainings. Returns the last improving round.
AdaEdgeResult adaedge(const Graph& g0, const Matrix& x, std::span<const Label> labels,
                      const Split& split, const GcnArchitecture& arch,
                      const TrainConfig& train_cfg, const AdaEdgeConfig& cfg);

/// Gold-label topology edit on g: removes round(remove_rate * inter-class
/// edges) chosen uniformly, and adds round(add_ratio * |E|) uniformly chosen
/// absent intra-class pairs (or all of them when fewer exist).
EditResult gold_label_adjust(const Graph& g, std::span<const Label> labels, double remove_rate,
                             double add_ratio, std::uint64_t seed);

}  // namespace oversmooth
