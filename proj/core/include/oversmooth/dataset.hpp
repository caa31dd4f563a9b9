#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "oversmooth/graph.hpp"
#include "oversmooth/metrics.hpp"

namespace oversmooth {

struct Dataset {
  Graph graph;
  Matrix features;
  std::vector<Label> labels;
  int class_count = 0;

  /// Throws DimensionMismatch / InvalidArgument when rows, labels and the
  /// node count disagree or a label falls outside [0, class_count).
  void validate() const;
};

/// Disjoint node sets, each sorted ascending.
struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> valid;
  std::vector<NodeId> test;

  friend bool operator==(const Split&, const Split&) = default;
};

struct SplitSizes {
  std::size_t train_per_class = 20;
  std::size_t valid_per_class = 30;
};

/// Per class: seeded sample of train_per_class training nodes, then
/// valid_per_class validation nodes; the rest are test nodes. Throws
/// ClassTooSmall when a class cannot supply both samples.
Split split_dataset(std::span<const Label> labels, std::uint64_t seed, SplitSizes sizes = {});

struct SbmConfig {
  std::vector<std::size_t> block_sizes;
  double p_intra = 0.0;
  double p_inter = 0.0;
  std::size_t feature_dim = 0;
  /// Magnitude of the one-hot class mean on feature (class % feature_dim).
  double feature_signal = 1.0;
  double noise_std = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset generate_sbm(const SbmConfig& cfg);

/// Whitespace-separated 0-based pairs, one per line. `#` starts a comment.
/// A `%n <count>` line fixes the node count; otherwise it is max id + 1.
Graph load_edge_list(const std::filesystem::path& path);
/// CSV, one row per node, `.` decimal separator.
Matrix load_features(const std::filesystem::path& path);
/// One integer class id per line.
std::vector<Label> load_labels(const std::filesystem::path& path);

/// Writes a `%n` header followed by edges in ascending order.
void save_edge_list(const Graph& g, const std::filesystem::path& path);
void save_features(const Matrix& x, const std::filesystem::path& path);
void save_labels(std::span<const Label> labels, const std::filesystem::path& path);

/// Loads and validates a dataset; class_count is max label + 1.
Dataset load_dataset(const std::filesystem::path& edges, const std::filesystem::path& features,
                     const std::filesystem::path& labels);

}  // namespace oversmooth
