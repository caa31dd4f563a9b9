#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "oversmooth/graph.hpp"

namespace oversmooth {

using Label = int;

/// Cosine distances at or below this are treated as exactly zero, so rows
/// that are parallel up to rounding drop out of the MAD denominators.
inline constexpr double kZeroDistanceTolerance = 1e-12;

/// Symmetric boolean selector of node pairs. The diagonal is never selected.
class PairMask {
 public:
  PairMask() = default;
  explicit PairMask(std::size_t n) : n_(n), bits_(n * n, 0) {}

  /// Every off-diagonal pair.
  static PairMask all_pairs(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  bool operator()(NodeId i, NodeId j) const { return bits_[i * n_ + j] != 0; }
  /// Selects (i, j) and (j, i); ignored when i == j.
  void select(NodeId i, NodeId j);
  /// Number of selected ordered pairs.
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  /// Restriction to the pairs whose endpoints both lie in `nodes`, re-indexed
  /// so that nodes[k] becomes k.
  PairMask restricted_to(std::span<const NodeId> nodes) const;

 private:
  std::size_t n_ = 0;
  std::vector<unsigned char> bits_;
};

/// Hop-order cutoffs defining neighbouring and remote pairs.
struct MetricConfig {
  int neb_max_order = 3;
  int rmt_min_order = 8;
  bool include_unreachable_in_remote = true;

  /// Throws InvalidArgument unless 1 <= neb_max_order < rmt_min_order.
  void validate() const;
};

struct MadGapMasks {
  PairMask neighbour;
  PairMask remote;
};

struct MadGapTerms {
  double remote = 0.0;
  double neighbour = 0.0;
  double gap = 0.0;
};

struct InfoNoiseReport {
  /// Empty optional where a node has no contactable peer within order_k.
  std::vector<std::optional<double>> per_node;
  /// Pair-weighted ratio; empty when no pair is contactable.
  std::optional<double> global;
  int order_k = 0;
};

Matrix cosine_distance_matrix(const Matrix& h);

/// Mean average distance over the masked pairs. Pairs with zero distance do
/// not count toward either average. Throws EmptyTarget when no row has a
/// positive masked distance.
double mad(const Matrix& h, const PairMask& mask);
double mad_global(const Matrix& h);

/// Pairs with 1 <= order <= neb_max_order. With a subset, only pairs whose
/// endpoints are both in it are selected (indices stay global).
PairMask neighbour_mask(const HopOrderMatrix& orders, const MetricConfig& cfg,
                        std::optional<std::span<const NodeId>> subset = std::nullopt);
/// Pairs with order >= rmt_min_order, pairs beyond the BFS horizon, and
/// disconnected pairs when include_unreachable_in_remote is set.
PairMask remote_mask(const HopOrderMatrix& orders, const MetricConfig& cfg,
                     std::optional<std::span<const NodeId>> subset = std::nullopt);

MadGapMasks madgap_masks(const Graph& g, const MetricConfig& cfg,
                         std::optional<std::span<const NodeId>> subset = std::nullopt);

/// MAD over remote pairs minus MAD over neighbouring pairs. Throws
/// NoRemotePairs / NoNeighbourPairs when either side is empty.
MadGapTerms madgap_terms(const Matrix& h, const MadGapMasks& masks);
double madgap(const Matrix& h, const Graph& g, const MetricConfig& cfg,
              std::optional<std::span<const NodeId>> subset = std::nullopt);

/// Analytic d(MADGap)/dH with the per-row and per-matrix denominators held
/// at their current values. Throws UndefinedGap when either mask selects no
/// pair and ZeroNormRow when a selected pair touches a zero row.
Matrix madgap_gradient(const Matrix& h, const MadGapMasks& masks);
Matrix madgap_gradient(const Matrix& h, const Graph& g, const MetricConfig& cfg);

/// Fraction of same-label peers among nodes reachable in 1..k hops.
InfoNoiseReport info_to_noise_ratio(const Graph& g, std::span<const Label> labels, int k);
/// Variant reusing precomputed orders; requires orders.max_order() >= k.
InfoNoiseReport info_to_noise_ratio(const HopOrderMatrix& orders, std::span<const Label> labels,
                                    int k);

}  // namespace oversmooth
