#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oversmooth {

using NodeId = std::size_t;
using Matrix = Eigen::MatrixXd;

/// Unordered node pair, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected, unweighted simple graph. Self-loops are never stored.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);
  /// Duplicate and reversed pairs collapse to one edge. Throws
  /// IndexOutOfRange or SelfLoopRejected.
  Graph(std::size_t n, std::span<const Edge> edges);

  std::size_t num_nodes() const noexcept { return adjacency_.size(); }
  std::size_t num_edges() const noexcept { return edge_count_; }

  bool has_edge(NodeId i, NodeId j) const;
  std::size_t degree(NodeId i) const;
  /// Sorted ascending.
  std::span<const NodeId> neighbors(NodeId i) const;
  /// All edges in ascending (u, v) order.
  std::vector<Edge> edges() const;

  /// Returns true when the edge set changed.
  bool add_edge(NodeId i, NodeId j);
  bool remove_edge(NodeId i, NodeId j);

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  void check_pair(NodeId i, NodeId j) const;

  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Dense all-pairs hop distances, truncated at a horizon.
///
/// Pairs farther than the horizon and pairs in different components both
/// read as kUnreachable; `connected` tells them apart.
class HopOrderMatrix {
 public:
  using Order = std::uint16_t;
  static constexpr Order kUnreachable = 0xFFFF;

  HopOrderMatrix() = default;

  std::size_t size() const noexcept { return n_; }
  int max_order() const noexcept { return max_order_; }

  Order operator()(NodeId i, NodeId j) const { return orders_[i * n_ + j]; }
  bool reachable(NodeId i, NodeId j) const { return (*this)(i, j) != kUnreachable; }
  bool connected(NodeId i, NodeId j) const { return component_[i] == component_[j]; }
  /// Connected but farther than max_order hops.
  bool beyond_horizon(NodeId i, NodeId j) const { return !reachable(i, j) && connected(i, j); }
  /// True when max_order >= n - 1, so no pair can lie beyond the horizon.
  bool horizon_complete() const noexcept { return n_ == 0 || static_cast<std::size_t>(max_order_) + 1 >= n_; }

 private:
  friend HopOrderMatrix hop_orders(const Graph&, int, std::size_t);

  std::size_t n_ = 0;
  int max_order_ = 0;
  std::vector<Order> orders_;
  std::vector<std::size_t> component_;
};

inline constexpr int kDefaultMaxOrder = 10;
inline constexpr std::size_t kDefaultDenseCap = 20000;

/// Truncated BFS from every node. Throws InvalidArgument when max_order is
/// out of range or the graph exceeds dense_cap nodes.
HopOrderMatrix hop_orders(const Graph& g, int max_order = kDefaultMaxOrder,
                          std::size_t dense_cap = kDefaultDenseCap);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
Matrix normalize_propagation(const Graph& g);

}  // namespace oversmooth
