#include "oversmooth/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oversmooth/error.hpp"

namespace oversmooth {

Graph::Graph(std::size_t n) : adjacency_(n) {}

Graph::Graph(std::size_t n, std::span<const Edge> edges) : adjacency_(n) {
  for (const auto& e : edges) add_edge(e.u, e.v);
}

void Graph::check_pair(NodeId i, NodeId j) const {
  if (i >= num_nodes() || j >= num_nodes()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") outside [0, " +
                    std::to_string(num_nodes()) + ")");
  }
  if (i == j) {
    throw Error(ErrorCode::SelfLoopRejected, "self-loop on node " + std::to_string(i));
  }
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  if (i >= num_nodes() || j >= num_nodes() || i == j) return false;
  const auto& row = adjacency_[i];
  return std::binary_search(row.begin(), row.end(), j);
}

std::size_t Graph::degree(NodeId i) const { return adjacency_.at(i).size(); }

std::span<const NodeId> Graph::neighbors(NodeId i) const { return adjacency_.at(i); }

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

bool Graph::add_edge(NodeId i, NodeId j) {
  check_pair(i, j);
  auto& row_i = adjacency_[i];
  auto it = std::lower_bound(row_i.begin(), row_i.end(), j);
  if (it != row_i.end() && *it == j) return false;
  row_i.insert(it, j);
  auto& row_j = adjacency_[j];
  row_j.insert(std::lower_bound(row_j.begin(), row_j.end(), i), i);
  ++edge_count_;
  return true;
}

bool Graph::remove_edge(NodeId i, NodeId j) {
  check_pair(i, j);
  auto& row_i = adjacency_[i];
  auto it = std::lower_bound(row_i.begin(), row_i.end(), j);
  if (it == row_i.end() || *it != j) return false;
  row_i.erase(it);
  auto& row_j = adjacency_[j];
  row_j.erase(std::lower_bound(row_j.begin(), row_j.end(), i));
  --edge_count_;
  return true;
}

HopOrderMatrix hop_orders(const Graph& g, int max_order, std::size_t dense_cap) {
  if (max_order < 1 || max_order >= HopOrderMatrix::kUnreachable) {
    throw Error(ErrorCode::InvalidArgument, "max_order must lie in [1, 65534]");
  }
  const std::size_t n = g.num_nodes();
  if (n > dense_cap) {
    throw Error(ErrorCode::InvalidArgument, "graph has " + std::to_string(n) +
                                                " nodes, above the dense hop-order cap of " +
                                                std::to_string(dense_cap));
  }

  HopOrderMatrix h;
  h.n_ = n;
  h.max_order_ = max_order;
  h.orders_.assign(n * n, HopOrderMatrix::kUnreachable);

  // Components first so disconnected pairs are distinguishable from pairs
  // past the BFS horizon.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  h.component_.assign(n, kNone);
  std::vector<NodeId> frontier;
  std::size_t next_component = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (h.component_[s] != kNone) continue;
    h.component_[s] = next_component;
    frontier.assign(1, s);
    while (!frontier.empty()) {
      NodeId u = frontier.back();
      frontier.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (h.component_[v] == kNone) {
          h.component_[v] = next_component;
          frontier.push_back(v);
        }
      }
    }
    ++next_component;
  }

  std::vector<NodeId> current;
  std::vector<NodeId> next;
  for (NodeId s = 0; s < n; ++s) {
    auto* row = h.orders_.data() + s * n;
    row[s] = 0;
    current.assign(1, s);
    for (int depth = 1; depth <= max_order && !current.empty(); ++depth) {
      next.clear();
      for (NodeId u : current) {
        for (NodeId v : g.neighbors(u)) {
          if (row[v] == HopOrderMatrix::kUnreachable) {
            row[v] = static_cast<HopOrderMatrix::Order>(depth);
            next.push_back(v);
          }
        }
      }
      current.swap(next);
    }
  }
  return h;
}

Matrix normalize_propagation(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::VectorXd inv_sqrt_degree(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    inv_sqrt_degree(i) = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  }
  Matrix a_hat = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a_hat(i, i) = inv_sqrt_degree(i) * inv_sqrt_degree(i);
    for (NodeId j : g.neighbors(static_cast<NodeId>(i))) {
      const auto jj = static_cast<Eigen::Index>(j);
      a_hat(i, jj) = inv_sqrt_degree(i) * inv_sqrt_degree(jj);
    }
  }
  return a_hat;
}

}  // namespace oversmooth
