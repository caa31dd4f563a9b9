#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "oversmooth/dataset.hpp"
#include "oversmooth/graph.hpp"
#include "oversmooth/metrics.hpp"

namespace fixtures {

using namespace oversmooth;

inline Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  Graph g(n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) g.add_edge(i, j);
  return g;
}

inline Graph path_graph(std::size_t n) {
  Graph g(n);
  for (NodeId i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

inline Graph from_edges(std::size_t n, std::vector<Edge> edges) { return Graph(n, edges); }

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

/// The 2 x 30 SBM used by the trend checks.
inline SbmConfig smoothing_sbm(std::uint64_t seed, double p_inter = 0.1) {
  SbmConfig cfg;
  cfg.block_sizes = {30, 30};
  cfg.p_intra = 0.7;
  cfg.p_inter = p_inter;
  cfg.feature_dim = 8;
  cfg.feature_signal = 1.0;
  cfg.noise_std = 1.0;
  cfg.seed = seed;
  return cfg;
}

/// 30-node blocks cannot supply 20 + 30 nodes per class.
inline constexpr SplitSizes kSmallSplit{5, 10};

/// Diameter-2 fixtures: direct neighbours vs non-adjacent pairs.
inline constexpr MetricConfig kFixtureMetrics{1, 2, true};

}  // namespace fixtures
