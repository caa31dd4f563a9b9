#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "oversmooth/error.hpp"
#include "oversmooth/graph.hpp"

using namespace oversmooth;

namespace {

void expect_error(ErrorCode code, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(Graph, EdgesAreStoredOnceAndQueriedSymmetrically) {
  Graph g(3, std::vector<Edge>{{1, 0}, {0, 1}, {2, 1}});
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.degree(1), 2u);
  const auto e = g.edges();
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0], Edge(0, 1));
  EXPECT_EQ(e[1], Edge(1, 2));
}

TEST(Graph, AddAndRemoveReportChanges) {
  Graph g(2);
  EXPECT_TRUE(g.add_edge(0, 1));
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_FALSE(g.add_edge(0, 1));
  EXPECT_FALSE(g.add_edge(1, 0));
  EXPECT_TRUE(g.remove_edge(1, 0));
  EXPECT_FALSE(g.remove_edge(0, 1));
  EXPECT_EQ(g.num_edges(), 0u);
}

TEST(Graph, RejectsSelfLoopsAndBadIndices) {
  Graph g(2);
  expect_error(ErrorCode::SelfLoopRejected, [&] { g.add_edge(1, 1); });
  expect_error(ErrorCode::IndexOutOfRange, [&] { g.add_edge(0, 2); });
  expect_error(ErrorCode::IndexOutOfRange, [&] { g.remove_edge(5, 0); });
  expect_error(ErrorCode::SelfLoopRejected, [] { Graph(2, std::vector<Edge>{{0, 0}}); });
}

TEST(HopOrders, Examples) {
  const auto single = hop_orders(fixtures::from_edges(2, {{0, 1}}));
  EXPECT_EQ(single(0, 1), 1);
  const auto path = hop_orders(fixtures::path_graph(3));
  EXPECT_EQ(path(0, 2), 2);
  const auto empty = hop_orders(Graph(2));
  EXPECT_EQ(empty(0, 1), HopOrderMatrix::kUnreachable);
  EXPECT_FALSE(empty.connected(0, 1));
  EXPECT_EQ(empty(0, 0), 0);
}

TEST(HopOrders, HorizonAndDisconnectionAreDistinguishable) {
  Graph g = fixtures::path_graph(6);
  g = Graph(8, g.edges());  // nodes 6 and 7 isolated
  const auto o = hop_orders(g, 2);
  EXPECT_EQ(o(0, 2), 2);
  EXPECT_FALSE(o.reachable(0, 3));
  EXPECT_TRUE(o.beyond_horizon(0, 3));
  EXPECT_FALSE(o.beyond_horizon(0, 7));
  EXPECT_FALSE(o.connected(0, 7));
  EXPECT_FALSE(o.horizon_complete());
  EXPECT_TRUE(hop_orders(g, 7).horizon_complete());
}

TEST(HopOrders, RejectsBadArguments) {
  expect_error(ErrorCode::InvalidArgument, [] { hop_orders(Graph(3), 0); });
  expect_error(ErrorCode::InvalidArgument, [] { hop_orders(Graph(30), 3, 10); });
}

TEST(HopOrders, MatchesFloydWarshallOnRandomGraphs) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const std::size_t n = 2 + seed % 29;
    const double p = 0.02 + 0.25 * static_cast<double>(seed % 7) / 6.0;
    const Graph g = fixtures::random_graph(n, p, seed);
    const auto fw = oracle::floyd_warshall(g);
    const auto o = hop_orders(g, static_cast<int>(n));
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        if (fw[i][j] >= oracle::kInf) {
          EXPECT_EQ(o(i, j), HopOrderMatrix::kUnreachable);
          EXPECT_FALSE(o.connected(i, j));
        } else {
          EXPECT_EQ(o(i, j), fw[i][j]) << "seed " << seed << " pair " << i << "," << j;
        }
      }
    }
  }
}

TEST(HopOrders, InvariantsHoldOnRandomGraphs) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const std::size_t n = 5 + seed % 46;
    const Graph g = fixtures::random_graph(n, 0.08, seed);
    const auto o = hop_orders(g, 4);
    for (NodeId i = 0; i < n; ++i) {
      EXPECT_EQ(o(i, i), 0);
      for (NodeId j = 0; j < n; ++j) {
        EXPECT_EQ(o(i, j), o(j, i));
        EXPECT_EQ(o(i, j) == 1, g.has_edge(i, j));
        if (!o.reachable(i, j)) continue;
        for (NodeId k = 0; k < n; ++k) {
          if (o.reachable(j, k) && o.reachable(i, k)) EXPECT_LE(o(i, k), o(i, j) + o(j, k));
        }
      }
    }
  }
}

TEST(Propagation, Examples) {
  const Matrix one = normalize_propagation(Graph(1));
  ASSERT_EQ(one.rows(), 1);
  EXPECT_DOUBLE_EQ(one(0, 0), 1.0);

  const Matrix two = normalize_propagation(fixtures::from_edges(2, {{0, 1}}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(two(i, j), 0.5, 1e-15);

  const Matrix tri = normalize_propagation(fixtures::from_edges(3, {{0, 1}, {1, 2}, {0, 2}}));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(tri(i, j), 1.0 / 3.0, 1e-15);
}

TEST(Propagation, StructureAndSpectralRadius) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 3 + seed % 20;
    const Graph g = fixtures::random_graph(n, 0.3, seed);
    const Matrix a = normalize_propagation(g);
    EXPECT_LE((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        const double v = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        EXPECT_GE(v, 0.0);
        EXPECT_EQ(v != 0.0, i == j || g.has_edge(i, j));
      }
    }
    // Power iteration on the symmetric matrix.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    v(0) += 0.37;
    double lambda = 0.0;
    for (int it = 0; it < 2000; ++it) {
      Eigen::VectorXd w = a * v;
      lambda = w.norm() / v.norm();
      v = w.normalized();
    }
    EXPECT_LE(lambda, 1.0 + 1e-9);
  }
}
