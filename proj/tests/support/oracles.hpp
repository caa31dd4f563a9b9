#pragma once

// Brute-force reference implementations used to check the library. They
// share no code with it beyond the Matrix typedef and the Graph container.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "oversmooth/graph.hpp"

namespace oracle {

using oversmooth::Graph;
using oversmooth::Matrix;

inline constexpr int kInf = std::numeric_limits<int>::max() / 4;

inline std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges()) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

inline double cosine_distance(const Matrix& h, std::size_t i, std::size_t j) {
  double dot = 0, ni = 0, nj = 0;
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
    dot += h(ii, c) * h(jj, c);
    ni += h(ii, c) * h(ii, c);
    nj += h(jj, c) * h(jj, c);
  }
  if (ni == 0 || nj == 0) return 1.0;
  return 1.0 - dot / (std::sqrt(ni) * std::sqrt(nj));
}

using Mask = std::vector<std::vector<bool>>;

/// Row means over positive masked distances, then the mean over rows that
/// have one. Empty optional when no row qualifies.
inline std::optional<double> mad(const Matrix& h, const Mask& m, double zero_tol = 1e-12) {
  const auto n = static_cast<std::size_t>(h.rows());
  double total = 0;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !m[i][j]) continue;
      const double d = cosine_distance(h, i, j);
      if (d > zero_tol) {
        sum += d;
        ++cnt;
      }
    }
    if (cnt > 0) {
      total += sum / static_cast<double>(cnt);
      ++rows;
    }
  }
  if (rows == 0) return std::nullopt;
  return total / static_cast<double>(rows);
}

inline Mask full_mask(std::size_t n) {
  Mask m(n, std::vector<bool>(n, true));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = false;
  return m;
}

inline Mask order_mask(const std::vector<std::vector<int>>& d, int lo, int hi, bool with_inf) {
  const std::size_t n = d.size();
  Mask m(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      m[i][j] = d[i][j] >= kInf ? with_inf : (d[i][j] >= lo && d[i][j] <= hi);
    }
  return m;
}

inline std::optional<double> madgap(const Matrix& h, const Graph& g, int neb, int rmt, bool with_inf) {
  const auto d = floyd_warshall(g);
  const auto r = mad(h, order_mask(d, rmt, kInf - 1, with_inf));
  const auto b = mad(h, order_mask(d, 1, neb, false));
  if (!r || !b) return std::nullopt;
  return *r - *b;
}

/// Pair-weighted fraction of same-label pairs within k hops.
inline std::optional<double> info_noise_global(const Graph& g, const std::vector<int>& labels, int k) {
  const auto d = floyd_warshall(g);
  std::size_t same = 0, all = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j)
      if (i != j && d[i][j] >= 1 && d[i][j] <= k) {
        ++all;
        same += labels[i] == labels[j];
      }
  if (all == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(all);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
