#include "oversmooth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oversmooth/error.hpp"

namespace oversmooth {
namespace {

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "pearson: length mismatch");
  if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "pearson: need at least two points");
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double a : v) s += a;
  return s / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_inputs(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantInput, "pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double permutation_pvalue(std::span<const double> x, std::span<const double> y,
                          std::size_t trials, std::uint64_t seed) {
  if (trials < 100) throw Error(ErrorCode::InvalidArgument, "permutation_pvalue: trials must be >= 100");
  const double observed = std::abs(pearson(x, y));
  // Permutations that reproduce the observed ordering must count even when
  // the summation order perturbs the last bits.
  const double threshold = observed - 1e-12;

  std::mt19937_64 rng(seed);
  std::vector<double> shuffled(y.begin(), y.end());
  std::size_t extreme = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    if (std::abs(pearson(x, shuffled)) >= threshold) ++extreme;
  }
  return static_cast<double>(extreme + 1) / static_cast<double>(trials + 1);
}

}  // namespace oversmooth
