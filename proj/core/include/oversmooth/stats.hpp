#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace oversmooth {

/// Sample Pearson correlation. Throws InvalidArgument on length mismatch or
/// fewer than two points, ConstantInput when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided permutation p-value for the Pearson correlation of x and y:
/// (1 + #{permutations of y with |r| >= |r_obs|}) / (1 + trials).
/// Requires trials >= 100. Deterministic for a fixed seed.
double permutation_pvalue(std::span<const double> x, std::span<const double> y,
                          std::size_t trials, std::uint64_t seed);

}  // namespace oversmooth
