#pragma once

// Straight-line serial implementations of the kernels that have tuned or
// parallel counterparts in the main library. These trade speed for
// obviousness; tests assert the fast paths match them bit for bit.

#include "rtbwt/geometry.hpp"

namespace rtbwt::reference {

/// Greedy nearest-neighbor path by brute-force rescanning of the whole set
/// at every step. No bucket grid, no swap-remove bookkeeping, no threads.
Permutation nn_path(const PointSet& set, std::size_t start, DistanceMetric metric,
                    std::optional<int> window = std::nullopt,
                    DistanceCounter* counter = nullptr);

} // namespace rtbwt::reference
