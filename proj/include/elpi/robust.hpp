#pragma once

#include <cstdint>
#include <vector>

#include "elpi/grammar.hpp"

namespace elpi {

// Quantile (default median) of pairwise distances over a uniform random
// sample of min(sample_size, n) points; deterministic under seed.
double estimate_trimming_radius(const PointCloud& cloud, int sample_size,
                                double quantile, std::uint64_t seed);

// Two-node seed at the highest-local-density point and its nearest distinct
// neighbor. Density is a neighbor count within density_radius, estimated
// against a bounded sample of the data.
std::pair<ElasticGraph, Matrix> density_seed(const PointCloud& cloud,
                                             double density_radius,
                                             double lambda,
                                             std::uint64_t seed = 0);

struct ForestResult {
    std::vector<PrincipalGraphResult> graphs;
    std::vector<int> point_labels; // graph index, -1 for uncaptured
};

// Iterative capture-and-remove: density-seed on the remaining points, grow a
// trimmed graph, remove the points within r0 of its nodes, repeat.
ForestResult principal_forest(const PointCloud& cloud, const Strategy& strategy,
                              const FitConfig& config, int min_remaining,
                              int threads = 1, std::uint64_t seed = 0);

struct MazeResult {
    std::vector<PrincipalGraphResult> curves;
    std::vector<int> labels; // nearest-curve index per point
};

// Repeatedly fits a trimmed principal curve on the full dataset, seeded by a
// dense uncaptured point and its nearest uncaptured neighbor; points within
// r0 of a fitted curve's nodes are marked captured. Final labels assign each
// point to its nearest curve.
MazeResult travel_maze_cluster(const PointCloud& cloud, int curve_nodes,
                               const FitConfig& config, int max_curves,
                               int threads = 1, std::uint64_t seed = 0);

} // namespace elpi
