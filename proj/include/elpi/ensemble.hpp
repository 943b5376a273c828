#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "elpi/analysis.hpp"
#include "elpi/grammar.hpp"

namespace elpi {

struct EnsembleMember {
    ElasticGraph graph;
    Matrix embedding;
    std::vector<int> sample_indices; // sorted, into the original cloud
};

struct GraphEnsemble {
    std::vector<EnsembleMember> members;
    double fraction = 0.9;
    std::uint64_t seed = 0;
};

// k independent fits, each on its own uniform sample (without replacement)
// of ceil(p * n) points; bitwise deterministic under seed.
GraphEnsemble bootstrap_ensemble(const PointCloud& cloud,
                                 const Strategy& strategy,
                                 const FitConfig& config, int k, double p,
                                 std::uint64_t seed, int threads = 1);

struct KMeansConfig {
    int restarts = 10;
    int max_iter = 100;
    std::uint64_t seed = 0;
};

struct ConsensusGraph {
    Matrix positions; // cluster centroids, one row per consensus node
    std::vector<std::array<int, 2>> edges;
    std::vector<int> weights; // cross-cluster member-edge counts
    std::vector<int> cluster_of; // per pooled member node

    // Construction inputs, kept so filters can rebuild from scratch.
    Matrix pooled; // all member node positions
    std::vector<std::array<int, 2>> pooled_edges; // member edges, pooled ids
    std::vector<int> pooled_member; // member index per pooled node
    int clusters = 0;
    int edge_threshold = 0;
    int replicas = 0;
    KMeansConfig kmeans;
};

// Pools member node positions, k-means them into M clusters, and keeps
// cross-cluster edges whose member-edge count exceeds edge_threshold.
ConsensusGraph consensus_graph(const GraphEnsemble& ensemble, int clusters,
                               int edge_threshold, const KMeansConfig& kmeans);

struct ConsensusFilters {
    bool density_filter = false;
    double density_min_count = 0.0; // 0 = 0.05 * replicas
    double density_radius = 0.0;    // 0 = pooled pairwise quantile 0.1
    std::optional<double> edge_len_min;
    std::optional<double> edge_len_max;
    bool drop_unconnected = false;
};

// Re-derives the consensus from the stored pool with the filters applied in
// order: node density drop (pre-clustering), edge-length band, unconnected
// node removal. Idempotent for fixed filters.
ConsensusGraph filter_consensus(const ConsensusGraph& consensus,
                                const ConsensusFilters& filters);

// Projects each member's branch node nearest to the reference branch node
// onto the reference path; returns the [2.5%, 97.5%] pseudotime quantiles.
// Members without branch nodes are skipped.
std::array<double, 2> branch_point_interval(const GraphEnsemble& ensemble,
                                            const PathInfo& reference_path,
                                            const Matrix& reference_embedding,
                                            int reference_branch_node);

} // namespace elpi
