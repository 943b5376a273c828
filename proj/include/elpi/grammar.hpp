#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elpi/fit.hpp"

namespace elpi {

enum class OpKind {
    BisectEdge,
    AddNodeToNode,
    RemoveLeaf,
    ShrinkInternalEdge,
};

std::string op_kind_name(OpKind k);

struct GrammarOp {
    OpKind kind;
    // Optional [min, max] filter on target node degrees; for edge-targeted
    // operations the larger endpoint degree is tested.
    std::optional<std::array<int, 2>> degree_range;
};

struct Candidate {
    ElasticGraph graph;
    Matrix embedding;
    OpKind op;
    int target; // edge index for edge ops, node index for node ops
    // old node index -> new node index, -1 for removed nodes
    std::vector<int> index_map;
};

// Replace edge {A,B} with A-C-B; C inherits the edge modulus on both halves
// and sits at the midpoint. The new 2-star at C gets mu_default.
Candidate bisect_edge(const ElasticGraph& g, const Matrix& phi, int edge_index,
                      double mu_default);

// Attach a new leaf C to node A. Leaf A: mirror placement beyond A, inherited
// moduli. Internal A: C at the mean of A's assigned points, mean edge modulus.
Candidate add_node_to_node(const ElasticGraph& g, const Matrix& phi,
                           const PointCloud& cloud, const Partition& partition,
                           int node, double mu_default);

Candidate remove_leaf(const ElasticGraph& g, const Matrix& phi, int node);

// Collapse internal edge {A,B}: A's edges are reattached to B (duplicates
// merged keeping the larger modulus), B moves to the midpoint.
Candidate shrink_internal_edge(const ElasticGraph& g, const Matrix& phi,
                               int edge_index);

// Exhaustive application of every operation in the set to every admissible
// target, ordered by op kind then target index.
std::vector<Candidate> enumerate_candidates(const ElasticGraph& g,
                                            const Matrix& phi,
                                            const PointCloud& cloud,
                                            const Partition& partition,
                                            const std::vector<GrammarOp>& ops,
                                            double mu_default);

enum class StrategyKind { Curve, Circle, Tree };

StrategyKind strategy_kind_from_name(const std::string& name);
std::string strategy_kind_name(StrategyKind k);

struct Strategy {
    StrategyKind kind = StrategyKind::Curve;
    int target_nodes = 10;
    double alpha = 0.0;
    std::vector<std::vector<GrammarOp>> cycle; // grammar sets, one per phase
    // Seed graph/embedding; computed from the data when absent.
    std::optional<std::pair<ElasticGraph, Matrix>> init;
};

// curve: {Bisect} from a 2-node segment; circle: {Bisect} from a 4-cycle;
// tree: (grow, grow, shrink) with grow = {Bisect, AddNodeToNode} and
// shrink = {RemoveLeaf, ShrinkInternalEdge}.
Strategy make_strategy(StrategyKind kind, int target_nodes, double alpha);

struct OpRecord {
    OpKind kind;
    int target;
    double energy_after;
};

struct PrincipalGraphResult {
    ElasticGraph graph;
    Matrix embedding;
    Partition partition;
    EnergyBreakdown energy;
    std::vector<OpRecord> history;
};

// Algorithm 2: enumerate-fit-select until target_nodes is reached, then a
// final refinement fit. Candidate fits within a phase run on `threads`
// workers; the selection is a deterministic (energy, index) argmin.
PrincipalGraphResult grow_graph(const PointCloud& cloud,
                                const Strategy& strategy,
                                const FitConfig& config, int threads = 1);

} // namespace elpi
