#pragma once

#include <utility>
#include <vector>

#include "elpi/data.hpp"
#include "elpi/graph.hpp"

namespace elpi {

// Per-point nearest-edge projection: edge index, clamped parameter t in
// [0,1] along the edge (oriented from the lower to the higher node index),
// and squared distance.
struct EdgeProjection {
    std::vector<int> edge;
    std::vector<double> t;
    std::vector<double> sqdist;
};

// t = clamp(<p-a, b-a> / |b-a|^2, 0, 1); returns (t, squared distance).
std::pair<double, double> project_point_on_edge(const Eigen::RowVectorXd& p,
                                                const Eigen::RowVectorXd& a,
                                                const Eigen::RowVectorXd& b);

// Argmin over all edges per point; ties go to the lowest edge index.
EdgeProjection project_dataset(const ElasticGraph& g, const Matrix& phi,
                               const PointCloud& cloud);

enum class ExtendMode { Centroid, Max };

// Extends each leaf that has assigned points whose projections clamp at the
// leaf end: one new node is added beyond the leaf toward those points.
// mu_default becomes the bending modulus of the former leaf (now a 2-star).
std::pair<ElasticGraph, Matrix> extend_leaves(const ElasticGraph& g,
                                              const Matrix& phi,
                                              const PointCloud& cloud,
                                              const Partition& partition,
                                              const EdgeProjection& proj,
                                              ExtendMode mode,
                                              double mu_default);

// Removes edges with fewer than min_points projected points, then any
// resulting degree-0 nodes; surviving nodes keep their positions.
std::pair<ElasticGraph, Matrix> filter_branches(const ElasticGraph& g,
                                                const Matrix& phi,
                                                const EdgeProjection& proj,
                                                int min_points);

// Maximal path whose interior nodes have degree 2; a pure-cycle component is
// returned with cycle = true (first node repeated at the end).
struct Branch {
    std::vector<int> nodes;
    bool cycle = false;
};

std::vector<Branch> extract_branches(const ElasticGraph& g);

// Root-to-leaf path with its pseudotime parameterization: cumulative arc
// length and pseudotime value at every path node. Interior degree >= 3 nodes
// are pinned to equally spaced pseudotimes.
struct PathInfo {
    std::vector<int> nodes;
    std::vector<double> arc; // cumulative arc length at each path node
    std::vector<double> pt;  // pseudotime at each path node
};

PathInfo build_path(const ElasticGraph& g, const Matrix& phi, int root,
                    int leaf);

// Maps an arc-length position on the path to pseudotime (piecewise linear
// between the pinned boundary values).
double path_pseudotime_at(const PathInfo& path, double arc_pos);

// Nearest-segment projection of an arbitrary point onto the path polyline;
// returns the arc-length position.
double project_onto_path(const PathInfo& path, const Matrix& phi,
                         const Eigen::RowVectorXd& point);

struct PseudotimeTable {
    std::vector<double> pt;      // -1 for off-path points
    std::vector<uint8_t> on_path;
    const PathInfo* path = nullptr;
};

// Points whose nearest edge lies on the path get the pseudotime of their
// projection; others are flagged off-path.
PseudotimeTable pseudotime(const ElasticGraph& g, const Matrix& phi,
                           const EdgeProjection& proj, const PathInfo& path);

} // namespace elpi
