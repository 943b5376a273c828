#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elpi/errors.hpp"

namespace elpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Undirected elastic graph: per-edge stretching moduli and per-node bending
// moduli. Node indices are dense and 0-based; edges are stored as (a, b) with
// a < b, sorted lexicographically.
struct ElasticGraph {
    int node_count = 0;
    std::vector<std::array<int, 2>> edges;
    std::vector<double> lambda; // aligned to edges
    std::vector<double> mu;     // aligned to nodes; > 0 only at star centers

    std::vector<int> degrees() const;
    std::vector<std::vector<int>> adjacency() const; // sorted neighbor lists
    int find_edge(int a, int b) const;               // -1 if absent

    // Restores the canonical edge order, carrying lambda along.
    void canonicalize();

    // Uniform-moduli path 0-1-...-(n-1).
    static ElasticGraph chain(int n, double lam, double mu_star);
    // Uniform-moduli cycle on n >= 3 nodes.
    static ElasticGraph cycle(int n, double lam, double mu_star);
};

struct ValidationIssue {
    enum class Kind {
        SelfLoop,
        DuplicateEdge,
        EdgeIndexOutOfRange,
        NonPositiveLambda,
        NegativeMu,
        MuAtNonCenter,
        SizeMismatch,
    };
    Kind kind;
    int index; // edge or node index, -1 when not applicable
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> violations;
    std::vector<std::string> notes; // informational (e.g. disconnected)
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_graph(const ElasticGraph& g);

// Throws DataError when validate_graph reports any violation.
void require_valid(const ElasticGraph& g);

// Elastic matrix EM = A + M: off-diagonal (i,j) holds the alpha-folded edge
// modulus lambda_e + alpha * (max(2, deg(a), deg(b)) - 2); diagonal (j,j)
// holds mu of the star centered at j.
Matrix build_elastic_matrix(const ElasticGraph& g, double effective_alpha);

struct StarDecomposition {
    Matrix lambda_adj; // edge springs (alpha-folded weights)
    Matrix star_edges; // center-leaf springs, +mu_j/k_j per star edge
    Matrix star_leaves; // repulsive leaf-pair springs, -mu_j/k_j^2
};

StarDecomposition decompose_elastic_matrix(const Matrix& em, const ElasticGraph& g);

// L(A)_ij = delta_ij * sum_k A_kj - A_ij.
Matrix laplacian_of_adjacency(const Matrix& a);

// Sum of the three spring Laplacians; equals one half of the gradient
// operator of the elastic energy with respect to node positions.
Matrix graph_laplacian_sum(const Matrix& em, const ElasticGraph& g);

} // namespace elpi
