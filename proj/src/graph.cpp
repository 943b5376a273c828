#include "elpi/graph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace elpi {

std::vector<int> ElasticGraph::degrees() const {
    std::vector<int> deg(node_count, 0);
    for (const auto& e : edges) {
        if (e[0] >= 0 && e[0] < node_count) ++deg[e[0]];
        if (e[1] >= 0 && e[1] < node_count) ++deg[e[1]];
    }
    return deg;
}

std::vector<std::vector<int>> ElasticGraph::adjacency() const {
    std::vector<std::vector<int>> adj(node_count);
    for (const auto& e : edges) {
        adj[e[0]].push_back(e[1]);
        adj[e[1]].push_back(e[0]);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());
    return adj;
}

int ElasticGraph::find_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (edges[i][0] == a && edges[i][1] == b) return static_cast<int>(i);
    return -1;
}

void ElasticGraph::canonicalize() {
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    for (auto& e : edges)
        if (e[0] > e[1]) std::swap(e[0], e[1]);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return edges[i] < edges[j];
    });
    std::vector<std::array<int, 2>> ne(edges.size());
    std::vector<double> nl(lambda.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        ne[k] = edges[order[k]];
        nl[k] = lambda[order[k]];
    }
    edges = std::move(ne);
    lambda = std::move(nl);
}

ElasticGraph ElasticGraph::chain(int n, double lam, double mu_star) {
    ElasticGraph g;
    g.node_count = n;
    g.mu.assign(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        g.edges.push_back({i, i + 1});
        g.lambda.push_back(lam);
    }
    for (int i = 1; i + 1 < n; ++i) g.mu[i] = mu_star;
    return g;
}

ElasticGraph ElasticGraph::cycle(int n, double lam, double mu_star) {
    ElasticGraph g;
    g.node_count = n;
    g.mu.assign(n, mu_star);
    for (int i = 0; i < n; ++i) {
        int a = i, b = (i + 1) % n;
        if (a > b) std::swap(a, b);
        g.edges.push_back({a, b});
        g.lambda.push_back(lam);
    }
    g.canonicalize();
    return g;
}

ValidationReport validate_graph(const ElasticGraph& g) {
    ValidationReport rep;
    auto add = [&rep](ValidationIssue::Kind k, int idx, std::string msg) {
        rep.violations.push_back({k, idx, std::move(msg)});
    };

    if (g.lambda.size() != g.edges.size())
        add(ValidationIssue::Kind::SizeMismatch, -1,
            "lambda size does not match edge count");
    if (static_cast<int>(g.mu.size()) != g.node_count)
        add(ValidationIssue::Kind::SizeMismatch, -1,
            "mu size does not match node count");

    std::vector<std::array<int, 2>> seen;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        auto e = g.edges[i];
        if (e[0] < 0 || e[0] >= g.node_count || e[1] < 0 || e[1] >= g.node_count) {
            add(ValidationIssue::Kind::EdgeIndexOutOfRange, static_cast<int>(i),
                "edge endpoint out of range");
            continue;
        }
        if (e[0] == e[1]) {
            add(ValidationIssue::Kind::SelfLoop, static_cast<int>(i),
                "self-loop at node " + std::to_string(e[0]));
            continue;
        }
        if (e[0] > e[1]) std::swap(e[0], e[1]);
        if (std::find(seen.begin(), seen.end(), e) != seen.end())
            add(ValidationIssue::Kind::DuplicateEdge, static_cast<int>(i),
                "duplicate edge {" + std::to_string(e[0]) + "," +
                    std::to_string(e[1]) + "}");
        seen.push_back(e);
    }
    for (std::size_t i = 0; i < g.lambda.size() && i < g.edges.size(); ++i)
        if (!(g.lambda[i] > 0.0))
            add(ValidationIssue::Kind::NonPositiveLambda, static_cast<int>(i),
                "edge " + std::to_string(i) + " has nonpositive lambda");

    auto deg = g.degrees();
    for (int v = 0; v < g.node_count && v < static_cast<int>(g.mu.size()); ++v) {
        if (g.mu[v] < 0.0)
            add(ValidationIssue::Kind::NegativeMu, v,
                "node " + std::to_string(v) + " has negative mu");
        else if (g.mu[v] > 0.0 && deg[v] < 2)
            add(ValidationIssue::Kind::MuAtNonCenter, v,
                "bending modulus at non-center node " + std::to_string(v));
    }

    // Connectivity is informational only.
    if (g.node_count > 0 && rep.violations.empty()) {
        std::vector<int> comp(g.node_count, -1);
        auto adj = g.adjacency();
        int ncomp = 0;
        for (int s = 0; s < g.node_count; ++s) {
            if (comp[s] >= 0) continue;
            std::vector<int> stack{s};
            comp[s] = ncomp;
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (int u : adj[v])
                    if (comp[u] < 0) {
                        comp[u] = ncomp;
                        stack.push_back(u);
                    }
            }
            ++ncomp;
        }
        if (ncomp > 1)
            rep.notes.push_back("graph has " + std::to_string(ncomp) +
                                " connected components");
    }
    return rep;
}

void require_valid(const ElasticGraph& g) {
    auto rep = validate_graph(g);
    if (!rep.ok()) {
        std::ostringstream os;
        os << "invalid elastic graph:";
        for (const auto& v : rep.violations) os << " [" << v.message << "]";
        throw DataError(os.str());
    }
}

namespace {

// Structural validity for operator construction. Unlike require_valid this
// admits zero moduli, so the solver degenerates cleanly to k-means.
void require_solvable(const ElasticGraph& g) {
    auto rep = validate_graph(g);
    std::ostringstream os;
    bool bad = false;
    for (const auto& v : rep.violations) {
        if (v.kind == ValidationIssue::Kind::NonPositiveLambda &&
            g.lambda[v.index] == 0.0)
            continue;
        if (v.kind == ValidationIssue::Kind::MuAtNonCenter) continue;
        bad = true;
        os << " [" << v.message << "]";
    }
    if (bad) throw DataError("invalid elastic graph:" + os.str());
}

} // namespace

Matrix build_elastic_matrix(const ElasticGraph& g, double effective_alpha) {
    require_solvable(g);
    if (effective_alpha < 0.0)
        throw DataError("effective_alpha must be nonnegative");
    auto deg = g.degrees();
    Matrix em = Matrix::Zero(g.node_count, g.node_count);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        int a = g.edges[i][0], b = g.edges[i][1];
        double w = g.lambda[i] +
                   effective_alpha * (std::max({2, deg[a], deg[b]}) - 2);
        em(a, b) = w;
        em(b, a) = w;
    }
    for (int v = 0; v < g.node_count; ++v)
        if (deg[v] >= 2) em(v, v) = g.mu[v];
    return em;
}

StarDecomposition decompose_elastic_matrix(const Matrix& em, const ElasticGraph& g) {
    require_solvable(g);
    const int n = g.node_count;
    if (em.rows() != n || em.cols() != n)
        throw DataError("elastic matrix size does not match graph");
    // Off-diagonal support must sit inside the edge set; zero-modulus edges
    // may leave entries at zero.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (em(i, j) != 0.0 && g.find_edge(i, j) < 0)
                throw DataError("elastic matrix inconsistent with graph edges");

    StarDecomposition d;
    d.lambda_adj = em;
    d.lambda_adj.diagonal().setZero();
    d.star_edges = Matrix::Zero(n, n);
    d.star_leaves = Matrix::Zero(n, n);

    auto adj = g.adjacency();
    for (int c = 0; c < n; ++c) {
        const auto& nb = adj[c];
        const int k = static_cast<int>(nb.size());
        if (k < 2) continue;
        const double mu = em(c, c);
        if (mu == 0.0) continue;
        const double we = mu / k;
        const double wl = mu / (static_cast<double>(k) * k);
        for (int u : nb) {
            d.star_edges(c, u) += we;
            d.star_edges(u, c) += we;
        }
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                d.star_leaves(nb[i], nb[j]) -= wl;
                d.star_leaves(nb[j], nb[i]) -= wl;
            }
    }
    return d;
}

Matrix laplacian_of_adjacency(const Matrix& a) {
    Matrix l = -a;
    l.diagonal() += a.colwise().sum();
    return l;
}

Matrix graph_laplacian_sum(const Matrix& em, const ElasticGraph& g) {
    auto d = decompose_elastic_matrix(em, g);
    return laplacian_of_adjacency(d.lambda_adj) +
           laplacian_of_adjacency(d.star_edges) +
           laplacian_of_adjacency(d.star_leaves);
}

} // namespace elpi
