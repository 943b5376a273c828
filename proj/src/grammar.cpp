#include "elpi/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "elpi/parallel.hpp"

namespace elpi {

std::string op_kind_name(OpKind k) {
    switch (k) {
        case OpKind::BisectEdge: return "bisect_edge";
        case OpKind::AddNodeToNode: return "add_node_to_node";
        case OpKind::RemoveLeaf: return "remove_leaf";
        case OpKind::ShrinkInternalEdge: return "shrink_internal_edge";
    }
    return "unknown";
}

namespace {

std::vector<int> identity_map(int n) {
    std::vector<int> m(n);
    std::iota(m.begin(), m.end(), 0);
    return m;
}

// Drops node `removed` and compacts indices; returns the old->new map.
std::vector<int> compaction_map(int n, int removed) {
    std::vector<int> m(n);
    for (int i = 0; i < n; ++i) m[i] = i < removed ? i : (i == removed ? -1 : i - 1);
    return m;
}

void zero_mu_below_degree_two(ElasticGraph& g) {
    auto deg = g.degrees();
    for (int v = 0; v < g.node_count; ++v)
        if (deg[v] < 2) g.mu[v] = 0.0;
}

} // namespace

Candidate bisect_edge(const ElasticGraph& g, const Matrix& phi, int edge_index,
                      double mu_default) {
    if (edge_index < 0 || edge_index >= static_cast<int>(g.edges.size()))
        throw DataError("bisect_edge: missing edge");
    const int a = g.edges[edge_index][0];
    const int b = g.edges[edge_index][1];
    const double lam = g.lambda[edge_index];
    const int c = g.node_count;

    Candidate cand;
    cand.graph = g;
    cand.graph.node_count = c + 1;
    cand.graph.edges.erase(cand.graph.edges.begin() + edge_index);
    cand.graph.lambda.erase(cand.graph.lambda.begin() + edge_index);
    cand.graph.edges.push_back({a, c});
    cand.graph.lambda.push_back(lam);
    cand.graph.edges.push_back({b, c});
    cand.graph.lambda.push_back(lam);
    cand.graph.mu.push_back(mu_default);
    cand.graph.canonicalize();

    cand.embedding.resize(c + 1, phi.cols());
    cand.embedding.topRows(c) = phi;
    cand.embedding.row(c) = 0.5 * (phi.row(a) + phi.row(b));
    cand.op = OpKind::BisectEdge;
    cand.target = edge_index;
    cand.index_map = identity_map(c);
    return cand;
}

Candidate add_node_to_node(const ElasticGraph& g, const Matrix& phi,
                           const PointCloud& cloud, const Partition& partition,
                           int node, double mu_default) {
    if (node < 0 || node >= g.node_count)
        throw DataError("add_node_to_node: missing node");
    auto deg = g.degrees();
    if (deg[node] == 0)
        throw DataError("add_node_to_node: node has no incident edge");

    const int c = g.node_count;
    Candidate cand;
    cand.graph = g;
    cand.graph.node_count = c + 1;
    cand.embedding.resize(c + 1, phi.cols());
    cand.embedding.topRows(c) = phi;

    if (deg[node] == 1) {
        // Mirror the single incident edge beyond the leaf.
        int ei = -1;
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            if (g.edges[i][0] == node || g.edges[i][1] == node) {
                ei = static_cast<int>(i);
                break;
            }
        const int nb = g.edges[ei][0] == node ? g.edges[ei][1] : g.edges[ei][0];
        cand.graph.edges.push_back({node, c});
        cand.graph.lambda.push_back(g.lambda[ei]);
        cand.graph.mu[node] = deg[nb] >= 2 ? g.mu[nb] : mu_default;
        cand.embedding.row(c) = 2.0 * phi.row(node) - phi.row(nb);
    } else {
        double lam_sum = 0.0;
        int cnt = 0;
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            if (g.edges[i][0] == node || g.edges[i][1] == node) {
                lam_sum += g.lambda[i];
                ++cnt;
            }
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(phi.cols());
        double wsum = 0.0;
        for (int i = 0; i < cloud.n(); ++i)
            if (partition.assign[i] == node) {
                mean += cloud.w(i) * cloud.x.row(i);
                wsum += cloud.w(i);
            }
        if (!(wsum > 0.0))
            throw DataError("add_node_to_node: no data points assigned to node");
        cand.graph.edges.push_back({node, c});
        cand.graph.lambda.push_back(lam_sum / cnt);
        cand.embedding.row(c) = mean / wsum;
    }
    cand.graph.mu.push_back(0.0);
    cand.graph.canonicalize();
    cand.op = OpKind::AddNodeToNode;
    cand.target = node;
    cand.index_map = identity_map(c);
    return cand;
}

Candidate remove_leaf(const ElasticGraph& g, const Matrix& phi, int node) {
    if (node < 0 || node >= g.node_count)
        throw DataError("remove_leaf: missing node");
    auto deg = g.degrees();
    if (deg[node] != 1) throw DataError("remove_leaf: node is not a leaf");

    Candidate cand;
    cand.index_map = compaction_map(g.node_count, node);
    cand.graph.node_count = g.node_count - 1;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        if (e[0] == node || e[1] == node) continue;
        int a = cand.index_map[e[0]], b = cand.index_map[e[1]];
        if (a > b) std::swap(a, b);
        cand.graph.edges.push_back({a, b});
        cand.graph.lambda.push_back(g.lambda[i]);
    }
    cand.graph.mu.resize(g.node_count - 1);
    for (int v = 0; v < g.node_count; ++v)
        if (v != node) cand.graph.mu[cand.index_map[v]] = g.mu[v];
    zero_mu_below_degree_two(cand.graph);
    cand.graph.canonicalize();

    cand.embedding.resize(g.node_count - 1, phi.cols());
    for (int v = 0; v < g.node_count; ++v)
        if (v != node) cand.embedding.row(cand.index_map[v]) = phi.row(v);
    cand.op = OpKind::RemoveLeaf;
    cand.target = node;
    return cand;
}

Candidate shrink_internal_edge(const ElasticGraph& g, const Matrix& phi,
                               int edge_index) {
    if (edge_index < 0 || edge_index >= static_cast<int>(g.edges.size()))
        throw DataError("shrink_internal_edge: missing edge");
    const int a = g.edges[edge_index][0];
    const int b = g.edges[edge_index][1];
    auto deg = g.degrees();
    if (deg[a] <= 1 || deg[b] <= 1)
        throw DataError("shrink_internal_edge: edge is not internal");

    Candidate cand;
    cand.index_map = compaction_map(g.node_count, a);
    cand.graph.node_count = g.node_count - 1;
    const int bn = cand.index_map[b];

    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        if (static_cast<int>(i) == edge_index) continue;
        auto e = g.edges[i];
        // Reattach A's edges to B.
        if (e[0] == a) e[0] = b;
        if (e[1] == a) e[1] = b;
        int u = cand.index_map[e[0]], v = cand.index_map[e[1]];
        if (u > v) std::swap(u, v);
        int existing = cand.graph.find_edge(u, v);
        if (existing >= 0) {
            // Duplicate from a collapsed cycle: keep the larger modulus.
            cand.graph.lambda[existing] =
                std::max(cand.graph.lambda[existing], g.lambda[i]);
        } else {
            cand.graph.edges.push_back({u, v});
            cand.graph.lambda.push_back(g.lambda[i]);
        }
    }

    cand.graph.mu.resize(g.node_count - 1);
    for (int v = 0; v < g.node_count; ++v)
        if (v != a) cand.graph.mu[cand.index_map[v]] = g.mu[v];
    cand.graph.mu[bn] = 0.5 * (g.mu[a] + g.mu[b]);
    zero_mu_below_degree_two(cand.graph);
    cand.graph.canonicalize();

    cand.embedding.resize(g.node_count - 1, phi.cols());
    for (int v = 0; v < g.node_count; ++v)
        if (v != a) cand.embedding.row(cand.index_map[v]) = phi.row(v);
    cand.embedding.row(bn) = 0.5 * (phi.row(a) + phi.row(b));
    cand.op = OpKind::ShrinkInternalEdge;
    cand.target = edge_index;
    return cand;
}

std::vector<Candidate> enumerate_candidates(const ElasticGraph& g,
                                            const Matrix& phi,
                                            const PointCloud& cloud,
                                            const Partition& partition,
                                            const std::vector<GrammarOp>& ops,
                                            double mu_default) {
    auto deg = g.degrees();
    auto in_range = [](const std::optional<std::array<int, 2>>& r, int d) {
        return !r || (d >= (*r)[0] && d <= (*r)[1]);
    };

    std::vector<Candidate> out;
    for (const auto& op : ops) {
        switch (op.kind) {
            case OpKind::BisectEdge:
                for (std::size_t i = 0; i < g.edges.size(); ++i) {
                    int d = std::max(deg[g.edges[i][0]], deg[g.edges[i][1]]);
                    if (!in_range(op.degree_range, d)) continue;
                    out.push_back(bisect_edge(g, phi, static_cast<int>(i),
                                              mu_default));
                }
                break;
            case OpKind::AddNodeToNode:
                for (int v = 0; v < g.node_count; ++v) {
                    if (deg[v] == 0) continue;
                    if (!in_range(op.degree_range, deg[v])) continue;
                    if (deg[v] >= 2) {
                        bool any = false;
                        for (int i = 0; i < cloud.n() && !any; ++i)
                            any = partition.assign[i] == v;
                        if (!any) continue; // mean of an empty set is undefined
                    }
                    out.push_back(add_node_to_node(g, phi, cloud, partition, v,
                                                   mu_default));
                }
                break;
            case OpKind::RemoveLeaf:
                for (int v = 0; v < g.node_count; ++v) {
                    if (deg[v] != 1) continue;
                    if (!in_range(op.degree_range, deg[v])) continue;
                    out.push_back(remove_leaf(g, phi, v));
                }
                break;
            case OpKind::ShrinkInternalEdge:
                for (std::size_t i = 0; i < g.edges.size(); ++i) {
                    if (deg[g.edges[i][0]] <= 1 || deg[g.edges[i][1]] <= 1)
                        continue;
                    int d = std::max(deg[g.edges[i][0]], deg[g.edges[i][1]]);
                    if (!in_range(op.degree_range, d)) continue;
                    out.push_back(shrink_internal_edge(g, phi,
                                                       static_cast<int>(i)));
                }
                break;
        }
    }
    return out;
}

StrategyKind strategy_kind_from_name(const std::string& name) {
    if (name == "curve") return StrategyKind::Curve;
    if (name == "circle") return StrategyKind::Circle;
    if (name == "tree") return StrategyKind::Tree;
    throw ConfigError("unknown strategy: " + name);
}

std::string strategy_kind_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::Curve: return "curve";
        case StrategyKind::Circle: return "circle";
        case StrategyKind::Tree: return "tree";
    }
    return "unknown";
}

Strategy make_strategy(StrategyKind kind, int target_nodes, double alpha) {
    Strategy s;
    s.kind = kind;
    s.target_nodes = target_nodes;
    s.alpha = alpha;
    const int init_size = kind == StrategyKind::Circle ? 4 : 2;
    if (target_nodes < init_size)
        throw ConfigError("target_nodes below initial graph size");
    switch (kind) {
        case StrategyKind::Curve:
        case StrategyKind::Circle:
            s.cycle = {{{OpKind::BisectEdge, std::nullopt}}};
            break;
        case StrategyKind::Tree: {
            std::vector<GrammarOp> grow = {{OpKind::BisectEdge, std::nullopt},
                                           {OpKind::AddNodeToNode, std::nullopt}};
            std::vector<GrammarOp> shrink = {
                {OpKind::RemoveLeaf, std::nullopt},
                {OpKind::ShrinkInternalEdge, std::nullopt}};
            s.cycle = {grow, grow, shrink};
            break;
        }
    }
    return s;
}

namespace {

// 4-cycle seed spanning the PC1/PC2 ellipse of the data.
std::pair<ElasticGraph, Matrix> circle_init(const PointCloud& cloud,
                                            double lambda, double mu) {
    const double wtot = cloud.w.sum();
    Vector mean = (cloud.x.transpose() * cloud.w) / wtot;
    Matrix centered = cloud.x.rowwise() - mean.transpose();
    Matrix cov = (centered.transpose() * cloud.w.asDiagonal() * centered) / wtot;
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const int last = static_cast<int>(cov.rows()) - 1;
    if (cov.rows() < 2 || !(es.eigenvalues()(last - 1) > 0.0))
        throw DataError("degenerate data: circle seed needs two nonzero "
                        "principal components");
    Vector a1 = es.eigenvectors().col(last);
    Vector a2 = es.eigenvectors().col(last - 1);
    double s1 = std::sqrt(es.eigenvalues()(last));
    double s2 = std::sqrt(es.eigenvalues()(last - 1));

    ElasticGraph g = ElasticGraph::cycle(4, lambda, mu);
    Matrix phi(4, cloud.dim());
    phi.row(0) = (mean + s1 * a1).transpose();
    phi.row(1) = (mean + s2 * a2).transpose();
    phi.row(2) = (mean - s1 * a1).transpose();
    phi.row(3) = (mean - s2 * a2).transpose();
    return {std::move(g), std::move(phi)};
}

} // namespace

PrincipalGraphResult grow_graph(const PointCloud& cloud,
                                const Strategy& strategy,
                                const FitConfig& config, int threads) {
    cloud.check();
    config.check();
    if (strategy.cycle.empty()) throw ConfigError("strategy has no grammar cycle");

    FitConfig cfg = config;
    cfg.alpha = strategy.alpha;
    const FitConfig coarse = cfg.coarse();

    std::pair<ElasticGraph, Matrix> seed =
        strategy.init.has_value()
            ? *strategy.init
            : (strategy.kind == StrategyKind::Circle
                   ? circle_init(cloud, cfg.lambda, cfg.mu)
                   : init_default(cloud, cfg.lambda));
    require_valid(seed.first);
    if (seed.first.node_count > strategy.target_nodes)
        throw ConfigError("target_nodes below initial graph size");

    ElasticGraph graph = seed.first;
    FitResult state = fit_embedding(cloud, graph, seed.second, coarse);
    std::vector<OpRecord> history;

    std::size_t phase = 0;
    while (graph.node_count < strategy.target_nodes) {
        const auto& ops = strategy.cycle[phase % strategy.cycle.size()];
        ++phase;
        auto cands = enumerate_candidates(graph, state.embedding, cloud,
                                          state.partition, ops, cfg.mu);
        if (cands.empty())
            throw NumericError("no admissible candidate in grammar phase");

        const double inf = std::numeric_limits<double>::infinity();
        std::vector<FitResult> fits(cands.size());
        std::vector<double> energies(cands.size(), inf);
        parallel_for(static_cast<int>(cands.size()), threads, [&](int i) {
            try {
                fits[i] = fit_embedding(cloud, cands[i].graph,
                                        cands[i].embedding, coarse);
                energies[i] = fits[i].energy.total;
            } catch (const Error&) {
                // Unfittable candidate (e.g. fully trimmed); leave it out.
            }
        });

        int best = -1;
        for (std::size_t i = 0; i < cands.size(); ++i)
            if (best < 0 || energies[i] < energies[best])
                best = static_cast<int>(i);
        if (best < 0 || energies[best] == inf)
            throw NumericError("every grammar candidate failed to fit");

        FitResult refined =
            fit_embedding(cloud, cands[best].graph, fits[best].embedding, cfg);
        graph = std::move(cands[best].graph);
        state = std::move(refined);
        history.push_back({cands[best].op, cands[best].target,
                           state.energy.total});
    }

    state = fit_embedding(cloud, graph, state.embedding, cfg);

    PrincipalGraphResult res;
    res.graph = std::move(graph);
    res.embedding = std::move(state.embedding);
    res.partition = std::move(state.partition);
    res.energy = state.energy;
    res.history = std::move(history);
    return res;
}

} // namespace elpi
