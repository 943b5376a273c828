#include "elpi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace elpi {

std::pair<double, double> project_point_on_edge(const Eigen::RowVectorXd& p,
                                                const Eigen::RowVectorXd& a,
                                                const Eigen::RowVectorXd& b) {
    Eigen::RowVectorXd ab = b - a;
    double len2 = ab.squaredNorm();
    if (!(len2 > 0.0)) throw DataError("degenerate edge: endpoints coincide");
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    double d2 = (p - (a + t * ab)).squaredNorm();
    return {t, d2};
}

EdgeProjection project_dataset(const ElasticGraph& g, const Matrix& phi,
                               const PointCloud& cloud) {
    if (g.edges.empty()) throw DataError("cannot project onto an edgeless graph");
    const int n = cloud.n();
    EdgeProjection proj;
    proj.edge.resize(n);
    proj.t.resize(n);
    proj.sqdist.resize(n);
    for (int i = 0; i < n; ++i) {
        int best = -1;
        double bt = 0.0, bd = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            auto [t, d2] = project_point_on_edge(
                cloud.x.row(i), phi.row(g.edges[e][0]), phi.row(g.edges[e][1]));
            if (d2 < bd) {
                bd = d2;
                bt = t;
                best = static_cast<int>(e);
            }
        }
        proj.edge[i] = best;
        proj.t[i] = bt;
        proj.sqdist[i] = bd;
    }
    return proj;
}

std::pair<ElasticGraph, Matrix> extend_leaves(const ElasticGraph& g,
                                              const Matrix& phi,
                                              const PointCloud& cloud,
                                              const Partition& partition,
                                              const EdgeProjection& proj,
                                              ExtendMode mode,
                                              double mu_default) {
    auto deg = g.degrees();

    struct Extension {
        int leaf;
        int edge;
        Eigen::RowVectorXd pos;
    };
    std::vector<Extension> exts;

    for (int v = 0; v < g.node_count; ++v) {
        if (deg[v] != 1) continue;
        int ei = -1;
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            if (g.edges[e][0] == v || g.edges[e][1] == v) {
                ei = static_cast<int>(e);
                break;
            }
        const double leaf_t = g.edges[ei][0] == v ? 0.0 : 1.0;

        Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(phi.cols());
        double wsum = 0.0;
        std::vector<int> members;
        for (int i = 0; i < cloud.n(); ++i) {
            if (partition.assign[i] != v) continue;
            if (proj.edge[i] != ei || proj.t[i] != leaf_t) continue;
            centroid += cloud.w(i) * cloud.x.row(i);
            wsum += cloud.w(i);
            members.push_back(i);
        }
        if (members.empty()) continue;
        centroid /= wsum;

        Eigen::RowVectorXd dir = centroid - phi.row(v);
        double dist = dir.norm();
        if (!(dist > 0.0)) continue;
        dir /= dist;
        if (mode == ExtendMode::Max) {
            double far = 0.0;
            for (int i : members)
                far = std::max(far,
                               (cloud.x.row(i) - phi.row(v)).dot(dir));
            dist = far;
        }
        exts.push_back({v, ei, phi.row(v) + dist * dir});
    }

    ElasticGraph out = g;
    Matrix pos(g.node_count + static_cast<int>(exts.size()), phi.cols());
    pos.topRows(g.node_count) = phi;
    for (std::size_t k = 0; k < exts.size(); ++k) {
        int c = g.node_count + static_cast<int>(k);
        out.node_count = c + 1;
        out.edges.push_back({exts[k].leaf, c});
        out.lambda.push_back(g.lambda[exts[k].edge]);
        out.mu[exts[k].leaf] = mu_default;
        out.mu.push_back(0.0);
        pos.row(c) = exts[k].pos;
    }
    out.canonicalize();
    return {std::move(out), std::move(pos)};
}

std::pair<ElasticGraph, Matrix> filter_branches(const ElasticGraph& g,
                                                const Matrix& phi,
                                                const EdgeProjection& proj,
                                                int min_points) {
    if (min_points <= 0) return {g, phi};
    std::vector<int> counts(g.edges.size(), 0);
    for (int e : proj.edge)
        if (e >= 0 && e < static_cast<int>(counts.size())) ++counts[e];

    ElasticGraph pruned;
    pruned.node_count = g.node_count;
    pruned.mu = g.mu;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (counts[e] < min_points) continue;
        pruned.edges.push_back(g.edges[e]);
        pruned.lambda.push_back(g.lambda[e]);
    }

    auto deg = pruned.degrees();
    std::vector<int> remap(g.node_count, -1);
    int kept = 0;
    for (int v = 0; v < g.node_count; ++v)
        if (deg[v] > 0) remap[v] = kept++;
    if (kept == 0) throw NumericError("branch filtering removed every node");

    ElasticGraph out;
    out.node_count = kept;
    out.mu.resize(kept);
    Matrix pos(kept, phi.cols());
    for (int v = 0; v < g.node_count; ++v)
        if (remap[v] >= 0) {
            out.mu[remap[v]] = pruned.mu[v];
            pos.row(remap[v]) = phi.row(v);
        }
    for (std::size_t e = 0; e < pruned.edges.size(); ++e) {
        int a = remap[pruned.edges[e][0]], b = remap[pruned.edges[e][1]];
        if (a > b) std::swap(a, b);
        out.edges.push_back({a, b});
        out.lambda.push_back(pruned.lambda[e]);
    }
    auto outdeg = out.degrees();
    for (int v = 0; v < out.node_count; ++v)
        if (outdeg[v] < 2) out.mu[v] = 0.0;
    out.canonicalize();
    return {std::move(out), std::move(pos)};
}

std::vector<Branch> extract_branches(const ElasticGraph& g) {
    auto deg = g.degrees();
    // Incident (neighbor, edge index) lists in ascending neighbor order.
    std::vector<std::vector<std::pair<int, int>>> inc(g.node_count);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        inc[g.edges[e][0]].push_back({g.edges[e][1], static_cast<int>(e)});
        inc[g.edges[e][1]].push_back({g.edges[e][0], static_cast<int>(e)});
    }
    for (auto& l : inc) std::sort(l.begin(), l.end());

    std::vector<bool> used(g.edges.size(), false);
    std::vector<Branch> branches;

    auto walk = [&](int start, int edge, int next) {
        Branch b;
        b.nodes.push_back(start);
        int cur = next, prev_edge = edge;
        used[edge] = true;
        b.nodes.push_back(cur);
        while (deg[cur] == 2 && cur != start) {
            int ne = -1, nn = -1;
            for (auto [u, e] : inc[cur])
                if (e != prev_edge) {
                    ne = e;
                    nn = u;
                    break;
                }
            if (ne < 0 || used[ne]) break;
            used[ne] = true;
            b.nodes.push_back(nn);
            prev_edge = ne;
            cur = nn;
        }
        b.cycle = b.nodes.front() == b.nodes.back();
        return b;
    };

    // Branches anchored at nodes of degree != 2.
    for (int v = 0; v < g.node_count; ++v) {
        if (deg[v] == 2 || deg[v] == 0) continue;
        for (auto [u, e] : inc[v])
            if (!used[e]) branches.push_back(walk(v, e, u));
    }
    // Remaining edges belong to pure-cycle components.
    for (int v = 0; v < g.node_count; ++v)
        for (auto [u, e] : inc[v])
            if (!used[e]) branches.push_back(walk(v, e, u));
    return branches;
}

PathInfo build_path(const ElasticGraph& g, const Matrix& phi, int root,
                    int leaf) {
    if (root < 0 || root >= g.node_count || leaf < 0 || leaf >= g.node_count)
        throw DataError("path endpoints out of range");
    if (root == leaf) throw DataError("root and leaf must differ");

    auto adj = g.adjacency();
    // Fewest-edges distance from the leaf, then a greedy walk from the root
    // picking the smallest admissible neighbor: lexicographically smallest
    // shortest path.
    std::vector<int> dist(g.node_count, -1);
    std::queue<int> q;
    dist[leaf] = 0;
    q.push(leaf);
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int u : adj[v])
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                q.push(u);
            }
    }
    if (dist[root] < 0) throw DataError("root and leaf are disconnected");

    PathInfo path;
    path.nodes.push_back(root);
    int cur = root;
    while (cur != leaf) {
        int next = -1;
        for (int u : adj[cur])
            if (dist[u] == dist[cur] - 1) {
                next = u;
                break;
            }
        path.nodes.push_back(next);
        cur = next;
    }

    const int np = static_cast<int>(path.nodes.size());
    path.arc.resize(np);
    path.arc[0] = 0.0;
    for (int k = 1; k < np; ++k)
        path.arc[k] = path.arc[k - 1] +
                      (phi.row(path.nodes[k]) - phi.row(path.nodes[k - 1]))
                          .norm();

    auto deg = g.degrees();
    std::vector<int> boundaries{0};
    for (int k = 1; k + 1 < np; ++k)
        if (deg[path.nodes[k]] >= 3) boundaries.push_back(k);
    boundaries.push_back(np - 1);

    const int nb = static_cast<int>(boundaries.size());
    path.pt.resize(np);
    for (int s = 0; s + 1 < nb; ++s) {
        int lo = boundaries[s], hi = boundaries[s + 1];
        double pt_lo = static_cast<double>(s) / (nb - 1);
        double pt_hi = static_cast<double>(s + 1) / (nb - 1);
        double span = path.arc[hi] - path.arc[lo];
        for (int k = lo; k <= hi; ++k) {
            double f = span > 0.0 ? (path.arc[k] - path.arc[lo]) / span
                                  : (k == hi ? 1.0 : 0.0);
            path.pt[k] = pt_lo + f * (pt_hi - pt_lo);
        }
    }
    return path;
}

double path_pseudotime_at(const PathInfo& path, double arc_pos) {
    const int np = static_cast<int>(path.nodes.size());
    if (arc_pos <= path.arc.front()) return path.pt.front();
    if (arc_pos >= path.arc.back()) return path.pt.back();
    for (int k = 0; k + 1 < np; ++k) {
        if (arc_pos <= path.arc[k + 1]) {
            double span = path.arc[k + 1] - path.arc[k];
            double f = span > 0.0 ? (arc_pos - path.arc[k]) / span : 1.0;
            return path.pt[k] + f * (path.pt[k + 1] - path.pt[k]);
        }
    }
    return path.pt.back();
}

double project_onto_path(const PathInfo& path, const Matrix& phi,
                         const Eigen::RowVectorXd& point) {
    double best_arc = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
        auto [t, d2] = project_point_on_edge(point, phi.row(path.nodes[k]),
                                             phi.row(path.nodes[k + 1]));
        if (d2 < best_d) {
            best_d = d2;
            best_arc = path.arc[k] + t * (path.arc[k + 1] - path.arc[k]);
        }
    }
    return best_arc;
}

PseudotimeTable pseudotime(const ElasticGraph& g, const Matrix& phi,
                           const EdgeProjection& proj, const PathInfo& path) {
    // Map each on-path edge index to (segment index, traversed forward).
    std::map<int, std::pair<int, bool>> on_path;
    for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
        int a = path.nodes[k], b = path.nodes[k + 1];
        int e = g.find_edge(a, b);
        if (e < 0) throw DataError("path traverses a missing edge");
        bool forward = g.edges[e][0] == a;
        on_path[e] = {static_cast<int>(k), forward};
    }

    PseudotimeTable table;
    table.path = &path;
    const int n = static_cast<int>(proj.edge.size());
    table.pt.assign(n, -1.0);
    table.on_path.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        auto it = on_path.find(proj.edge[i]);
        if (it == on_path.end()) continue;
        auto [k, forward] = it->second;
        double t = forward ? proj.t[i] : 1.0 - proj.t[i];
        double arc = path.arc[k] + t * (path.arc[k + 1] - path.arc[k]);
        table.pt[i] = path_pseudotime_at(path, arc);
        table.on_path[i] = 1;
    }
    return table;
}

} // namespace elpi
