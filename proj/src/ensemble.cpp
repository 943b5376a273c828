#include "elpi/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "elpi/parallel.hpp"
#include "elpi/robust.hpp"

namespace elpi {

namespace {

std::vector<int> draw_sample(int n, int k, std::uint64_t seed) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < k && i < n - 1; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(std::min(k, n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 step
    std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct KMeansRun {
    std::vector<int> assign;
    Matrix centroids;
    double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun kmeans_once(const Matrix& pts, int k, int max_iter,
                      std::uint64_t seed) {
    const int n = static_cast<int>(pts.rows());
    std::mt19937_64 rng(seed);

    // k-means++ seeding.
    Matrix centroids(k, pts.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::uniform_int_distribution<int> pick0(0, n - 1);
    centroids.row(0) = pts.row(pick0(rng));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i],
                             (pts.row(i) - centroids.row(c - 1)).squaredNorm());
            total += d2[i];
        }
        int chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double r = u(rng), acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick0(rng);
        }
        centroids.row(c) = pts.row(chosen);
    }

    KMeansRun run;
    run.assign.assign(n, 0);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (pts.row(i) - centroids.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                double d = (pts.row(i) - centroids.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (run.assign[i] != best) {
                run.assign[i] = best;
                changed = true;
            }
        }
        Matrix sums = Matrix::Zero(k, pts.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(run.assign[i]) += pts.row(i);
            ++counts[run.assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centroids.row(c) = sums.row(c) / counts[c];
            } else {
                // Re-seed an empty cluster from the farthest point.
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    double d = (pts.row(i) - centroids.row(run.assign[i]))
                                   .squaredNorm();
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centroids.row(c) = pts.row(far);
                changed = true;
            }
        }
        if (!changed && it > 0) break;
    }

    run.inertia = 0.0;
    for (int i = 0; i < n; ++i)
        run.inertia += (pts.row(i) - centroids.row(run.assign[i])).squaredNorm();
    run.centroids = std::move(centroids);
    return run;
}

KMeansRun kmeans_best(const Matrix& pts, int k, const KMeansConfig& cfg) {
    KMeansRun best;
    for (int r = 0; r < cfg.restarts; ++r) {
        KMeansRun run = kmeans_once(pts, k, cfg.max_iter,
                                    mix_seed(cfg.seed, 1000 + r));
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

} // namespace

GraphEnsemble bootstrap_ensemble(const PointCloud& cloud,
                                 const Strategy& strategy,
                                 const FitConfig& config, int k, double p,
                                 std::uint64_t seed, int threads) {
    cloud.check();
    if (k < 1) throw ConfigError("ensemble needs k >= 1 replicas");
    if (!(p > 0.0) || p > 1.0) throw ConfigError("sample fraction must be in (0, 1]");
    const int sample_size =
        static_cast<int>(std::ceil(p * static_cast<double>(cloud.n())));
    if (sample_size < 2)
        throw DataError("ensemble sample too small for strategy init");

    GraphEnsemble ens;
    ens.fraction = p;
    ens.seed = seed;
    ens.members.resize(k);
    parallel_for(k, threads, [&](int i) {
        auto idx = draw_sample(cloud.n(), sample_size, mix_seed(seed, i));
        PointCloud sub = cloud.subset(idx);
        PrincipalGraphResult fit = grow_graph(sub, strategy, config, 1);
        ens.members[i] = {std::move(fit.graph), std::move(fit.embedding),
                          std::move(idx)};
    });
    return ens;
}

namespace {

void rebuild_consensus(ConsensusGraph& c, const std::vector<int>& active) {
    // Cluster the active pooled nodes, then recount cross-cluster edges.
    Matrix pts(active.size(), c.pooled.cols());
    for (std::size_t i = 0; i < active.size(); ++i)
        pts.row(static_cast<int>(i)) = c.pooled.row(active[i]);
    if (static_cast<int>(active.size()) < c.clusters)
        throw NumericError("fewer pooled nodes than consensus clusters");

    KMeansRun run = kmeans_best(pts, c.clusters, c.kmeans);
    c.cluster_of.assign(c.pooled.rows(), -1);
    for (std::size_t i = 0; i < active.size(); ++i)
        c.cluster_of[active[i]] = run.assign[i];
    c.positions = std::move(run.centroids);

    std::map<std::array<int, 2>, int> counts;
    for (const auto& e : c.pooled_edges) {
        int a = c.cluster_of[e[0]], b = c.cluster_of[e[1]];
        if (a < 0 || b < 0 || a == b) continue;
        if (a > b) std::swap(a, b);
        ++counts[{a, b}];
    }
    c.edges.clear();
    c.weights.clear();
    for (const auto& [e, cnt] : counts)
        if (cnt > c.edge_threshold) {
            c.edges.push_back(e);
            c.weights.push_back(cnt);
        }
}

} // namespace

ConsensusGraph consensus_graph(const GraphEnsemble& ensemble, int clusters,
                               int edge_threshold, const KMeansConfig& kmeans) {
    if (ensemble.members.empty()) throw DataError("empty ensemble");
    if (clusters < 2) throw ConfigError("consensus needs at least 2 clusters");

    ConsensusGraph c;
    c.clusters = clusters;
    c.edge_threshold = edge_threshold;
    c.replicas = static_cast<int>(ensemble.members.size());
    c.kmeans = kmeans;

    int total = 0;
    for (const auto& m : ensemble.members) total += m.graph.node_count;
    if (total < clusters)
        throw DataError("fewer pooled member nodes than consensus clusters");

    c.pooled.resize(total, ensemble.members[0].embedding.cols());
    c.pooled_member.resize(total);
    int off = 0;
    for (std::size_t mi = 0; mi < ensemble.members.size(); ++mi) {
        const auto& m = ensemble.members[mi];
        c.pooled.middleRows(off, m.graph.node_count) = m.embedding;
        for (int v = 0; v < m.graph.node_count; ++v)
            c.pooled_member[off + v] = static_cast<int>(mi);
        for (const auto& e : m.graph.edges)
            c.pooled_edges.push_back({off + e[0], off + e[1]});
        off += m.graph.node_count;
    }

    std::vector<int> active(total);
    std::iota(active.begin(), active.end(), 0);
    rebuild_consensus(c, active);
    return c;
}

ConsensusGraph filter_consensus(const ConsensusGraph& consensus,
                                const ConsensusFilters& filters) {
    ConsensusGraph c = consensus;

    std::vector<int> active;
    if (filters.density_filter) {
        double radius = filters.density_radius;
        if (!(radius > 0.0)) {
            PointCloud pool = PointCloud::uniform(c.pooled);
            radius = estimate_trimming_radius(pool, 1000, 0.1, c.kmeans.seed);
        }
        double min_count = filters.density_min_count > 0.0
                               ? filters.density_min_count
                               : 0.05 * c.replicas;
        const double r2 = radius * radius;
        for (int i = 0; i < c.pooled.rows(); ++i) {
            int cnt = 0;
            for (int j = 0; j < c.pooled.rows(); ++j)
                if ((c.pooled.row(i) - c.pooled.row(j)).squaredNorm() <= r2)
                    ++cnt;
            if (static_cast<double>(cnt - 1) >= min_count) active.push_back(i);
        }
        if (active.empty())
            throw NumericError("density filter removed every pooled node");
    } else {
        active.resize(c.pooled.rows());
        std::iota(active.begin(), active.end(), 0);
    }

    rebuild_consensus(c, active);

    if (filters.edge_len_min || filters.edge_len_max) {
        std::vector<std::array<int, 2>> edges;
        std::vector<int> weights;
        for (std::size_t e = 0; e < c.edges.size(); ++e) {
            double len = (c.positions.row(c.edges[e][0]) -
                          c.positions.row(c.edges[e][1]))
                             .norm();
            if (filters.edge_len_min && len < *filters.edge_len_min) continue;
            if (filters.edge_len_max && len > *filters.edge_len_max) continue;
            edges.push_back(c.edges[e]);
            weights.push_back(c.weights[e]);
        }
        c.edges = std::move(edges);
        c.weights = std::move(weights);
    }

    if (filters.drop_unconnected) {
        std::vector<int> deg(c.positions.rows(), 0);
        for (const auto& e : c.edges) {
            ++deg[e[0]];
            ++deg[e[1]];
        }
        std::vector<int> remap(c.positions.rows(), -1);
        int kept = 0;
        for (int v = 0; v < c.positions.rows(); ++v)
            if (deg[v] > 0) remap[v] = kept++;
        if (kept == 0)
            throw NumericError("consensus filtering removed every node");
        Matrix pos(kept, c.positions.cols());
        for (int v = 0; v < c.positions.rows(); ++v)
            if (remap[v] >= 0) pos.row(remap[v]) = c.positions.row(v);
        for (auto& e : c.edges) e = {remap[e[0]], remap[e[1]]};
        for (int& cl : c.cluster_of)
            if (cl >= 0) cl = remap[cl];
        c.positions = std::move(pos);
    }
    return c;
}

std::array<double, 2> branch_point_interval(const GraphEnsemble& ensemble,
                                            const PathInfo& reference_path,
                                            const Matrix& reference_embedding,
                                            int reference_branch_node) {
    if (ensemble.members.empty()) throw DataError("empty ensemble");
    Eigen::RowVectorXd ref = reference_embedding.row(reference_branch_node);

    std::vector<double> values;
    for (const auto& m : ensemble.members) {
        auto deg = m.graph.degrees();
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int v = 0; v < m.graph.node_count; ++v) {
            if (deg[v] < 3) continue;
            double d = (m.embedding.row(v) - ref).squaredNorm();
            if (d < bd) {
                bd = d;
                best = v;
            }
        }
        if (best < 0) continue; // member without branch nodes
        double arc = project_onto_path(reference_path, reference_embedding,
                                       m.embedding.row(best));
        values.push_back(path_pseudotime_at(reference_path, arc));
    }
    if (values.empty())
        throw NumericError("no ensemble member has a branch node");

    std::sort(values.begin(), values.end());
    auto quant = [&](double q) {
        double pos = q * static_cast<double>(values.size() - 1);
        std::size_t lo = static_cast<std::size_t>(pos);
        std::size_t hi = std::min(lo + 1, values.size() - 1);
        double f = pos - static_cast<double>(lo);
        return values[lo] + f * (values[hi] - values[lo]);
    };
    return {quant(0.025), quant(0.975)};
}

} // namespace elpi
