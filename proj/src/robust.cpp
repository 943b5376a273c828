#include "elpi/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "elpi/analysis.hpp"

namespace elpi {

namespace {

std::vector<int> sample_indices(int n, int k, std::uint64_t seed) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (k >= n) return idx;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Neighbor counts of every point against a bounded reference sample.
std::vector<int> density_counts(const PointCloud& cloud, double radius,
                                std::uint64_t seed) {
    auto ref = sample_indices(cloud.n(), 2000, seed);
    const double r2 = radius * radius;
    std::vector<int> counts(cloud.n(), 0);
    for (int i = 0; i < cloud.n(); ++i) {
        int c = 0;
        for (int j : ref)
            if ((cloud.x.row(i) - cloud.x.row(j)).squaredNorm() <= r2) ++c;
        counts[i] = c;
    }
    return counts;
}

} // namespace

double estimate_trimming_radius(const PointCloud& cloud, int sample_size,
                                double quantile, std::uint64_t seed) {
    cloud.check();
    if (sample_size < 2) throw ConfigError("sample_size must be >= 2");
    if (quantile < 0.0 || quantile > 1.0)
        throw ConfigError("quantile must be in [0, 1]");
    if (cloud.n() < 2) throw DataError("need at least 2 points");

    auto idx = sample_indices(cloud.n(), sample_size, seed);
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = i + 1; j < idx.size(); ++j)
            dists.push_back((cloud.x.row(idx[i]) - cloud.x.row(idx[j])).norm());
    std::sort(dists.begin(), dists.end());
    double r0 = dists[static_cast<std::size_t>(
        quantile * static_cast<double>(dists.size() - 1))];
    if (!(r0 > 0.0))
        throw DataError("zero trimming radius: sampled points coincide");
    return r0;
}

std::pair<ElasticGraph, Matrix> density_seed(const PointCloud& cloud,
                                             double density_radius,
                                             double lambda,
                                             std::uint64_t seed) {
    cloud.check();
    if (!(density_radius > 0.0))
        throw ConfigError("density_radius must be > 0");

    auto counts = density_counts(cloud, density_radius, seed);
    int first = 0;
    for (int i = 1; i < cloud.n(); ++i)
        if (counts[i] > counts[first]) first = i;

    int second = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cloud.n(); ++i) {
        if (i == first) continue;
        double d = (cloud.x.row(i) - cloud.x.row(first)).squaredNorm();
        if (d > 0.0 && d < best) {
            best = d;
            second = i;
        }
    }
    if (second < 0) throw DataError("density seed needs 2 distinct points");

    ElasticGraph g;
    g.node_count = 2;
    g.edges.push_back({0, 1});
    g.lambda.push_back(lambda);
    g.mu.assign(2, 0.0);
    Matrix phi(2, cloud.dim());
    phi.row(0) = cloud.x.row(first);
    phi.row(1) = cloud.x.row(second);
    return {std::move(g), std::move(phi)};
}

ForestResult principal_forest(const PointCloud& cloud, const Strategy& strategy,
                              const FitConfig& config, int min_remaining,
                              int threads, std::uint64_t seed) {
    cloud.check();
    config.check();

    ForestResult forest;
    forest.point_labels.assign(cloud.n(), -1);
    std::vector<int> remaining(cloud.n());
    std::iota(remaining.begin(), remaining.end(), 0);

    const double r0sq = config.r0 * config.r0;
    while (static_cast<int>(remaining.size()) > std::max(min_remaining, 1)) {
        PointCloud sub = cloud.subset(remaining);
        double density_radius =
            estimate_trimming_radius(sub, 1000, 0.25, seed);
        Strategy strat = strategy;
        strat.init = density_seed(sub, density_radius, config.lambda, seed);
        PrincipalGraphResult fit = grow_graph(sub, strat, config, threads);

        std::vector<int> kept;
        int captured = 0;
        const int gi = static_cast<int>(forest.graphs.size());
        for (int i : remaining) {
            double best = std::numeric_limits<double>::infinity();
            for (int v = 0; v < fit.graph.node_count; ++v)
                best = std::min(best, (cloud.x.row(i) - fit.embedding.row(v))
                                          .squaredNorm());
            if (best < r0sq) {
                forest.point_labels[i] = gi;
                ++captured;
            } else {
                kept.push_back(i);
            }
        }
        if (captured == 0) break;
        forest.graphs.push_back(std::move(fit));
        remaining = std::move(kept);
    }
    return forest;
}

MazeResult travel_maze_cluster(const PointCloud& cloud, int curve_nodes,
                               const FitConfig& config, int max_curves,
                               int threads, std::uint64_t seed) {
    cloud.check();
    config.check();
    if (!std::isfinite(config.r0))
        throw ConfigError("travel maze requires a finite trimming radius");

    MazeResult maze;
    std::vector<bool> captured(cloud.n(), false);
    const double r0sq = config.r0 * config.r0;

    while (static_cast<int>(maze.curves.size()) < max_curves) {
        std::vector<int> open;
        for (int i = 0; i < cloud.n(); ++i)
            if (!captured[i]) open.push_back(i);
        if (open.size() < 2) break;

        // Seed: densest uncaptured point plus its nearest uncaptured
        // distinct neighbor.
        PointCloud sub = cloud.subset(open);
        double density_radius =
            estimate_trimming_radius(sub, 1000, 0.25, seed);
        auto counts = density_counts(sub, density_radius, seed);
        int first = 0;
        for (std::size_t i = 1; i < open.size(); ++i)
            if (counts[i] > counts[first]) first = static_cast<int>(i);
        int second = -1;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (static_cast<int>(i) == first) continue;
            double d = (sub.x.row(i) - sub.x.row(first)).squaredNorm();
            if (d > 0.0 && d < bestd) {
                bestd = d;
                second = static_cast<int>(i);
            }
        }
        if (second < 0) break;

        ElasticGraph g;
        g.node_count = 2;
        g.edges.push_back({0, 1});
        g.lambda.push_back(config.lambda);
        g.mu.assign(2, 0.0);
        Matrix phi(2, cloud.dim());
        phi.row(0) = sub.x.row(first);
        phi.row(1) = sub.x.row(second);

        Strategy strat = make_strategy(StrategyKind::Curve, curve_nodes,
                                       config.alpha);
        strat.init = {std::move(g), std::move(phi)};
        // The curve is fitted against the complete dataset; trimming keeps
        // it local to the seeded thread.
        PrincipalGraphResult fit = grow_graph(cloud, strat, config, threads);

        int newly = 0;
        for (int i = 0; i < cloud.n(); ++i) {
            if (captured[i]) continue;
            for (int v = 0; v < fit.graph.node_count; ++v)
                if ((cloud.x.row(i) - fit.embedding.row(v)).squaredNorm() <
                    r0sq) {
                    captured[i] = true;
                    ++newly;
                    break;
                }
        }
        if (newly == 0) break;
        maze.curves.push_back(std::move(fit));
    }

    // Nearest-curve labels over the whole dataset, by segment distance.
    maze.labels.assign(cloud.n(), -1);
    if (!maze.curves.empty()) {
        for (int i = 0; i < cloud.n(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < maze.curves.size(); ++c) {
                const auto& cur = maze.curves[c];
                for (const auto& e : cur.graph.edges) {
                    auto [t, d2] = project_point_on_edge(
                        cloud.x.row(i), cur.embedding.row(e[0]),
                        cur.embedding.row(e[1]));
                    (void)t;
                    if (d2 < best) {
                        best = d2;
                        maze.labels[i] = static_cast<int>(c);
                    }
                }
            }
        }
    }
    return maze;
}

} // namespace elpi
