#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "elpi/analysis.hpp"
#include "elpi/fit.hpp"
#include "support/datasets.hpp"
#include "support/oracles.hpp"

using namespace elpi;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

} // namespace

TEST_CASE("point above the midpoint of a unit segment projects at t 0.5") {
    Eigen::RowVector2d p(0.5, 1.0), a(0.0, 0.0), b(1.0, 0.0);
    auto [t, d] = project_point_on_edge(p, a, b);
    CHECK(t == 0.5);
    CHECK(d == 1.0);
}

TEST_CASE("point beyond endpoint b clamps to t 1") {
    Eigen::RowVector2d p(2.0, 0.0), a(0.0, 0.0), b(1.0, 0.0);
    auto [t, d] = project_point_on_edge(p, a, b);
    CHECK(t == 1.0);
    CHECK(d == 1.0);
}

TEST_CASE("point on the segment has zero squared distance") {
    Eigen::RowVector2d p(0.25, 0.0), a(0.0, 0.0), b(1.0, 0.0);
    auto [t, d] = project_point_on_edge(p, a, b);
    CHECK(t == 0.25);
    CHECK(d == 0.0);
}

TEST_CASE("degenerate zero-length edge raises a data error") {
    Eigen::RowVector2d p(0.0, 1.0), a(0.5, 0.5);
    CHECK_THROWS_AS(project_point_on_edge(p, a, a), DataError);
}

TEST_CASE("single-edge graph projects everything onto that edge") {
    auto g = ElasticGraph::chain(2, 1.0, 0.0);
    Matrix phi(2, 2);
    phi << 0, 0, 1, 0;
    auto cloud = testsup::random_cloud(50, 2, 91);
    auto proj = project_dataset(g, phi, cloud);
    for (int i = 0; i < 50; ++i) CHECK(proj.edge[i] == 0);
}

TEST_CASE("projection matches the brute-force per-edge oracle exactly") {
    std::mt19937_64 rng(93);
    for (int rep = 0; rep < 10; ++rep) {
        auto g = testsup::random_tree(7, rng);
        Matrix phi = testsup::random_embedding(7, 3, rng);
        auto cloud = testsup::random_cloud(100, 3, 200 + rep);
        auto proj = project_dataset(g, phi, cloud);
        auto oracle = testsup::brute_projection(g, phi, cloud);
        CHECK(proj.edge == oracle.edge);
        CHECK(proj.t == oracle.t);
        CHECK(proj.sqdist == oracle.sqdist);
    }
}

TEST_CASE("reported sqdist is minimal over all edges") {
    std::mt19937_64 rng(95);
    auto g = testsup::random_tree(6, rng);
    Matrix phi = testsup::random_embedding(6, 2, rng);
    auto cloud = testsup::random_cloud(200, 2, 96);
    auto proj = project_dataset(g, phi, cloud);
    for (int i = 0; i < cloud.n(); ++i)
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            auto [t, d] = project_point_on_edge(cloud.x.row(i),
                                                phi.row(g.edges[e][0]),
                                                phi.row(g.edges[e][1]));
            (void)t;
            CHECK(proj.sqdist[i] <= d);
        }
}

TEST_CASE("extend_leaves is a no-op when the graph covers the extremes") {
    auto g = ElasticGraph::chain(3, 1.0, 0.5);
    Matrix phi(3, 2);
    phi << -1, 0, 0, 0, 1, 0;
    Matrix x(3, 2);
    x << -0.5, 0.1, 0.0, -0.1, 0.5, 0.1;
    auto cloud = PointCloud::uniform(x);
    auto part = partition_points(cloud, phi, kInf);
    auto proj = project_dataset(g, phi, cloud);
    auto [g2, phi2] =
        extend_leaves(g, phi, cloud, part, proj, ExtendMode::Centroid, 0.5);
    CHECK(g2.node_count == 3);
    CHECK((phi2 - phi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("centroid mode places the new node at the overhang centroid") {
    auto g = ElasticGraph::chain(2, 1.0, 0.0);
    Matrix phi(2, 2);
    phi << 0, 0, 1, 0;
    Matrix x(3, 2);
    x << 1.5, 0.5, 2.5, -0.5, 0.5, 0.0;
    auto cloud = PointCloud::uniform(x);
    auto part = partition_points(cloud, phi, kInf);
    auto proj = project_dataset(g, phi, cloud);
    auto [g2, phi2] =
        extend_leaves(g, phi, cloud, part, proj, ExtendMode::Centroid, 0.5);
    REQUIRE(g2.node_count == 3);
    // Overhang points beyond node 1: (1.5, 0.5) and (2.5, -0.5).
    CHECK(phi2(2, 0) == doctest::Approx(2.0));
    CHECK(phi2(2, 1) == doctest::Approx(0.0));
    // Existing nodes never move; the former leaf becomes a 2-star.
    CHECK((phi2.topRows(2) - phi).cwiseAbs().maxCoeff() == 0.0);
    CHECK(g2.mu[1] == 0.5);
}

TEST_CASE("max mode extends by the longest overhang projection") {
    auto g = ElasticGraph::chain(2, 1.0, 0.0);
    Matrix phi(2, 2);
    phi << 0, 0, 1, 0;
    Matrix x(2, 2);
    x << 2.0, 0.0, 3.0, 0.0;
    auto cloud = PointCloud::uniform(x);
    auto part = partition_points(cloud, phi, kInf);
    auto proj = project_dataset(g, phi, cloud);
    auto [g2, phi2] =
        extend_leaves(g, phi, cloud, part, proj, ExtendMode::Max, 0.5);
    REQUIRE(g2.node_count == 3);
    CHECK(phi2(2, 0) == doctest::Approx(3.0));
    CHECK(phi2(2, 1) == doctest::Approx(0.0));
}

TEST_CASE("filter_branches with min_points 0 is the identity") {
    auto g = ElasticGraph::chain(4, 1.0, 0.5);
    Matrix phi(4, 2);
    phi << 0, 0, 1, 0, 2, 0, 3, 0;
    auto cloud = testsup::random_cloud(30, 2, 97);
    auto proj = project_dataset(g, phi, cloud);
    auto [g2, phi2] = filter_branches(g, phi, proj, 0);
    CHECK(g2.node_count == 4);
    CHECK(g2.edges == g.edges);
    CHECK((phi2 - phi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a spurious 2-point branch is removed at min_points 5") {
    // Path 0-1-2-3 plus a stub 1-4; the stub catches only 2 points.
    ElasticGraph g;
    g.node_count = 5;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {1, 4}};
    g.lambda = {1, 1, 1, 1};
    g.mu = {0, 0.5, 0.5, 0, 0};
    Matrix phi(5, 2);
    phi << 0, 0, 1, 0, 2, 0, 3, 0, 1, 1;
    Matrix x(18, 2);
    x << 0.1, 0, 0.2, 0, 0.3, 0, 0.5, 0, 0.7, 0, 0.9, 0, 1.1, 0, 1.3, 0, 1.5,
        0, 1.7, 0, 1.9, 0, 2.1, 0, 2.3, 0, 2.5, 0, 2.7, 0, 2.9, 0, 1.0, 0.8,
        1.0, 1.2;
    auto cloud = PointCloud::uniform(x);
    auto proj = project_dataset(g, phi, cloud);
    auto [g2, phi2] = filter_branches(g, phi, proj, 5);
    CHECK(g2.node_count == 4);
    CHECK(g2.edges.size() == 3);
    CHECK(testsup::count_leaves(g2) == 2);
    (void)phi2;
}

TEST_CASE("removing every edge by filtering is an error") {
    auto g = ElasticGraph::chain(2, 1.0, 0.0);
    Matrix phi(2, 1);
    phi << 0.0, 1.0;
    Matrix x(1, 1);
    x << 0.5;
    auto cloud = PointCloud::uniform(x);
    auto proj = project_dataset(g, phi, cloud);
    CHECK_THROWS_AS(filter_branches(g, phi, proj, 10), NumericError);
}

TEST_CASE("a path graph is a single branch") {
    auto g = ElasticGraph::chain(5, 1.0, 0.5);
    auto branches = extract_branches(g);
    REQUIRE(branches.size() == 1);
    CHECK(branches[0].nodes.size() == 5);
    CHECK_FALSE(branches[0].cycle);
}

TEST_CASE("a 3-star splits into 3 branches at the center") {
    ElasticGraph g;
    g.node_count = 4;
    g.edges = {{0, 1}, {0, 2}, {0, 3}};
    g.lambda = {1, 1, 1};
    g.mu = {0.5, 0, 0, 0};
    auto branches = extract_branches(g);
    CHECK(branches.size() == 3);
    for (const auto& b : branches) CHECK(b.nodes.size() == 2);
}

TEST_CASE("a cycle with a tail gives the tail plus the loop") {
    // Triangle 0-1-2 with tail 0-3.
    ElasticGraph g;
    g.node_count = 4;
    g.edges = {{0, 1}, {0, 2}, {1, 2}, {0, 3}};
    g.lambda = {1, 1, 1, 1};
    g.mu = {0.5, 0, 0, 0};
    auto branches = extract_branches(g);
    CHECK(branches.size() == 2);
    std::size_t total_edges = 0;
    for (const auto& b : branches) total_edges += b.nodes.size() - 1;
    CHECK(total_edges == g.edges.size());
}

TEST_CASE("branches partition the edge set on random trees") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        auto g = testsup::random_tree(10, rng);
        auto branches = extract_branches(g);
        std::size_t total = 0;
        for (const auto& b : branches) total += b.nodes.size() - 1;
        CHECK(total == g.edges.size());
    }
}

TEST_CASE("pure cycle component is flagged") {
    auto g = ElasticGraph::cycle(5, 1.0, 0.5);
    auto branches = extract_branches(g);
    REQUIRE(branches.size() == 1);
    CHECK(branches[0].cycle);
    CHECK(branches[0].nodes.front() == branches[0].nodes.back());
}

TEST_CASE("3-edge path pseudotime is linear in arc length") {
    auto g = ElasticGraph::chain(4, 1.0, 0.5);
    Matrix phi(4, 2);
    phi << 0, 0, 1, 0, 2, 0, 4, 0; // total arc length 4
    auto path = build_path(g, phi, 0, 3);
    CHECK(path.pt.front() == 0.0);
    CHECK(path.pt.back() == 1.0);
    CHECK(path_pseudotime_at(path, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("interior branch nodes pin to i over B plus 1") {
    // Path 0-1-2-3-4 with extra leaves at nodes 1 and 3.
    ElasticGraph g;
    g.node_count = 7;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 5}, {3, 6}};
    g.lambda = {1, 1, 1, 1, 1, 1};
    g.mu = {0, 0.5, 0.5, 0.5, 0, 0, 0};
    Matrix phi(7, 2);
    phi << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0, 1, 1, 3, 1;
    auto path = build_path(g, phi, 0, 4);
    REQUIRE(path.nodes == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(path.pt[0] == 0.0);
    CHECK(path.pt[1] == doctest::Approx(1.0 / 3.0)); // branch node 1
    CHECK(path.pt[3] == doctest::Approx(2.0 / 3.0)); // branch node 3
    CHECK(path.pt[4] == 1.0);
    // Non-branch interior node 2 interpolates linearly between the pins.
    CHECK(path.pt[2] == doctest::Approx(0.5));
}

TEST_CASE("pseudotime table flags off-path points and stays in [0,1]") {
    ElasticGraph g;
    g.node_count = 5;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {1, 4}};
    g.lambda = {1, 1, 1, 1};
    g.mu = {0, 0.5, 0.5, 0, 0};
    Matrix phi(5, 2);
    phi << 0, 0, 1, 0, 2, 0, 3, 0, 1, 2;
    Matrix x(4, 2);
    x << 0.5, 0.1, 2.5, -0.1, 1.0, 1.5, 1.05, 1.9;
    auto cloud = PointCloud::uniform(x);
    auto proj = project_dataset(g, phi, cloud);
    auto path = build_path(g, phi, 0, 3);
    auto table = pseudotime(g, phi, proj, path);
    CHECK(table.on_path[0] == 1);
    CHECK(table.on_path[1] == 1);
    CHECK(table.on_path[2] == 0);
    CHECK(table.on_path[3] == 0);
    CHECK(table.pt[2] == -1.0);
    for (int i = 0; i < 4; ++i)
        if (table.on_path[i]) {
            CHECK(table.pt[i] >= 0.0);
            CHECK(table.pt[i] <= 1.0);
        }
}

TEST_CASE("pseudotime is monotone along the oriented path") {
    auto cloud = testsup::line_cloud(400, 0.02, 101);
    FitConfig cfg;
    auto g = ElasticGraph::chain(8, cfg.lambda, cfg.mu);
    auto init = init_default(cloud, cfg.lambda);
    // Fit a refined curve, then order points by arc-length position.
    Matrix seed(8, 2);
    for (int v = 0; v < 8; ++v)
        seed.row(v) = init.second.row(0) +
                      (init.second.row(1) - init.second.row(0)) * (v / 7.0);
    auto fit = fit_embedding(cloud, g, seed, cfg);
    auto proj = project_dataset(g, fit.embedding, cloud);
    int root = 0, leaf = 0;
    auto deg = g.degrees();
    std::vector<int> leaves;
    for (int v = 0; v < 8; ++v)
        if (deg[v] == 1) leaves.push_back(v);
    root = leaves[0];
    leaf = leaves[1];
    auto path = build_path(g, fit.embedding, root, leaf);
    auto table = pseudotime(g, fit.embedding, proj, path);

    std::vector<std::pair<double, double>> pos_pt;
    for (int i = 0; i < cloud.n(); ++i)
        if (table.on_path[i])
            pos_pt.push_back(
                {project_onto_path(path, fit.embedding, cloud.x.row(i)),
                 table.pt[i]});
    std::sort(pos_pt.begin(), pos_pt.end());
    for (std::size_t i = 1; i < pos_pt.size(); ++i)
        CHECK(pos_pt[i].second >= pos_pt[i - 1].second - 1e-12);
}
