#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "elpi/graph.hpp"
#include "elpi/energy.hpp"
#include "support/datasets.hpp"
#include "support/oracles.hpp"

using namespace elpi;

TEST_CASE("valid 3-node path has no violations") {
    auto g = ElasticGraph::chain(3, 1.0, 1.0);
    auto report = validate_graph(g);
    CHECK(report.ok());
}

TEST_CASE("self-loop edge is flagged") {
    ElasticGraph g;
    g.node_count = 3;
    g.edges = {{0, 1}, {2, 2}};
    g.lambda = {1.0, 1.0};
    g.mu = {0.0, 0.0, 0.0};
    auto report = validate_graph(g);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const auto& v : report.violations)
        if (v.kind == ValidationIssue::Kind::SelfLoop) found = true;
    CHECK(found);
}

TEST_CASE("positive mu at a leaf is flagged") {
    auto g = ElasticGraph::chain(3, 1.0, 1.0);
    g.mu[0] = 1.0;
    auto report = validate_graph(g);
    REQUIRE_FALSE(report.ok());
    bool found = false;
    for (const auto& v : report.violations)
        if (v.kind == ValidationIssue::Kind::MuAtNonCenter) found = true;
    CHECK(found);
}

TEST_CASE("duplicate edge, bad lambda and negative mu are flagged") {
    ElasticGraph g;
    g.node_count = 3;
    g.edges = {{0, 1}, {0, 1}, {1, 2}};
    g.lambda = {1.0, 1.0, -0.5};
    g.mu = {0.0, -1.0, 0.0};
    auto report = validate_graph(g);
    CHECK(report.violations.size() >= 3);
    CHECK_THROWS_AS(require_valid(g), DataError);
}

TEST_CASE("disconnected graph validates with an informational note") {
    ElasticGraph g;
    g.node_count = 4;
    g.edges = {{0, 1}, {2, 3}};
    g.lambda = {1.0, 1.0};
    g.mu = {0.0, 0.0, 0.0, 0.0};
    auto report = validate_graph(g);
    CHECK(report.ok());
    CHECK_FALSE(report.notes.empty());
}

// Frozen reference: path A-B-C, lambda=1, mu(B)=1. Oracle: one half the
// analytic gradient of lambda(a-b)^2 + lambda(b-c)^2 + mu(b-(a+c)/2)^2,
// cross-checked below by central differences.
TEST_CASE("three-node path Laplacian matches the frozen matrix") {
    auto g = ElasticGraph::chain(3, 1.0, 1.0);
    Matrix em = build_elastic_matrix(g, 0.0);
    Matrix l = graph_laplacian_sum(em, g);
    Matrix expected(3, 3);
    expected << 1.25, -1.5, 0.25, -1.5, 3.0, -1.5, 0.25, -1.5, 1.25;
    CHECK((l - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("elastic matrix holds alpha-folded edge weights and star mu") {
    ElasticGraph g;
    g.node_count = 4; // 3-star centered at 0
    g.edges = {{0, 1}, {0, 2}, {0, 3}};
    g.lambda = {1.0, 2.0, 3.0};
    g.mu = {0.5, 0.0, 0.0, 0.0};
    Matrix em = build_elastic_matrix(g, 0.25);
    CHECK(em(0, 1) == doctest::Approx(1.0 + 0.25).epsilon(1e-15));
    CHECK(em(0, 2) == doctest::Approx(2.0 + 0.25).epsilon(1e-15));
    CHECK(em(0, 3) == doctest::Approx(3.0 + 0.25).epsilon(1e-15));
    CHECK(em(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(em(1, 1) == 0.0);
    CHECK(em(1, 2) == 0.0);
}

TEST_CASE("decomposition is zero outside edges and star-leaf pairs") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        auto g = testsup::random_tree(8, rng);
        Matrix em = build_elastic_matrix(g, 0.1);
        auto dec = decompose_elastic_matrix(em, g);
        Matrix sum = dec.lambda_adj + dec.star_edges + dec.star_leaves;
        auto adj = g.adjacency();
        for (int i = 0; i < g.node_count; ++i)
            for (int j = 0; j < g.node_count; ++j) {
                if (i == j) continue;
                bool edge = g.find_edge(i, j) >= 0;
                bool star_pair = false;
                for (int c = 0; c < g.node_count; ++c) {
                    if (g.mu[c] <= 0.0 || c == i || c == j) continue;
                    if (g.find_edge(c, i) >= 0 && g.find_edge(c, j) >= 0)
                        star_pair = true;
                }
                if (!edge && !star_pair) CHECK(sum(i, j) == 0.0);
            }
    }
}

TEST_CASE("2 L Phi equals the finite-difference elastic gradient") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        int k = 3 + static_cast<int>(rng() % 10);
        int m = 1 + static_cast<int>(rng() % 4);
        auto g = testsup::random_tree(k, rng);
        Matrix phi = testsup::random_embedding(k, m, rng);
        double alpha = (rep % 3 == 0) ? 0.0 : 0.3;
        Matrix em = build_elastic_matrix(g, alpha);
        Matrix l = graph_laplacian_sum(em, g);
        Matrix analytic = 2.0 * l * phi;
        Matrix fd = testsup::fd_elastic_gradient(g, phi, alpha);
        double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
        CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale <= 1e-6);
    }
}

TEST_CASE("pairwise-spring rewrite equals the harmonicity form") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        int k = 3 + static_cast<int>(rng() % 10);
        auto g = testsup::random_tree(k, rng);
        Matrix phi = testsup::random_embedding(k, 3, rng);
        auto [ue, ur] = elastic_energy(g, phi, 0.0);
        (void)ue;
        double springs = testsup::ur_pairwise_springs(g, phi);
        double scale = std::max(1.0, std::abs(ur));
        CHECK(std::abs(ur - springs) / scale <= 1e-10);
    }
}

TEST_CASE("canonicalize sorts edges and carries lambda along") {
    ElasticGraph g;
    g.node_count = 3;
    g.edges = {{2, 1}, {1, 0}};
    g.lambda = {5.0, 7.0};
    g.mu = {0.0, 0.0, 0.0};
    g.canonicalize();
    CHECK(g.edges[0] == std::array<int, 2>{0, 1});
    CHECK(g.edges[1] == std::array<int, 2>{1, 2});
    CHECK(g.lambda[0] == 7.0);
    CHECK(g.lambda[1] == 5.0);
}
