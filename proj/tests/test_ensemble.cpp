#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "elpi/ensemble.hpp"
#include "support/datasets.hpp"
#include "support/oracles.hpp"

using namespace elpi;

TEST_CASE("single full-fraction member equals a direct grow_graph run") {
    auto cloud = testsup::line_cloud(200, 0.03, 121);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Curve, 6, 0.0);
    auto ens = bootstrap_ensemble(cloud, strat, cfg, 1, 1.0, 42);
    auto direct = grow_graph(cloud, strat, cfg);
    REQUIRE(ens.members.size() == 1);
    CHECK(ens.members[0].graph.edges == direct.graph.edges);
    CHECK((ens.members[0].embedding - direct.embedding).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(ens.members[0].sample_indices.size() == 200);
}

TEST_CASE("members are fitted on ceil(p n) distinct sorted indices") {
    auto cloud = testsup::line_cloud(100, 0.03, 123);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Curve, 4, 0.0);
    auto ens = bootstrap_ensemble(cloud, strat, cfg, 5, 0.73, 7);
    REQUIRE(ens.members.size() == 5);
    for (const auto& m : ens.members) {
        CHECK(m.sample_indices.size() == 73);
        for (std::size_t i = 1; i < m.sample_indices.size(); ++i)
            CHECK(m.sample_indices[i] > m.sample_indices[i - 1]);
    }
    // Distinct seeds give distinct samples.
    CHECK(ens.members[0].sample_indices != ens.members[1].sample_indices);
}

TEST_CASE("ensembles are bitwise deterministic under a fixed seed") {
    auto cloud = testsup::line_cloud(150, 0.03, 125);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Curve, 5, 0.0);
    auto a = bootstrap_ensemble(cloud, strat, cfg, 6, 0.8, 11, 4);
    auto b = bootstrap_ensemble(cloud, strat, cfg, 6, 0.8, 11, 1);
    REQUIRE(a.members.size() == b.members.size());
    for (std::size_t i = 0; i < a.members.size(); ++i) {
        CHECK(a.members[i].sample_indices == b.members[i].sample_indices);
        CHECK((a.members[i].embedding - b.members[i].embedding)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }
}

namespace {

GraphEnsemble small_ensemble(std::uint64_t seed = 13) {
    auto cloud = testsup::line_cloud(300, 0.05, 127);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Curve, 6, 0.0);
    return bootstrap_ensemble(cloud, strat, cfg, 10, 0.8, seed);
}

} // namespace

TEST_CASE("consensus nodes are cluster centroids inside the pooled hull") {
    auto ens = small_ensemble();
    KMeansConfig km;
    km.seed = 3;
    auto cons = consensus_graph(ens, 6, 0, km);
    REQUIRE(cons.positions.rows() <= 6);

    for (int c = 0; c < cons.positions.cols(); ++c) {
        double lo = cons.pooled.col(c).minCoeff();
        double hi = cons.pooled.col(c).maxCoeff();
        for (int v = 0; v < cons.positions.rows(); ++v) {
            CHECK(cons.positions(v, c) >= lo - 1e-12);
            CHECK(cons.positions(v, c) <= hi + 1e-12);
        }
    }
    // Each consensus node is the mean of its cluster members.
    for (int v = 0; v < cons.positions.rows(); ++v) {
        Eigen::RowVectorXd mean =
            Eigen::RowVectorXd::Zero(cons.positions.cols());
        int count = 0;
        for (std::size_t i = 0; i < cons.cluster_of.size(); ++i)
            if (cons.cluster_of[i] == v) {
                mean += cons.pooled.row(static_cast<int>(i));
                ++count;
            }
        REQUIRE(count > 0);
        mean /= count;
        CHECK((mean - cons.positions.row(v)).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("edge weights match a brute-force recount") {
    auto ens = small_ensemble(17);
    KMeansConfig km;
    km.seed = 5;
    auto cons = consensus_graph(ens, 5, 1, km);

    std::map<std::pair<int, int>, int> counts;
    for (const auto& e : cons.pooled_edges) {
        int a = cons.cluster_of[e[0]], b = cons.cluster_of[e[1]];
        if (a == b) continue;
        counts[{std::min(a, b), std::max(a, b)}] += 1;
    }
    REQUIRE(cons.edges.size() == cons.weights.size());
    for (std::size_t i = 0; i < cons.edges.size(); ++i) {
        auto key = std::make_pair(cons.edges[i][0], cons.edges[i][1]);
        CHECK(counts.at(key) == cons.weights[i]);
        CHECK(cons.weights[i] > 1);
    }
    // Every over-threshold pair appears.
    for (const auto& [key, cnt] : counts)
        if (cnt > 1) {
            bool present = false;
            for (const auto& e : cons.edges)
                present = present || (e[0] == key.first && e[1] == key.second);
            CHECK(present);
        }
}

TEST_CASE("threshold at the total edge count removes every edge") {
    auto ens = small_ensemble(19);
    int total_edges = 0;
    for (const auto& m : ens.members)
        total_edges += static_cast<int>(m.graph.edges.size());
    KMeansConfig km;
    auto cons = consensus_graph(ens, 5, total_edges, km);
    CHECK(cons.edges.empty());
}

TEST_CASE("consensus is deterministic under fixed seeds") {
    auto ens = small_ensemble(23);
    KMeansConfig km;
    km.seed = 9;
    auto a = consensus_graph(ens, 6, 1, km);
    auto b = consensus_graph(ens, 6, 1, km);
    CHECK((a.positions - b.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.edges == b.edges);
    CHECK(a.weights == b.weights);
}

TEST_CASE("empty filter set is the identity") {
    auto ens = small_ensemble(29);
    KMeansConfig km;
    km.seed = 1;
    auto cons = consensus_graph(ens, 5, 1, km);
    auto same = filter_consensus(cons, ConsensusFilters{});
    CHECK((same.positions - cons.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK(same.edges == cons.edges);
    CHECK(same.weights == cons.weights);
}

TEST_CASE("filtering is idempotent") {
    auto ens = small_ensemble(31);
    KMeansConfig km;
    km.seed = 2;
    auto cons = consensus_graph(ens, 6, 1, km);
    ConsensusFilters f;
    f.density_filter = true;
    f.drop_unconnected = true;
    auto once = filter_consensus(cons, f);
    auto twice = filter_consensus(once, f);
    CHECK((once.positions - twice.positions).cwiseAbs().maxCoeff() == 0.0);
    CHECK(once.edges == twice.edges);
}

TEST_CASE("edge length band below the minimum empties the graph") {
    auto ens = small_ensemble(37);
    KMeansConfig km;
    auto cons = consensus_graph(ens, 5, 1, km);
    REQUIRE_FALSE(cons.edges.empty());
    ConsensusFilters f;
    f.edge_len_max = 1e-12;
    f.drop_unconnected = true;
    CHECK_THROWS_AS(filter_consensus(cons, f), NumericError);
}

TEST_CASE("density filter drops the nodes of an outlier member") {
    // Nine members trace a line near the origin; one member is a far blob.
    auto ens = small_ensemble(41);
    Matrix far(6, 2);
    for (int v = 0; v < 6; ++v) {
        far(v, 0) = 1000.0 + v;
        far(v, 1) = 1000.0;
    }
    ens.members[9].embedding = far;
    KMeansConfig km;
    km.seed = 4;
    auto cons = consensus_graph(ens, 6, 1, km);
    ConsensusFilters f;
    f.density_filter = true;
    f.density_min_count = 8.0;
    f.density_radius = 5.0;
    auto filtered = filter_consensus(cons, f);
    for (int v = 0; v < filtered.positions.rows(); ++v)
        CHECK(filtered.positions(v, 0) < 500.0);
}

TEST_CASE("identical members give a zero-width branch interval") {
    auto data = testsup::star3(120, 1.0, 0.03, 131);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Tree, 10, 0.0);
    auto ref = grow_graph(data.cloud, strat, cfg);

    int branch = -1;
    auto deg = ref.graph.degrees();
    std::vector<int> leaves;
    for (int v = 0; v < ref.graph.node_count; ++v) {
        if (deg[v] >= 3) branch = v;
        if (deg[v] == 1) leaves.push_back(v);
    }
    REQUIRE(branch >= 0);
    REQUIRE(leaves.size() >= 2);
    auto path = build_path(ref.graph, ref.embedding, leaves[0], leaves[1]);

    GraphEnsemble ens;
    ens.fraction = 1.0;
    for (int i = 0; i < 8; ++i) {
        EnsembleMember m;
        m.graph = ref.graph;
        m.embedding = ref.embedding;
        ens.members.push_back(std::move(m));
    }
    auto interval = branch_point_interval(ens, path, ref.embedding, branch);
    CHECK(interval[0] == doctest::Approx(interval[1]).epsilon(1e-12));

    double arc = project_onto_path(path, ref.embedding, ref.embedding.row(branch));
    double expected = path_pseudotime_at(path, arc);
    CHECK(interval[0] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("members without branch nodes are skipped, all skipped errors") {
    auto cloud = testsup::line_cloud(100, 0.03, 133);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Curve, 5, 0.0);
    auto ens = bootstrap_ensemble(cloud, strat, cfg, 3, 1.0, 1);
    auto ref = grow_graph(cloud, strat, cfg);
    auto deg = ref.graph.degrees();
    std::vector<int> leaves;
    for (int v = 0; v < ref.graph.node_count; ++v)
        if (deg[v] == 1) leaves.push_back(v);
    auto path = build_path(ref.graph, ref.embedding, leaves[0], leaves[1]);
    CHECK_THROWS_AS(branch_point_interval(ens, path, ref.embedding, 0),
                    NumericError);
}

TEST_CASE("bad ensemble parameters are rejected") {
    auto cloud = testsup::line_cloud(50, 0.03, 135);
    FitConfig cfg;
    auto strat = make_strategy(StrategyKind::Curve, 4, 0.0);
    CHECK_THROWS_AS(bootstrap_ensemble(cloud, strat, cfg, 0, 0.5, 1),
                    ConfigError);
    CHECK_THROWS_AS(bootstrap_ensemble(cloud, strat, cfg, 2, 0.0, 1),
                    ConfigError);
    CHECK_THROWS_AS(bootstrap_ensemble(cloud, strat, cfg, 2, 1.5, 1),
                    ConfigError);
}
