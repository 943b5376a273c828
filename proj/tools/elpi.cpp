// elpi: elastic principal graph fitting from the command line.
//
// Subcommands: fit, ensemble, consensus, forest, maze, pseudotime, render,
// bench. Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "elpi/analysis.hpp"
#include "elpi/ensemble.hpp"
#include "elpi/io.hpp"
#include "elpi/robust.hpp"
#include "elpi/svg.hpp"

namespace {

using namespace elpi;

struct CommonOpts {
    std::string input;
    std::string delimiter = ",";
    bool header = false;
    int weight_col = -1;

    std::string strategy = "curve";
    int nodes = 20;
    double alpha = 0.0;
    double lambda = 0.01;
    double mu = 0.1;
    std::string r0 = "inf";
    double epsilon = 1e-3;
    int max_iter = 100;

    std::uint64_t seed = 0;
    int threads = 0;
    bool verbose = false;

    std::string out_graph;
    std::string out_assignments;
    std::string out_svg;
    std::string out_energy;
};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ELPI_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void add_data_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "Input delimited numeric table")
        ->required();
    cmd->add_option("--delimiter", o.delimiter, "Field delimiter (default ,)");
    cmd->add_flag("--header", o.header, "Skip the first row");
    cmd->add_option("--weight-col", o.weight_col,
                    "0-based column holding point weights");
}

void add_fit_options(CLI::App* cmd, CommonOpts& o, bool with_strategy = true) {
    if (with_strategy)
        cmd->add_option("--strategy", o.strategy, "curve | circle | tree");
    cmd->add_option("--nodes", o.nodes, "Target node count");
    cmd->add_option("--alpha", o.alpha, "Branching penalty");
    cmd->add_option("--lambda", o.lambda, "Default edge stretching modulus");
    cmd->add_option("--mu", o.mu, "Default star bending modulus");
    cmd->add_option("--r0", o.r0, "Trimming radius: number, 'inf' or 'auto'");
    cmd->add_option("--epsilon", o.epsilon, "Convergence threshold");
    cmd->add_option("--max-iter", o.max_iter, "Iteration cap per fit");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--threads", o.threads,
                    "Worker threads (0 = ELPI_THREADS or all cores)");
    cmd->add_flag("--verbose", o.verbose, "Per-iteration energy reporting");
}

void add_output_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--out-graph", o.out_graph, "Graph JSON output");
    cmd->add_option("--out-assignments", o.out_assignments,
                    "Assignments CSV output");
    cmd->add_option("--out-svg", o.out_svg, "Static SVG output");
    cmd->add_option("--out-energy", o.out_energy, "Energy trace CSV output");
}

char parse_delimiter(const std::string& d) {
    if (d == "\\t" || d == "tab") return '\t';
    if (d.size() != 1) throw ConfigError("delimiter must be one character");
    return d[0];
}

PointCloud load_cloud(const CommonOpts& o) {
    std::optional<int> wc;
    if (o.weight_col >= 0) wc = o.weight_col;
    return load_matrix(o.input, parse_delimiter(o.delimiter), o.header, wc);
}

double resolve_r0(const std::string& spec, const PointCloud& cloud,
                  std::uint64_t seed) {
    if (spec == "inf" || spec.empty())
        return std::numeric_limits<double>::infinity();
    if (spec == "auto") return estimate_trimming_radius(cloud, 1000, 0.5, seed);
    try {
        std::size_t used = 0;
        double v = std::stod(spec, &used);
        if (used != spec.size()) throw std::invalid_argument(spec);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad --r0 value: " + spec);
    }
}

FitConfig make_config(const CommonOpts& o, const PointCloud& cloud) {
    FitConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.max_iter = o.max_iter;
    cfg.alpha = o.alpha;
    cfg.lambda = o.lambda;
    cfg.mu = o.mu;
    cfg.r0 = resolve_r0(o.r0, cloud, o.seed);
    cfg.check();
    return cfg;
}

void report_trace(const std::vector<EnergyBreakdown>& trace) {
    for (std::size_t i = 0; i < trace.size(); ++i)
        std::cout << "iter " << i << " mse " << trace[i].mse << " u_e "
                  << trace[i].u_e << " u_r " << trace[i].u_r << " total "
                  << trace[i].total << " trimmed " << trace[i].trimmed_count
                  << "\n";
}

void emit_fit_outputs(const CommonOpts& o, const PointCloud& cloud,
                      const PrincipalGraphResult& result,
                      const FitConfig& cfg) {
    if (!o.out_graph.empty()) save_graph(to_record(result, cfg.alpha), o.out_graph);
    if (!o.out_assignments.empty())
        save_assignments(result.partition, o.out_assignments);
    if (!o.out_energy.empty() || o.verbose) {
        FitResult traced =
            fit_embedding(cloud, result.graph, result.embedding, cfg, true);
        if (o.verbose) report_trace(traced.trace);
        if (!o.out_energy.empty()) save_energy_trace(traced.trace, o.out_energy);
    }
    if (!o.out_svg.empty()) {
        SvgGraphLayer layer{result.graph.edges, result.embedding, true};
        render_svg(cloud, {layer}, {}, o.out_svg);
    }
}

int cmd_fit(const CommonOpts& o) {
    PointCloud cloud = load_cloud(o);
    FitConfig cfg = make_config(o, cloud);
    Strategy strat = make_strategy(strategy_kind_from_name(o.strategy),
                                   o.nodes, o.alpha);
    PrincipalGraphResult result =
        grow_graph(cloud, strat, cfg, resolve_threads(o.threads));
    emit_fit_outputs(o, cloud, result, cfg);
    return 0;
}

int cmd_ensemble(const CommonOpts& o, int replicas, double fraction) {
    PointCloud cloud = load_cloud(o);
    FitConfig cfg = make_config(o, cloud);
    Strategy strat = make_strategy(strategy_kind_from_name(o.strategy),
                                   o.nodes, o.alpha);
    GraphEnsemble ens = bootstrap_ensemble(cloud, strat, cfg, replicas,
                                           fraction, o.seed,
                                           resolve_threads(o.threads));
    if (o.out_graph.empty())
        throw ConfigError("ensemble requires --out-graph");
    save_ensemble(ens, o.out_graph);
    if (!o.out_svg.empty()) {
        std::vector<SvgGraphLayer> layers;
        for (const auto& m : ens.members)
            layers.push_back({m.graph.edges, m.embedding, false});
        render_svg(cloud, layers, {}, o.out_svg);
    }
    return 0;
}

struct ConsensusOpts {
    std::string ensemble_path;
    int clusters = 16;
    int edge_threshold = 0;
    bool density_filter = false;
    double density_min_count = 0.0;
    double density_radius = 0.0;
    double edge_len_min = -1.0;
    double edge_len_max = -1.0;
    bool drop_unconnected = false;
};

int cmd_consensus(const CommonOpts& o, const ConsensusOpts& c) {
    GraphEnsemble ens = load_ensemble(c.ensemble_path);
    KMeansConfig km;
    km.seed = o.seed;
    ConsensusGraph cons =
        consensus_graph(ens, c.clusters, c.edge_threshold, km);

    ConsensusFilters filters;
    filters.density_filter = c.density_filter;
    filters.density_min_count = c.density_min_count;
    filters.density_radius = c.density_radius;
    if (c.edge_len_min >= 0.0) filters.edge_len_min = c.edge_len_min;
    if (c.edge_len_max >= 0.0) filters.edge_len_max = c.edge_len_max;
    filters.drop_unconnected = c.drop_unconnected;
    if (filters.density_filter || filters.edge_len_min ||
        filters.edge_len_max || filters.drop_unconnected)
        cons = filter_consensus(cons, filters);

    if (o.out_graph.empty())
        throw ConfigError("consensus requires --out-graph");
    save_consensus(cons, o.out_graph);

    if (!o.out_svg.empty()) {
        if (o.input.empty())
            throw ConfigError("--out-svg needs --input data for the scatter");
        PointCloud cloud = load_cloud(o);
        std::vector<SvgGraphLayer> layers;
        for (const auto& m : ens.members)
            layers.push_back({m.graph.edges, m.embedding, false});
        layers.push_back({cons.edges, cons.positions, true});
        render_svg(cloud, layers, {}, o.out_svg);
    }
    return 0;
}

int cmd_forest(const CommonOpts& o, int min_remaining) {
    PointCloud cloud = load_cloud(o);
    FitConfig cfg = make_config(o, cloud);
    Strategy strat = make_strategy(strategy_kind_from_name(o.strategy),
                                   o.nodes, o.alpha);
    if (min_remaining < 0)
        min_remaining = std::max(20, static_cast<int>(0.01 * cloud.n()));
    ForestResult forest =
        principal_forest(cloud, strat, cfg, min_remaining,
                         resolve_threads(o.threads), o.seed);

    if (!o.out_graph.empty()) {
        std::vector<GraphRecord> recs;
        for (const auto& g : forest.graphs) recs.push_back(to_record(g, cfg.alpha));
        save_graph_list(recs, "forest", o.out_graph);
    }
    if (!o.out_assignments.empty()) {
        Partition per_point;
        per_point.assign.assign(cloud.n(), kTrimmed);
        save_assignments(per_point, o.out_assignments, &forest.point_labels);
    }
    if (!o.out_svg.empty()) {
        std::vector<SvgGraphLayer> layers;
        for (const auto& g : forest.graphs)
            layers.push_back({g.graph.edges, g.embedding, true});
        render_svg(cloud, layers, {}, o.out_svg, &forest.point_labels);
    }
    return 0;
}

int cmd_maze(const CommonOpts& o, int max_curves) {
    PointCloud cloud = load_cloud(o);
    FitConfig cfg = make_config(o, cloud);
    MazeResult maze = travel_maze_cluster(cloud, o.nodes, cfg, max_curves,
                                          resolve_threads(o.threads), o.seed);
    if (!o.out_graph.empty()) {
        std::vector<GraphRecord> recs;
        for (const auto& c : maze.curves) recs.push_back(to_record(c, cfg.alpha));
        save_graph_list(recs, "maze", o.out_graph);
    }
    if (!o.out_assignments.empty()) {
        Partition per_point;
        per_point.assign.assign(cloud.n(), kTrimmed);
        save_assignments(per_point, o.out_assignments, &maze.labels);
    }
    if (!o.out_svg.empty()) {
        std::vector<SvgGraphLayer> layers;
        for (const auto& c : maze.curves)
            layers.push_back({c.graph.edges, c.embedding, true});
        render_svg(cloud, layers, {}, o.out_svg, &maze.labels);
    }
    return 0;
}

struct PseudotimeOpts {
    std::string graph_path;
    int root = -1;
    int leaf = -1;
    std::string extend_mode = "none"; // none | centroid | max
    int min_branch_points = 0;
    std::string out = "pseudotime.csv";
};

int cmd_pseudotime(const CommonOpts& o, const PseudotimeOpts& p) {
    if (p.root < 0 || p.leaf < 0)
        throw ConfigError("pseudotime requires --root and --leaf");
    PointCloud cloud = load_cloud(o);
    GraphRecord rec = load_graph(p.graph_path);
    require_valid(rec.graph);

    ElasticGraph graph = rec.graph;
    Matrix phi = rec.positions;
    auto proj = project_dataset(graph, phi, cloud);

    if (p.min_branch_points > 0) {
        auto [fg, fpos] = filter_branches(graph, phi, proj, p.min_branch_points);
        graph = std::move(fg);
        phi = std::move(fpos);
        proj = project_dataset(graph, phi, cloud);
    }
    if (p.extend_mode != "none") {
        ExtendMode mode;
        if (p.extend_mode == "centroid")
            mode = ExtendMode::Centroid;
        else if (p.extend_mode == "max")
            mode = ExtendMode::Max;
        else
            throw ConfigError("bad --extend-mode: " + p.extend_mode);
        auto part = partition_points(cloud, phi,
                                     std::numeric_limits<double>::infinity());
        auto [eg, epos] = extend_leaves(graph, phi, cloud, part, proj, mode, o.mu);
        graph = std::move(eg);
        phi = std::move(epos);
        proj = project_dataset(graph, phi, cloud);
    }

    if (p.root >= graph.node_count || p.leaf >= graph.node_count)
        throw ConfigError("--root/--leaf out of range for the graph");
    PathInfo path = build_path(graph, phi, p.root, p.leaf);
    PseudotimeTable table = pseudotime(graph, phi, proj, path);
    save_pseudotime(table, proj, p.out);

    if (!o.out_graph.empty()) {
        GraphRecord out_rec;
        out_rec.graph = graph;
        out_rec.positions = phi;
        out_rec.alpha = rec.alpha;
        save_graph(out_rec, o.out_graph);
    }
    return 0;
}

struct RenderOpts {
    std::vector<std::string> graph_paths;
    std::string projection = "xy:0,1";
    std::string labels_csv;
    std::string out = "plot.svg";
};

SvgProjection parse_projection(const std::string& spec) {
    SvgProjection p;
    std::string body = spec;
    if (spec.rfind("pc:", 0) == 0) {
        p.use_pca = true;
        body = spec.substr(3);
    } else if (spec.rfind("xy:", 0) == 0) {
        body = spec.substr(3);
    }
    auto comma = body.find(',');
    if (comma == std::string::npos)
        throw ConfigError("bad --projection, expected xy:i,j or pc:i,j");
    try {
        p.i = std::stoi(body.substr(0, comma));
        p.j = std::stoi(body.substr(comma + 1));
    } catch (const std::exception&) {
        throw ConfigError("bad --projection, expected xy:i,j or pc:i,j");
    }
    return p;
}

int cmd_render(const CommonOpts& o, const RenderOpts& r) {
    PointCloud cloud = load_cloud(o);

    std::vector<SvgGraphLayer> layers;
    for (const auto& path : r.graph_paths) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw DataError("malformed JSON in " + path + ": " + e.what());
        }
        std::string type = j.value("type", "");
        if (type == "ensemble") {
            GraphEnsemble ens = load_ensemble(path);
            for (const auto& m : ens.members)
                layers.push_back({m.graph.edges, m.embedding, false});
        } else if (type == "forest" || type == "maze") {
            for (const auto& rec : load_graph_list(path))
                layers.push_back({rec.graph.edges, rec.positions, true});
        } else {
            GraphRecord rec = load_graph(path);
            layers.push_back({rec.graph.edges, rec.positions, true});
        }
    }

    std::vector<int> labels;
    std::vector<int>* labels_ptr = nullptr;
    if (!r.labels_csv.empty()) {
        std::ifstream in(r.labels_csv);
        if (!in) throw DataError("cannot open labels file: " + r.labels_csv);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (first) {
                first = false;
                continue; // header
            }
            auto last = line.rfind(',');
            labels.push_back(std::atoi(
                (last == std::string::npos ? line : line.substr(last + 1))
                    .c_str()));
        }
        if (static_cast<int>(labels.size()) != cloud.n())
            throw DataError("labels row count does not match the data");
        labels_ptr = &labels;
    }

    render_svg(cloud, layers, parse_projection(r.projection), r.out, labels_ptr);
    return 0;
}

struct BenchOpts {
    std::vector<int> node_counts = {10, 20, 40};
    int points = 2000;
    int dims = 3;
    std::string out = "bench.csv";
};

PointCloud bench_dataset(int n, int m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(n, m);
    for (int i = 0; i < n; ++i) {
        double t = u(rng);
        x(i, 0) = t + noise(rng);
        if (m > 1) x(i, 1) = std::sin(3.0 * t) + noise(rng);
        for (int j = 2; j < m; ++j) x(i, j) = noise(rng);
    }
    return PointCloud::uniform(std::move(x));
}

int cmd_bench(const CommonOpts& o, const BenchOpts& b) {
    PointCloud cloud = bench_dataset(b.points, b.dims, o.seed);
    FitConfig cfg;
    cfg.lambda = o.lambda;
    cfg.mu = o.mu;

    std::ofstream out(b.out);
    if (!out) throw DataError("cannot write output file: " + b.out);
    out << "strategy,nodes,points,dims,seconds\n";
    for (StrategyKind kind : {StrategyKind::Curve, StrategyKind::Tree}) {
        for (int nodes : b.node_counts) {
            Strategy strat = make_strategy(kind, nodes, o.alpha);
            auto t0 = std::chrono::steady_clock::now();
            grow_graph(cloud, strat, cfg, resolve_threads(o.threads));
            auto t1 = std::chrono::steady_clock::now();
            double sec = std::chrono::duration<double>(t1 - t0).count();
            out << strategy_kind_name(kind) << "," << nodes << "," << b.points
                << "," << b.dims << "," << format_double(sec) << "\n";
            if (o.verbose)
                std::cout << strategy_kind_name(kind) << " " << nodes
                          << " nodes: " << sec << " s\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"elastic principal graph fitting"};
    app.require_subcommand(1);
    app.set_config("--config")->description(
        "TOML config file; sections per subcommand, keys match flag names");

    CommonOpts o;

    auto* fit = app.add_subcommand("fit", "Fit one principal graph");
    add_data_options(fit, o);
    add_fit_options(fit, o);
    add_output_options(fit, o);

    int replicas = 100;
    double fraction = 0.9;
    auto* ens = app.add_subcommand("ensemble", "Bootstrap a graph ensemble");
    add_data_options(ens, o);
    add_fit_options(ens, o);
    add_output_options(ens, o);
    ens->add_option("--replicas", replicas, "Ensemble size k");
    ens->add_option("--fraction", fraction, "Sample fraction p in (0,1]");

    ConsensusOpts copt;
    auto* cons = app.add_subcommand("consensus", "Consensus of an ensemble");
    cons->add_option("--ensemble", copt.ensemble_path, "Ensemble JSON")
        ->required();
    cons->add_option("--clusters", copt.clusters, "Consensus node count M");
    cons->add_option("--edge-threshold", copt.edge_threshold,
                     "Keep edges with member count strictly above this");
    cons->add_flag("--density-filter", copt.density_filter,
                   "Drop low-density pooled nodes before clustering");
    cons->add_option("--density-min-count", copt.density_min_count,
                     "Density filter neighbor count (0 = 0.05*k)");
    cons->add_option("--density-radius", copt.density_radius,
                     "Density filter radius (0 = auto)");
    cons->add_option("--edge-len-min", copt.edge_len_min, "Min edge length");
    cons->add_option("--edge-len-max", copt.edge_len_max, "Max edge length");
    cons->add_flag("--drop-unconnected", copt.drop_unconnected,
                   "Remove unconnected consensus nodes");
    cons->add_option("--input", o.input, "Data table for the SVG scatter");
    cons->add_option("--delimiter", o.delimiter, "Field delimiter");
    cons->add_flag("--header", o.header, "Skip the first row");
    cons->add_option("--seed", o.seed, "Random seed");
    cons->add_option("--out-graph", o.out_graph, "Consensus JSON output");
    cons->add_option("--out-svg", o.out_svg, "SVG output");

    int min_remaining = -1;
    auto* forest = app.add_subcommand("forest", "Principal forest");
    add_data_options(forest, o);
    add_fit_options(forest, o);
    add_output_options(forest, o);
    forest->add_option("--min-remaining", min_remaining,
                       "Stop when fewer points remain (-1 = max(20, 1% of n))");

    int max_curves = 8;
    auto* maze = app.add_subcommand("maze", "Travel-maze curve clustering");
    add_data_options(maze, o);
    add_fit_options(maze, o, false);
    add_output_options(maze, o);
    maze->add_option("--max-curves", max_curves, "Curve cap");

    PseudotimeOpts popt;
    auto* pt = app.add_subcommand("pseudotime", "Pseudotime along a path");
    add_data_options(pt, o);
    pt->add_option("--graph", popt.graph_path, "Fitted graph JSON")->required();
    pt->add_option("--root", popt.root, "Path root node")->required();
    pt->add_option("--leaf", popt.leaf, "Path leaf node")->required();
    pt->add_option("--extend-mode", popt.extend_mode,
                   "Leaf extension: none | centroid | max");
    pt->add_option("--min-branch-points", popt.min_branch_points,
                   "Remove edges with fewer projected points");
    pt->add_option("--mu", o.mu, "Bending modulus for extended leaves");
    pt->add_option("--out", popt.out, "Pseudotime CSV output");
    pt->add_option("--out-graph", o.out_graph,
                   "Post-extension/filtering graph JSON");

    RenderOpts ropt;
    auto* render = app.add_subcommand("render", "Static SVG plot");
    add_data_options(render, o);
    render->add_option("--graph", ropt.graph_paths,
                       "Graph/ensemble/forest JSON (repeatable)");
    render->add_option("--projection", ropt.projection,
                       "xy:i,j (coordinates) or pc:i,j (1-based PCs)");
    render->add_option("--labels", ropt.labels_csv,
                       "Assignments CSV coloring the points");
    render->add_option("--out", ropt.out, "SVG output");

    BenchOpts bopt;
    auto* bench = app.add_subcommand("bench", "Scaling benchmark CSV");
    bench->add_option("--node-counts", bopt.node_counts, "Node budgets");
    bench->add_option("--points", bopt.points, "Synthetic point count");
    bench->add_option("--dims", bopt.dims, "Synthetic dimension");
    bench->add_option("--seed", o.seed, "Random seed");
    bench->add_option("--threads", o.threads, "Worker threads");
    bench->add_option("--lambda", o.lambda, "Default edge modulus");
    bench->add_option("--mu", o.mu, "Default star modulus");
    bench->add_option("--alpha", o.alpha, "Branching penalty");
    bench->add_flag("--verbose", o.verbose, "Print timings");
    bench->add_option("--out", bopt.out, "Benchmark CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*fit) return cmd_fit(o);
        if (*ens) return cmd_ensemble(o, replicas, fraction);
        if (*cons) return cmd_consensus(o, copt);
        if (*forest) return cmd_forest(o, min_remaining);
        if (*maze) return cmd_maze(o, max_curves);
        if (*pt) return cmd_pseudotime(o, popt);
        if (*render) return cmd_render(o, ropt);
        if (*bench) return cmd_bench(o, bopt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
