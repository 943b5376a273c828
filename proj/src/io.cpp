#include "elpi/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace elpi {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

PointCloud load_matrix(const std::string& path, char delimiter,
                       bool has_header, std::optional<int> weight_col) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && has_header) continue;
        if (line.empty()) continue;

        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, delimiter)) {
            ++col;
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(
                           static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw DataError("non-numeric cell '" + cell + "' at row " +
                                std::to_string(lineno) + ", column " +
                                std::to_string(col));
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("ragged row at line " + std::to_string(lineno) +
                            ": expected " +
                            std::to_string(rows.front().size()) +
                            " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty input file: " + path);

    const int n = static_cast<int>(rows.size());
    const int total_cols = static_cast<int>(rows.front().size());
    if (weight_col && (*weight_col < 0 || *weight_col >= total_cols))
        throw ConfigError("weight column out of range");
    const int m = weight_col ? total_cols - 1 : total_cols;
    if (m < 1) throw DataError("no coordinate columns left in " + path);

    PointCloud cloud;
    cloud.x.resize(n, m);
    cloud.w.resize(n);
    for (int i = 0; i < n; ++i) {
        int k = 0;
        for (int j = 0; j < total_cols; ++j) {
            if (weight_col && j == *weight_col)
                cloud.w(i) = rows[i][j];
            else
                cloud.x(i, k++) = rows[i][j];
        }
        if (!weight_col) cloud.w(i) = 1.0;
    }
    cloud.check();
    return cloud;
}

namespace {

json graph_to_json(const ElasticGraph& g, const Matrix& positions) {
    json j;
    j["node_count"] = g.node_count;
    j["edges"] = g.edges;
    j["lambda"] = g.lambda;
    j["mu"] = g.mu;
    json pos = json::array();
    for (int v = 0; v < positions.rows(); ++v) {
        json row = json::array();
        for (int c = 0; c < positions.cols(); ++c) row.push_back(positions(v, c));
        pos.push_back(std::move(row));
    }
    j["positions"] = std::move(pos);
    return j;
}

std::pair<ElasticGraph, Matrix> graph_from_json(const json& j) {
    ElasticGraph g;
    g.node_count = j.at("node_count").get<int>();
    g.edges = j.at("edges").get<std::vector<std::array<int, 2>>>();
    g.lambda = j.at("lambda").get<std::vector<double>>();
    g.mu = j.at("mu").get<std::vector<double>>();

    const auto& pos = j.at("positions");
    Matrix phi(g.node_count, pos.empty() ? 0 : pos.front().size());
    for (int v = 0; v < g.node_count; ++v)
        for (int c = 0; c < phi.cols(); ++c)
            phi(v, c) = pos[v][c].get<double>();
    return {std::move(g), std::move(phi)};
}

json energy_to_json(const EnergyBreakdown& e) {
    return {{"mse", e.mse},
            {"u_e", e.u_e},
            {"u_r", e.u_r},
            {"total", e.total},
            {"trimmed_count", e.trimmed_count}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write output file: " + path);
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void check_schema(const json& j, const std::string& path) {
    int v = j.value("schema_version", -1);
    if (v != kSchemaVersion)
        throw DataError("unsupported schema version " + std::to_string(v) +
                        " in " + path + " (expected " +
                        std::to_string(kSchemaVersion) + ")");
}

std::uint64_t fnv1a(const std::vector<int>& values, std::uint64_t h) {
    for (int v : values) {
        for (int b = 0; b < 4; ++b) {
            h ^= static_cast<std::uint64_t>((v >> (8 * b)) & 0xff);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace

GraphRecord to_record(const PrincipalGraphResult& result, double alpha) {
    GraphRecord rec;
    rec.graph = result.graph;
    rec.positions = result.embedding;
    rec.alpha = alpha;
    rec.energy = result.energy;
    rec.history = result.history;
    return rec;
}

void save_graph(const GraphRecord& record, const std::string& path) {
    json j = graph_to_json(record.graph, record.positions);
    j["schema_version"] = kSchemaVersion;
    j["type"] = "principal_graph";
    j["alpha"] = record.alpha;
    j["energy"] = energy_to_json(record.energy);
    json hist = json::array();
    for (const auto& op : record.history)
        hist.push_back({{"kind", op_kind_name(op.kind)},
                        {"target", op.target},
                        {"energy_after", op.energy_after}});
    j["op_history"] = std::move(hist);
    write_json(j, path);
}

GraphRecord load_graph(const std::string& path) {
    json j = read_json(path);
    check_schema(j, path);
    GraphRecord rec;
    auto [g, phi] = graph_from_json(j);
    rec.graph = std::move(g);
    rec.positions = std::move(phi);
    rec.alpha = j.value("alpha", 0.0);
    if (j.contains("energy")) {
        const auto& e = j["energy"];
        rec.energy.mse = e.value("mse", 0.0);
        rec.energy.u_e = e.value("u_e", 0.0);
        rec.energy.u_r = e.value("u_r", 0.0);
        rec.energy.total = e.value("total", 0.0);
        rec.energy.trimmed_count = e.value("trimmed_count", 0);
    }
    return rec;
}

void save_ensemble(const GraphEnsemble& ensemble, const std::string& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "ensemble";

    std::uint64_t hash = 0xcbf29ce484222325ULL;
    json members = json::array();
    for (const auto& m : ensemble.members) {
        json mj = graph_to_json(m.graph, m.embedding);
        mj["sample_indices"] = m.sample_indices;
        members.push_back(std::move(mj));
        hash = fnv1a(m.sample_indices, hash);
    }
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(hash));
    j["sampling"] = {{"seed", ensemble.seed},
                     {"replicas", ensemble.members.size()},
                     {"fraction", ensemble.fraction},
                     {"indices_hash", hex}};
    j["members"] = std::move(members);
    write_json(j, path);
}

GraphEnsemble load_ensemble(const std::string& path) {
    json j = read_json(path);
    check_schema(j, path);
    if (j.value("type", "") != "ensemble")
        throw DataError(path + " is not an ensemble file");
    GraphEnsemble ens;
    ens.seed = j["sampling"].value("seed", 0ULL);
    ens.fraction = j["sampling"].value("fraction", 0.9);
    for (const auto& mj : j.at("members")) {
        auto [g, phi] = graph_from_json(mj);
        EnsembleMember m;
        m.graph = std::move(g);
        m.embedding = std::move(phi);
        m.sample_indices = mj.value("sample_indices", std::vector<int>{});
        ens.members.push_back(std::move(m));
    }
    if (ens.members.empty()) throw DataError("ensemble file has no members");
    return ens;
}

void save_consensus(const ConsensusGraph& consensus, const std::string& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = "consensus";
    json pos = json::array();
    for (int v = 0; v < consensus.positions.rows(); ++v) {
        json row = json::array();
        for (int c = 0; c < consensus.positions.cols(); ++c)
            row.push_back(consensus.positions(v, c));
        pos.push_back(std::move(row));
    }
    j["positions"] = std::move(pos);
    j["edges"] = consensus.edges;
    j["weights"] = consensus.weights;
    json cmap = json::array();
    for (std::size_t i = 0; i < consensus.cluster_of.size(); ++i)
        cmap.push_back({{"member", consensus.pooled_member[i]},
                        {"cluster", consensus.cluster_of[i]}});
    j["cluster_map"] = std::move(cmap);
    write_json(j, path);
}

void save_graph_list(const std::vector<GraphRecord>& records,
                     const std::string& type, const std::string& path) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["type"] = type;
    json blocks = json::array();
    for (const auto& rec : records) {
        json b = graph_to_json(rec.graph, rec.positions);
        b["alpha"] = rec.alpha;
        b["energy"] = energy_to_json(rec.energy);
        blocks.push_back(std::move(b));
    }
    j["graphs"] = std::move(blocks);
    write_json(j, path);
}

std::vector<GraphRecord> load_graph_list(const std::string& path) {
    json j = read_json(path);
    check_schema(j, path);
    std::vector<GraphRecord> out;
    for (const auto& b : j.at("graphs")) {
        GraphRecord rec;
        auto [g, phi] = graph_from_json(b);
        rec.graph = std::move(g);
        rec.positions = std::move(phi);
        rec.alpha = b.value("alpha", 0.0);
        out.push_back(std::move(rec));
    }
    return out;
}

void save_assignments(const Partition& partition, const std::string& path,
                      const std::vector<int>* labels) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write output file: " + path);
    out << "point_index,node_index";
    if (labels) out << ",label";
    out << "\n";
    for (std::size_t i = 0; i < partition.assign.size(); ++i) {
        out << i << "," << partition.assign[i];
        if (labels) out << "," << (*labels)[i];
        out << "\n";
    }
}

void save_pseudotime(const PseudotimeTable& table, const EdgeProjection& proj,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write output file: " + path);
    out << "point_index,pseudotime,on_path,edge_index,t\n";
    for (std::size_t i = 0; i < table.pt.size(); ++i)
        out << i << "," << format_double(table.pt[i]) << ","
            << static_cast<int>(table.on_path[i]) << "," << proj.edge[i] << ","
            << format_double(proj.t[i]) << "\n";
}

void save_energy_trace(const std::vector<EnergyBreakdown>& trace,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write output file: " + path);
    out << "iter,mse,u_e,u_r,total,trimmed_count\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << i << "," << format_double(trace[i].mse) << ","
            << format_double(trace[i].u_e) << "," << format_double(trace[i].u_r)
            << "," << format_double(trace[i].total) << ","
            << trace[i].trimmed_count << "\n";
}

} // namespace elpi
