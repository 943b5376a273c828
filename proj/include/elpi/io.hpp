#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elpi/analysis.hpp"
#include "elpi/ensemble.hpp"
#include "elpi/grammar.hpp"

namespace elpi {

inline constexpr int kSchemaVersion = 1;

// Rectangular numeric delimited table -> point cloud. weight_col (0-based)
// extracts per-point weights; parse errors name the (row, column) cell.
PointCloud load_matrix(const std::string& path, char delimiter,
                       bool has_header,
                       std::optional<int> weight_col = std::nullopt);

struct GraphRecord {
    ElasticGraph graph;
    Matrix positions;
    double alpha = 0.0;
    EnergyBreakdown energy;
    std::vector<OpRecord> history;
};

GraphRecord to_record(const PrincipalGraphResult& result, double alpha);

void save_graph(const GraphRecord& record, const std::string& path);
GraphRecord load_graph(const std::string& path);

void save_ensemble(const GraphEnsemble& ensemble, const std::string& path);
GraphEnsemble load_ensemble(const std::string& path);

void save_consensus(const ConsensusGraph& consensus, const std::string& path);

// Forest / maze results: a list of graph blocks under one document.
void save_graph_list(const std::vector<GraphRecord>& records,
                     const std::string& type, const std::string& path);
std::vector<GraphRecord> load_graph_list(const std::string& path);

// point_index,node_index[,label] rows; node_index is -1 for trimmed points.
void save_assignments(const Partition& partition, const std::string& path,
                      const std::vector<int>* labels = nullptr);

// point_index,pseudotime,on_path,edge_index,t rows.
void save_pseudotime(const PseudotimeTable& table, const EdgeProjection& proj,
                     const std::string& path);

// iter,mse,u_e,u_r,total,trimmed_count rows.
void save_energy_trace(const std::vector<EnergyBreakdown>& trace,
                       const std::string& path);

// Deterministic formatting helper shared by the CSV writers.
std::string format_double(double v);

} // namespace elpi
