#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "elpi/energy.hpp"

namespace elpi {

struct FitConfig {
    double epsilon = 1e-3; // convergence: max node displacement / bbox diagonal
    int max_iter = 100;
    double r0 = std::numeric_limits<double>::infinity();
    double alpha = 0.0;
    double lambda = 0.01; // default edge modulus for constructed graphs
    double mu = 0.1;      // default star modulus for constructed graphs

    void check() const {
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
        if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
        if (!(r0 > 0.0)) throw ConfigError("r0 must be > 0 or infinite");
        if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    }

    // Coarse settings used while ranking structure-search candidates.
    FitConfig coarse() const {
        FitConfig c = *this;
        c.epsilon = 1e-2;
        c.max_iter = 10;
        return c;
    }
};

// Nearest-node partition under trimming radius r0; ties go to the lowest
// node index.
Partition partition_points(const PointCloud& cloud, const Matrix& phi,
                           double r0);

// One step of Algorithm 1: solve the |V| x |V| system
//   sum_j [ (sum_{K(i)=j} w_i / sum w) delta_ij + L_ij ] phi_j = rhs_j
// for all coordinate columns at once. Trimmed points are excluded from both
// sides. Throws NumericError on a singular system, naming offending nodes.
Matrix solve_embedding(const Matrix& laplacian, const Partition& partition,
                       const PointCloud& cloud);

struct FitResult {
    Matrix embedding;
    Partition partition;
    EnergyBreakdown energy;
    int iterations = 0;
    std::vector<EnergyBreakdown> trace; // per-iteration, when recorded
};

FitResult fit_embedding(const PointCloud& cloud, const ElasticGraph& g,
                        const Matrix& init, const FitConfig& config,
                        bool record_trace = false);

struct PrincipalAxis {
    Vector mean;
    Vector axis; // unit, first nonzero component positive
    double sdev;
};

// Leading eigen-direction of the weighted covariance.
PrincipalAxis first_principal_component(const PointCloud& cloud);

// Two nodes at mean +/- sdev along PC1, joined by a single edge.
std::pair<ElasticGraph, Matrix> init_default(const PointCloud& cloud,
                                             double lambda);

} // namespace elpi
