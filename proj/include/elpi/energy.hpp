#pragma once

#include <utility>

#include "elpi/data.hpp"
#include "elpi/graph.hpp"

namespace elpi {

struct EnergyBreakdown {
    double mse = 0.0;   // trimmed, weight-normalized approximation error
    double u_e = 0.0;   // stretching term, alpha penalty included
    double u_r = 0.0;   // deviation-from-harmonicity term
    double total = 0.0; // mse + u_e + u_r
    int trimmed_count = 0;
};

// (u_e, u_r) of the embedding. u_e prices each edge at
// lambda_e + alpha * (max(2, deg(a), deg(b)) - 2).
std::pair<double, double> elastic_energy(const ElasticGraph& g,
                                         const Matrix& phi, double alpha);

// (mse, trimmed_count): mse = (1/sum w) * sum_i w_i * min(dist_i^2, r0^2),
// where trimmed points contribute w_i * r0^2.
std::pair<double, int> approximation_error(const PointCloud& cloud,
                                           const Matrix& phi,
                                           const Partition& partition,
                                           double r0);

EnergyBreakdown total_energy(const PointCloud& cloud, const ElasticGraph& g,
                             const Matrix& phi, const Partition& partition,
                             double alpha, double r0);

} // namespace elpi
