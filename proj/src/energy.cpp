#include "elpi/energy.hpp"

#include <algorithm>
#include <cmath>

namespace elpi {

std::pair<double, double> elastic_energy(const ElasticGraph& g,
                                         const Matrix& phi, double alpha) {
    if (phi.rows() != g.node_count)
        throw DataError("embedding row count does not match node count");
    if (phi.cols() < 1)
        throw DataError("embedding dimension must be >= 1");

    auto deg = g.degrees();
    double u_e = 0.0;
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        int a = g.edges[i][0], b = g.edges[i][1];
        double coef = g.lambda[i] + alpha * (std::max({2, deg[a], deg[b]}) - 2);
        u_e += coef * (phi.row(a) - phi.row(b)).squaredNorm();
    }

    auto adj = g.adjacency();
    double u_r = 0.0;
    for (int c = 0; c < g.node_count; ++c) {
        if (deg[c] < 2) continue;
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(phi.cols());
        for (int u : adj[c]) mean += phi.row(u);
        mean /= static_cast<double>(deg[c]);
        u_r += g.mu[c] * (phi.row(c) - mean).squaredNorm();
    }
    return {u_e, u_r};
}

std::pair<double, int> approximation_error(const PointCloud& cloud,
                                           const Matrix& phi,
                                           const Partition& partition,
                                           double r0) {
    const double wsum = cloud.w.sum();
    if (!(wsum > 0.0)) throw DataError("degenerate weights: sum is zero");
    if (static_cast<int>(partition.assign.size()) != cloud.n())
        throw DataError("partition size does not match point count");

    const double r0sq = r0 * r0;
    double acc = 0.0;
    int trimmed = 0;
    for (int i = 0; i < cloud.n(); ++i) {
        int j = partition.assign[i];
        if (j == kTrimmed) {
            acc += cloud.w(i) * r0sq;
            ++trimmed;
        } else {
            double d2 = (cloud.x.row(i) - phi.row(j)).squaredNorm();
            acc += cloud.w(i) * std::min(d2, r0sq);
        }
    }
    return {acc / wsum, trimmed};
}

EnergyBreakdown total_energy(const PointCloud& cloud, const ElasticGraph& g,
                             const Matrix& phi, const Partition& partition,
                             double alpha, double r0) {
    EnergyBreakdown e;
    auto [ue, ur] = elastic_energy(g, phi, alpha);
    auto [mse, trimmed] = approximation_error(cloud, phi, partition, r0);
    e.u_e = ue;
    e.u_r = ur;
    e.mse = mse;
    e.trimmed_count = trimmed;
    e.total = e.mse + e.u_e + e.u_r;
    return e;
}

} // namespace elpi
