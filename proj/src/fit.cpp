#include "elpi/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace elpi {

Partition partition_points(const PointCloud& cloud, const Matrix& phi,
                           double r0) {
    const int n = cloud.n();
    const int nv = static_cast<int>(phi.rows());
    if (phi.cols() != cloud.x.cols())
        throw DataError("embedding dimension does not match data dimension");

    // Squared distances via ||x||^2 + ||phi||^2 - 2 x.phi; the cross term is
    // one gemm, which dominates the per-iteration cost at scale.
    Matrix cross = cloud.x * phi.transpose();
    Vector xsq = cloud.x.rowwise().squaredNorm();
    Vector psq = phi.rowwise().squaredNorm();

    const double r0sq = r0 * r0;
    Partition part;
    part.assign.resize(n);
    part.counts.assign(nv, 0.0);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double bestd = xsq(i) + psq(0) - 2.0 * cross(i, 0);
        for (int j = 1; j < nv; ++j) {
            double d = xsq(i) + psq(j) - 2.0 * cross(i, j);
            if (d < bestd) {
                bestd = d;
                best = j;
            }
        }
        if (bestd < r0sq) {
            part.assign[i] = best;
            part.counts[best] += cloud.w(i);
        } else {
            part.assign[i] = kTrimmed;
        }
    }
    return part;
}

Matrix solve_embedding(const Matrix& laplacian, const Partition& partition,
                       const PointCloud& cloud) {
    const int nv = static_cast<int>(laplacian.rows());
    const int m = cloud.dim();
    const double wtot = cloud.w.sum();

    Vector diag = Vector::Zero(nv);
    Matrix rhs = Matrix::Zero(nv, m);
    bool any = false;
    for (int i = 0; i < cloud.n(); ++i) {
        int j = partition.assign[i];
        if (j == kTrimmed) continue;
        any = true;
        diag(j) += cloud.w(i);
        rhs.row(j) += cloud.w(i) * cloud.x.row(i);
    }
    if (!any) throw NumericError("all points trimmed: nothing to fit");

    Matrix sys = laplacian;
    sys.diagonal() += diag / wtot;
    rhs /= wtot;

    Eigen::FullPivLU<Matrix> lu(sys);
    if (!lu.isInvertible()) {
        std::ostringstream os;
        os << "singular linear system in embedding solve; offending nodes:";
        double scale = sys.cwiseAbs().maxCoeff();
        for (int j = 0; j < nv; ++j)
            if (sys.row(j).cwiseAbs().maxCoeff() <= 1e-14 * std::max(scale, 1.0))
                os << " " << j;
        throw NumericError(os.str());
    }
    return lu.solve(rhs);
}

FitResult fit_embedding(const PointCloud& cloud, const ElasticGraph& g,
                        const Matrix& init, const FitConfig& config,
                        bool record_trace) {
    cloud.check();
    config.check();
    if (init.rows() != g.node_count)
        throw DataError("initial embedding row count does not match node count");

    Matrix em = build_elastic_matrix(g, config.alpha);
    Matrix lap = graph_laplacian_sum(em, g);

    double diam = (cloud.x.colwise().maxCoeff() - cloud.x.colwise().minCoeff())
                      .norm();

    FitResult res;
    Matrix phi = init;
    int iter = 0;
    for (; iter < config.max_iter; ++iter) {
        Partition part = partition_points(cloud, phi, config.r0);
        Matrix next = solve_embedding(lap, part, cloud);
        if (record_trace)
            res.trace.push_back(
                total_energy(cloud, g, next, part, config.alpha, config.r0));
        double disp = (next - phi).rowwise().norm().maxCoeff();
        phi = std::move(next);
        if (disp <= config.epsilon * diam) {
            ++iter;
            break;
        }
    }
    res.iterations = iter;
    res.embedding = std::move(phi);
    res.partition = partition_points(cloud, res.embedding, config.r0);
    if (res.partition.trimmed_count() == cloud.n())
        throw NumericError("all points trimmed: nothing to fit");
    res.energy = total_energy(cloud, g, res.embedding, res.partition,
                              config.alpha, config.r0);
    return res;
}

PrincipalAxis first_principal_component(const PointCloud& cloud) {
    cloud.check();
    if (cloud.n() < 2) throw DataError("need at least 2 points for PCA");

    const double wtot = cloud.w.sum();
    Vector mean = (cloud.x.transpose() * cloud.w) / wtot;
    Matrix centered = cloud.x.rowwise() - mean.transpose();
    Matrix cov = (centered.transpose() * cloud.w.asDiagonal() * centered) / wtot;

    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const int last = static_cast<int>(cov.rows()) - 1;
    double var = es.eigenvalues()(last);
    if (!(var > 0.0)) throw DataError("degenerate data: zero variance");

    Vector axis = es.eigenvectors().col(last);
    for (int i = 0; i < axis.size(); ++i) {
        if (std::abs(axis(i)) > 1e-12) {
            if (axis(i) < 0.0) axis = -axis;
            break;
        }
    }
    return {std::move(mean), std::move(axis), std::sqrt(var)};
}

std::pair<ElasticGraph, Matrix> init_default(const PointCloud& cloud,
                                             double lambda) {
    auto pc = first_principal_component(cloud);
    ElasticGraph g;
    g.node_count = 2;
    g.edges.push_back({0, 1});
    g.lambda.push_back(lambda);
    g.mu.assign(2, 0.0);
    Matrix phi(2, cloud.dim());
    phi.row(0) = (pc.mean - pc.sdev * pc.axis).transpose();
    phi.row(1) = (pc.mean + pc.sdev * pc.axis).transpose();
    return {std::move(g), std::move(phi)};
}

} // namespace elpi
