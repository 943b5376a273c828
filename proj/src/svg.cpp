#include "elpi/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <Eigen/Eigenvalues>

namespace elpi {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

} // namespace

void render_svg(const PointCloud& cloud,
                const std::vector<SvgGraphLayer>& graphs,
                const SvgProjection& projection, const std::string& path,
                const std::vector<int>* point_labels) {
    cloud.check();
    if (cloud.dim() < 2)
        throw DataError("SVG rendering needs at least 2 dimensions");

    Matrix basis; // m x 2
    Vector origin = Vector::Zero(cloud.dim());
    if (projection.use_pca) {
        const double wtot = cloud.w.sum();
        Vector mean = (cloud.x.transpose() * cloud.w) / wtot;
        Matrix centered = cloud.x.rowwise() - mean.transpose();
        Matrix cov =
            (centered.transpose() * cloud.w.asDiagonal() * centered) / wtot;
        Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
        const int last = static_cast<int>(cov.rows()) - 1;
        // PCA components are 1-based in the projection request.
        if (projection.i < 1 || projection.j < 1 ||
            projection.i > cov.rows() || projection.j > cov.rows())
            throw ConfigError("PCA component out of range");
        basis.resize(cloud.dim(), 2);
        basis.col(0) = es.eigenvectors().col(last - (projection.i - 1));
        basis.col(1) = es.eigenvectors().col(last - (projection.j - 1));
        origin = mean;
    } else {
        if (projection.i < 0 || projection.j < 0 ||
            projection.i >= cloud.dim() || projection.j >= cloud.dim())
            throw ConfigError("projection coordinate out of range");
        basis = Matrix::Zero(cloud.dim(), 2);
        basis(projection.i, 0) = 1.0;
        basis(projection.j, 1) = 1.0;
    }

    auto project = [&](const Eigen::RowVectorXd& p) {
        return ((p - origin.transpose()) * basis).eval();
    };

    Matrix pts(cloud.n(), 2);
    for (int i = 0; i < cloud.n(); ++i) pts.row(i) = project(cloud.x.row(i));

    double xmin = pts.col(0).minCoeff(), xmax = pts.col(0).maxCoeff();
    double ymin = pts.col(1).minCoeff(), ymax = pts.col(1).maxCoeff();
    for (const auto& layer : graphs)
        for (int v = 0; v < layer.positions.rows(); ++v) {
            auto p = project(layer.positions.row(v));
            xmin = std::min(xmin, p(0));
            xmax = std::max(xmax, p(0));
            ymin = std::min(ymin, p(1));
            ymax = std::max(ymax, p(1));
        }
    double spanx = std::max(xmax - xmin, 1e-9);
    double spany = std::max(ymax - ymin, 1e-9);

    const double W = 800.0, H = 600.0, pad = 30.0;
    auto sx = [&](double x) { return pad + (x - xmin) / spanx * (W - 2 * pad); };
    auto sy = [&](double y) { return H - pad - (y - ymin) / spany * (H - 2 * pad); };

    std::ofstream out(path);
    if (!out) throw DataError("cannot write output file: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (int i = 0; i < cloud.n(); ++i) {
        const char* color = "#b0b0b0";
        if (point_labels) {
            int l = (*point_labels)[i];
            color = l >= 0 ? kPalette[l % 8] : "#d0d0d0";
        }
        out << "<circle class=\"pt\" cx=\"" << fmt(sx(pts(i, 0))) << "\" cy=\""
            << fmt(sy(pts(i, 1))) << "\" r=\"2\" fill=\"" << color
            << "\" fill-opacity=\"0.6\"/>\n";
    }

    for (const auto& layer : graphs) {
        const char* stroke = layer.thick ? "#000000" : "#4878d0";
        const char* width = layer.thick ? "2.5" : "0.8";
        for (const auto& e : layer.edges) {
            auto a = project(layer.positions.row(e[0]));
            auto b = project(layer.positions.row(e[1]));
            out << "<line class=\"edge\" x1=\"" << fmt(sx(a(0))) << "\" y1=\""
                << fmt(sy(a(1))) << "\" x2=\"" << fmt(sx(b(0))) << "\" y2=\""
                << fmt(sy(b(1))) << "\" stroke=\"" << stroke
                << "\" stroke-width=\"" << width << "\"/>\n";
        }
        if (layer.thick)
            for (int v = 0; v < layer.positions.rows(); ++v) {
                auto p = project(layer.positions.row(v));
                out << "<circle class=\"node\" cx=\"" << fmt(sx(p(0)))
                    << "\" cy=\"" << fmt(sy(p(1)))
                    << "\" r=\"4\" fill=\"#000000\"/>\n";
            }
    }
    out << "</svg>\n";
}

} // namespace elpi
