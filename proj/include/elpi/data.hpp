#pragma once

#include <vector>

#include <Eigen/Dense>

#include "elpi/errors.hpp"

namespace elpi {

inline constexpr int kTrimmed = -1;

// n data points in R^m with per-point positive weights.
struct PointCloud {
    Eigen::MatrixXd x; // n x m
    Eigen::VectorXd w; // length n, all > 0

    int n() const { return static_cast<int>(x.rows()); }
    int dim() const { return static_cast<int>(x.cols()); }

    static PointCloud uniform(Eigen::MatrixXd points) {
        PointCloud c;
        c.w = Eigen::VectorXd::Ones(points.rows());
        c.x = std::move(points);
        return c;
    }

    void check() const {
        if (x.rows() < 1 || x.cols() < 1)
            throw DataError("point cloud must have n >= 1 and m >= 1");
        if (w.size() != x.rows())
            throw DataError("weight vector size does not match point count");
        if (!x.allFinite() || !w.allFinite())
            throw DataError("point cloud contains non-finite entries");
        if ((w.array() <= 0.0).any())
            throw DataError("point weights must be positive");
    }

    PointCloud subset(const std::vector<int>& idx) const {
        PointCloud c;
        c.x.resize(static_cast<int>(idx.size()), x.cols());
        c.w.resize(static_cast<int>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            c.x.row(static_cast<int>(i)) = x.row(idx[i]);
            c.w(static_cast<int>(i)) = w(idx[i]);
        }
        return c;
    }
};

// Per-point assignment to the nearest node, or kTrimmed when the nearest node
// is at distance >= r0. counts holds the assigned weight per node.
struct Partition {
    std::vector<int> assign;
    std::vector<double> counts;

    int trimmed_count() const {
        int t = 0;
        for (int a : assign)
            if (a == kTrimmed) ++t;
        return t;
    }
};

} // namespace elpi
