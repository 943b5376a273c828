#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elpi/data.hpp"
#include "elpi/graph.hpp"

namespace elpi {

// One drawable graph layer. Thin layers are for ensemble members, thick for
// the reference graph.
struct SvgGraphLayer {
    std::vector<std::array<int, 2>> edges;
    Matrix positions;
    bool thick = true;
};

struct SvgProjection {
    bool use_pca = false; // false: raw coordinate pair
    int i = 0;
    int j = 1;
};

// Deterministic static scatter-plus-graph panel; coordinates are written
// with 6 significant digits. Optional per-point labels pick the point color.
void render_svg(const PointCloud& cloud,
                const std::vector<SvgGraphLayer>& graphs,
                const SvgProjection& projection, const std::string& path,
                const std::vector<int>* point_labels = nullptr);

} // namespace elpi
