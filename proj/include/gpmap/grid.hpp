// Regular 2D grids of signed-distance values, shared between the simulator
// (ground truth) and the evaluation pipeline (predictions, metrics).
#pragma once

#include <vector>

#include "gpmap/kernel.hpp"

namespace gpmap {

struct GridSpec {
    Point origin{0.0, 0.0};
    double resolution = 0.1;
    int width = 1;
    int height = 1;

    // Cell (row i, column j) covers a resolution-sized square; values live at
    // its center.
    Point cell_center(int i, int j) const {
        return {origin.x() + (j + 0.5) * resolution, origin.y() + (i + 0.5) * resolution};
    }
    bool operator==(const GridSpec& o) const {
        return origin == o.origin && resolution == o.resolution && width == o.width &&
               height == o.height;
    }
};

struct SdfGrid {
    GridSpec spec;
    std::vector<double> values;  // row-major, values[i * width + j]

    double at(int i, int j) const { return values[static_cast<size_t>(i) * spec.width + j]; }
    double& at(int i, int j) { return values[static_cast<size_t>(i) * spec.width + j]; }
};

}  // namespace gpmap
