// Posed 2D range scans and their conversion into measurement batches, plus
// the JSON-lines scan log reader and writer.
#pragma once

#include <array>
#include <string>

#include "gpmap/expert.hpp"

namespace gpmap {

struct Scan {
    double t = 0.0;
    std::array<double, 3> pose{0.0, 0.0, 0.0};  // x, y, heading
    double angle_min = 0.0;
    double angle_increment = 0.0;
    double range_max = 0.0;
    std::vector<double> ranges;
};

// Each valid ray (finite range strictly below range_max) contributes a
// surface point at the hit with value 0 and an auxiliary point aux_offset
// before the hit along the ray with value +aux_offset. Rays shorter than
// aux_offset produce only the surface point. Non-finite ranges are skipped;
// when skipped_nonfinite is given it receives how many.
MeasurementBatch scan_to_measurements(const Scan& s, const EnsembleConfig& cfg,
                                      int* skipped_nonfinite = nullptr);

// One JSON object per line with keys t, pose, angle_min, angle_increment,
// range_max, ranges. A stride of k keeps scans 0, k, 2k, ... in file order.
std::vector<Scan> read_scan_log(const std::string& path, int stride = 1);

void write_scan_log(const std::string& path, const std::vector<Scan>& scans);

}  // namespace gpmap
