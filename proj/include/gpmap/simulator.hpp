// Synthetic 2D worlds: polygon environments, a noisy ray-cast range sensor,
// trajectory-driven dataset generation, and ground-truth SDF grids.
#pragma once

#include <cstdint>
#include <string>

#include "gpmap/grid.hpp"
#include "gpmap/scan.hpp"

namespace gpmap {

struct Polygon {
    enum class Role { outer, obstacle };
    Role role = Role::outer;
    std::vector<Point> vertices;  // closed implicitly, last connects to first
};

struct World {
    std::vector<Polygon> polygons;
};

struct ScanParams {
    double angle_min = -2.356194490192344837;       // -135 degrees
    double angle_increment = 0.017453292519943295;  // 1 degree
    int n_rays = 271;
    double range_max = 30.0;
};

bool point_in_free_space(const World& w, const Point& p);

// One scan from the given pose. Ranges carry independent N(0, sigma^2) noise
// drawn from a stream keyed by (seed, scan_index, ray index), clamped to
// (0, range_max]; rays that hit nothing report exactly range_max.
Scan raycast(const World& w, const std::array<double, 3>& pose, const ScanParams& params,
             double noise_sigma, uint64_t seed, uint64_t scan_index = 0);

// Signed Euclidean distance at every cell center: magnitude is the distance
// to the nearest polygon segment, sign is positive in free space.
SdfGrid ground_truth_sdf(const World& w, const GridSpec& g);

// Drive along the waypoint polyline at constant speed, scanning at scan_rate;
// the pose heading follows the direction of travel. Returns the scans in
// order and writes them to log_path when it is non-empty.
std::vector<Scan> generate_dataset(const World& w, const std::vector<Point>& waypoints,
                                   double speed, double scan_rate, const ScanParams& params,
                                   double noise_sigma, uint64_t seed,
                                   const std::string& log_path = "");

World read_world(const std::string& path);
void write_world(const std::string& path, const World& w);

// Axis-aligned square room of the given half width, centered at the origin.
World square_room(double half_width);

}  // namespace gpmap
