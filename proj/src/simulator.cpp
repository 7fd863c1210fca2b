#include "gpmap/simulator.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace gpmap {

namespace {

struct Segment {
    Point a, b;
};

std::vector<Segment> all_segments(const World& w) {
    std::vector<Segment> segs;
    for (const Polygon& poly : w.polygons) {
        const size_t n = poly.vertices.size();
        for (size_t i = 0; i < n; ++i)
            segs.push_back({poly.vertices[i], poly.vertices[(i + 1) % n]});
    }
    return segs;
}

bool point_in_polygon(const std::vector<Point>& poly, const Point& p) {
    // Even-odd rule via horizontal ray crossings.
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        const bool straddles = (a.y() > p.y()) != (b.y() > p.y());
        if (straddles && p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            inside = !inside;
    }
    return inside;
}

double point_segment_distance(const Point& p, const Segment& s) {
    const Point e = s.b - s.a;
    const double len2 = e.squaredNorm();
    if (len2 == 0.0) return (p - s.a).norm();
    const double t = std::clamp((p - s.a).dot(e) / len2, 0.0, 1.0);
    return (p - (s.a + t * e)).norm();
}

// First intersection of the ray o + t*dir (t > 0, dir unit) with a segment,
// or infinity.
double ray_segment_hit(const Point& o, const Point& dir, const Segment& s) {
    const Point e = s.b - s.a;
    const double den = e.x() * dir.y() - e.y() * dir.x();
    if (std::abs(den) < 1e-15) return std::numeric_limits<double>::infinity();
    const Point ao = s.a - o;
    const double t = (ao.x() * (-e.y()) + ao.y() * e.x()) / den;
    const double u = (dir.x() * ao.y() - dir.y() * ao.x()) / den;
    if (t <= 1e-12 || u < -1e-12 || u > 1.0 + 1e-12)
        return std::numeric_limits<double>::infinity();
    return t;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double ray_noise(uint64_t seed, uint64_t scan_index, uint64_t ray, double sigma) {
    if (sigma <= 0.0) return 0.0;
    std::mt19937_64 rng(splitmix64(splitmix64(splitmix64(seed) ^ scan_index) ^ ray));
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

}  // namespace

bool point_in_free_space(const World& w, const Point& p) {
    bool in_outer = false;
    for (const Polygon& poly : w.polygons) {
        const bool inside = point_in_polygon(poly.vertices, p);
        if (poly.role == Polygon::Role::outer && inside) in_outer = true;
        if (poly.role == Polygon::Role::obstacle && inside) return false;
    }
    return in_outer;
}

Scan raycast(const World& w, const std::array<double, 3>& pose, const ScanParams& params,
             double noise_sigma, uint64_t seed, uint64_t scan_index) {
    const Point origin{pose[0], pose[1]};
    if (!point_in_free_space(w, origin))
        throw std::invalid_argument("raycast: pose outside free space");

    const std::vector<Segment> segs = all_segments(w);
    Scan s;
    s.pose = pose;
    s.angle_min = params.angle_min;
    s.angle_increment = params.angle_increment;
    s.range_max = params.range_max;
    s.ranges.reserve(params.n_rays);

    for (int i = 0; i < params.n_rays; ++i) {
        const double angle = pose[2] + params.angle_min + i * params.angle_increment;
        const Point dir{std::cos(angle), std::sin(angle)};
        double hit = std::numeric_limits<double>::infinity();
        for (const Segment& seg : segs) hit = std::min(hit, ray_segment_hit(origin, dir, seg));

        if (!(hit < params.range_max)) {
            s.ranges.push_back(params.range_max);
            continue;
        }
        double r = hit + ray_noise(seed, scan_index, static_cast<uint64_t>(i), noise_sigma);
        r = std::min(std::max(r, 1e-9), params.range_max);
        s.ranges.push_back(r);
    }
    return s;
}

SdfGrid ground_truth_sdf(const World& w, const GridSpec& g) {
    const std::vector<Segment> segs = all_segments(w);
    if (segs.empty()) throw std::invalid_argument("ground_truth_sdf: world has no polygons");

    SdfGrid out;
    out.spec = g;
    out.values.assign(static_cast<size_t>(g.width) * g.height, 0.0);
    for (int i = 0; i < g.height; ++i) {
        for (int j = 0; j < g.width; ++j) {
            const Point c = g.cell_center(i, j);
            double d = std::numeric_limits<double>::infinity();
            for (const Segment& seg : segs) d = std::min(d, point_segment_distance(c, seg));
            out.at(i, j) = point_in_free_space(w, c) ? d : -d;
        }
    }
    return out;
}

std::vector<Scan> generate_dataset(const World& w, const std::vector<Point>& waypoints,
                                   double speed, double scan_rate, const ScanParams& params,
                                   double noise_sigma, uint64_t seed,
                                   const std::string& log_path) {
    if (waypoints.empty()) throw std::invalid_argument("generate_dataset: no waypoints");
    if (!(speed > 0.0) || !(scan_rate > 0.0))
        throw std::invalid_argument("generate_dataset: speed and scan_rate must be positive");

    std::vector<double> cumlen{0.0};
    for (size_t i = 1; i < waypoints.size(); ++i)
        cumlen.push_back(cumlen.back() + (waypoints[i] - waypoints[i - 1]).norm());
    const double total = cumlen.back();

    const double spacing = speed / scan_rate;
    const int n_scans = total < 1e-12 ? 1 : static_cast<int>(total / spacing + 1e-9) + 1;

    std::vector<Scan> scans;
    for (int k = 0; k < n_scans; ++k) {
        const double dist = std::min(k * spacing, total);

        // Locate the polyline segment holding this arc length.
        size_t seg = 0;
        while (seg + 2 < cumlen.size() && dist > cumlen[seg + 1]) ++seg;

        std::array<double, 3> pose{waypoints[0].x(), waypoints[0].y(), 0.0};
        if (waypoints.size() > 1) {
            const Point a = waypoints[seg], b = waypoints[seg + 1];
            const double len = (b - a).norm();
            const double t = len < 1e-12 ? 0.0 : (dist - cumlen[seg]) / len;
            const Point p = a + t * (b - a);
            pose = {p.x(), p.y(), std::atan2(b.y() - a.y(), b.x() - a.x())};
        }
        if (!point_in_free_space(w, {pose[0], pose[1]}))
            throw std::invalid_argument("generate_dataset: waypoint segment " +
                                        std::to_string(seg) + " leaves free space");

        Scan s = raycast(w, pose, params, noise_sigma, seed, static_cast<uint64_t>(k));
        s.t = k / scan_rate;
        scans.push_back(std::move(s));
    }

    if (!log_path.empty()) write_scan_log(log_path, scans);
    return scans;
}

World read_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_world: cannot open " + path);

    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& err) {
        throw std::runtime_error("read_world: " + path + ": " + err.what());
    }

    World w;
    bool has_outer = false;
    for (const auto& jp : j.at("polygons")) {
        Polygon poly;
        const std::string role = jp.at("role").get<std::string>();
        if (role == "outer") {
            poly.role = Polygon::Role::outer;
            has_outer = true;
        } else if (role == "obstacle") {
            poly.role = Polygon::Role::obstacle;
        } else {
            throw std::runtime_error("read_world: unknown role '" + role + "' in " + path);
        }
        for (const auto& v : jp.at("points"))
            poly.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        if (poly.vertices.size() < 3)
            throw std::runtime_error("read_world: polygon with fewer than 3 vertices in " + path);
        w.polygons.push_back(std::move(poly));
    }
    if (!has_outer) throw std::runtime_error("read_world: no outer boundary in " + path);
    return w;
}

void write_world(const std::string& path, const World& w) {
    nlohmann::json polys = nlohmann::json::array();
    for (const Polygon& poly : w.polygons) {
        nlohmann::json jp;
        jp["role"] = poly.role == Polygon::Role::outer ? "outer" : "obstacle";
        nlohmann::json pts = nlohmann::json::array();
        for (const Point& v : poly.vertices) pts.push_back({v.x(), v.y()});
        jp["points"] = pts;
        polys.push_back(jp);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_world: cannot open " + path);
    out << nlohmann::json{{"polygons", polys}}.dump(2) << '\n';
}

World square_room(double half_width) {
    const double h = half_width;
    World w;
    w.polygons.push_back({Polygon::Role::outer, {{-h, -h}, {h, -h}, {h, h}, {-h, h}}});
    return w;
}

}  // namespace gpmap
