#include "gpmap/scan.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace gpmap {

MeasurementBatch scan_to_measurements(const Scan& s, const EnsembleConfig& cfg,
                                      int* skipped_nonfinite) {
    MeasurementBatch batch;
    std::vector<double> vals;
    int skipped = 0;

    const double px = s.pose[0], py = s.pose[1], heading = s.pose[2];
    for (size_t i = 0; i < s.ranges.size(); ++i) {
        const double r = s.ranges[i];
        if (!std::isfinite(r)) {
            ++skipped;
            continue;
        }
        if (r >= s.range_max - 1e-6) continue;

        const double angle = heading + s.angle_min + static_cast<double>(i) * s.angle_increment;
        const Point dir{std::cos(angle), std::sin(angle)};
        const Point hit{px + r * dir.x(), py + r * dir.y()};

        batch.locations.push_back(hit);
        vals.push_back(0.0);
        batch.kinds.push_back(MeasurementKind::surface);

        if (r > cfg.aux_offset) {
            batch.locations.push_back(hit - cfg.aux_offset * dir);
            vals.push_back(cfg.aux_offset);
            batch.kinds.push_back(MeasurementKind::auxiliary);
        }
    }

    batch.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    if (skipped_nonfinite) *skipped_nonfinite = skipped;
    return batch;
}

namespace {

double json_range(const nlohmann::json& v) {
    // The writer emits null for non-finite ranges; surface them as NaN so the
    // converter can skip and tally them.
    if (!v.is_number()) return std::numeric_limits<double>::quiet_NaN();
    return v.get<double>();
}

Scan parse_scan_line(const std::string& line, int line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& err) {
        throw std::runtime_error("scan log line " + std::to_string(line_no) + ": " + err.what());
    }

    try {
        Scan s;
        s.t = j.at("t").get<double>();
        const auto& pose = j.at("pose");
        if (!pose.is_array() || pose.size() != 3)
            throw std::runtime_error("pose must be a 3-array");
        for (int k = 0; k < 3; ++k) s.pose[k] = pose[k].get<double>();
        s.angle_min = j.at("angle_min").get<double>();
        s.angle_increment = j.at("angle_increment").get<double>();
        s.range_max = j.at("range_max").get<double>();
        for (const auto& v : j.at("ranges")) s.ranges.push_back(json_range(v));
        if (s.ranges.empty()) throw std::runtime_error("ranges must be non-empty");
        if (!(s.angle_increment > 0.0))
            throw std::runtime_error("angle_increment must be positive");
        return s;
    } catch (const std::exception& err) {
        throw std::runtime_error("scan log line " + std::to_string(line_no) + ": " + err.what());
    }
}

}  // namespace

std::vector<Scan> read_scan_log(const std::string& path, int stride) {
    if (stride < 1) throw std::invalid_argument("read_scan_log: stride must be >= 1");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_scan_log: cannot open " + path);

    std::vector<Scan> scans;
    std::string line;
    int line_no = 0;
    int scan_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (scan_index % stride == 0) scans.push_back(parse_scan_line(line, line_no));
        ++scan_index;
    }
    return scans;
}

void write_scan_log(const std::string& path, const std::vector<Scan>& scans) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_scan_log: cannot open " + path);

    for (const Scan& s : scans) {
        nlohmann::json j;
        j["t"] = s.t;
        j["pose"] = {s.pose[0], s.pose[1], s.pose[2]};
        j["angle_min"] = s.angle_min;
        j["angle_increment"] = s.angle_increment;
        j["range_max"] = s.range_max;
        j["ranges"] = s.ranges;
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write_scan_log: write failed for " + path);
}

}  // namespace gpmap
