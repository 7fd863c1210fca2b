#include "gpmap/eval.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gpmap {

namespace {

void require_same_spec(const SdfGrid& a, const SdfGrid& b, const char* op) {
    if (!(a.spec == b.spec))
        throw std::invalid_argument(std::string(op) + ": grid specs differ");
}

// Cell centers the true surface passes through: a sign change against any
// 4-neighbor, or a value within half a cell of zero.
std::vector<Point> surface_cells_of_gt(const SdfGrid& gt) {
    const GridSpec& g = gt.spec;
    std::vector<Point> cells;
    for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) {
            const double v = gt.at(i, j);
            bool touched = std::abs(v) <= g.resolution / 2.0;
            if (!touched && i > 0 && v * gt.at(i - 1, j) < 0.0) touched = true;
            if (!touched && i + 1 < g.height && v * gt.at(i + 1, j) < 0.0) touched = true;
            if (!touched && j > 0 && v * gt.at(i, j - 1) < 0.0) touched = true;
            if (!touched && j + 1 < g.width && v * gt.at(i, j + 1) < 0.0) touched = true;
            if (touched) cells.push_back(g.cell_center(i, j));
        }
    return cells;
}

std::vector<Point> band_cells_of_pred(const SdfGrid& pred) {
    std::vector<Point> cells;
    for (int i = 0; i < pred.spec.height; ++i)
        for (int j = 0; j < pred.spec.width; ++j)
            if (std::abs(pred.at(i, j)) <= surface_band)
                cells.push_back(pred.spec.cell_center(i, j));
    return cells;
}

double directed_sup(const std::vector<Point>& from, const std::vector<Point>& to) {
    double sup = 0.0;
    for (const Point& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& b : to) best = std::min(best, (a - b).squaredNorm());
        sup = std::max(sup, best);
    }
    return std::sqrt(sup);
}

std::array<unsigned char, 3> color_of(double v) {
    if (std::abs(v) <= surface_band) return {255, 255, 255};
    const double c = std::clamp(v, -0.5, 0.5);
    const double fade = 1.0 - std::abs(c) / 0.5;
    const auto scaled = static_cast<unsigned char>(std::lround(255.0 * fade));
    if (c > 0.0) return {255, scaled, scaled};
    return {scaled, scaled, 255};
}

std::array<unsigned char, 3> expert_color(int id) {
    // Any stable hash works; keep channels away from white so dots stand out.
    uint64_t h = static_cast<uint64_t>(id) + 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return {static_cast<unsigned char>(h % 200), static_cast<unsigned char>((h >> 8) % 200),
            static_cast<unsigned char>((h >> 16) % 200)};
}

}  // namespace

SdfGrid predict_grid(const Ensemble& ens, const GridSpec& g, PredictMode mode) {
    std::vector<Point> centers;
    centers.reserve(static_cast<size_t>(g.width) * g.height);
    for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) centers.push_back(g.cell_center(i, j));

    const Eigen::VectorXd mu = mode == PredictMode::individual
                                   ? predict_individual(ens, centers)
                                   : predict_mixture(ens, centers);
    SdfGrid out;
    out.spec = g;
    out.values.assign(mu.data(), mu.data() + mu.size());
    return out;
}

std::optional<double> rmsd(const SdfGrid& pred, const SdfGrid& gt) {
    require_same_spec(pred, gt, "rmsd");
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < pred.values.size(); ++i) {
        if (std::abs(pred.values[i]) > surface_band) continue;
        sum += gt.values[i] * gt.values[i];
        ++count;
    }
    if (count == 0) return std::nullopt;
    return std::sqrt(sum / count);
}

std::optional<double> hausdorff(const SdfGrid& pred, const SdfGrid& gt) {
    require_same_spec(pred, gt, "hausdorff");
    const std::vector<Point> a = band_cells_of_pred(pred);
    const std::vector<Point> b = surface_cells_of_gt(gt);
    if (a.empty() || b.empty()) return std::nullopt;
    return std::max(directed_sup(a, b), directed_sup(b, a));
}

void render(const SdfGrid& grid, const std::string& path,
            const std::vector<std::pair<Point, int>>& overlay) {
    const GridSpec& g = grid.spec;
    std::vector<unsigned char> img(static_cast<size_t>(g.width) * g.height * 3);

    // Image rows run top to bottom, grid rows bottom to top.
    auto pixel = [&](int i, int j) -> unsigned char* {
        return img.data() + (static_cast<size_t>(g.height - 1 - i) * g.width + j) * 3;
    };
    for (int i = 0; i < g.height; ++i)
        for (int j = 0; j < g.width; ++j) {
            const auto rgb = color_of(grid.at(i, j));
            std::copy(rgb.begin(), rgb.end(), pixel(i, j));
        }

    for (const auto& [p, id] : overlay) {
        const int j = static_cast<int>(std::floor((p.x() - g.origin.x()) / g.resolution));
        const int i = static_cast<int>(std::floor((p.y() - g.origin.y()) / g.resolution));
        if (i < 0 || i >= g.height || j < 0 || j >= g.width) continue;
        const auto rgb = expert_color(id);
        std::copy(rgb.begin(), rgb.end(), pixel(i, j));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("render: cannot open " + path);
    out << "P6\n" << g.width << " " << g.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!out) throw std::runtime_error("render: write failed for " + path);
}

void write_grid(const std::string& path, const SdfGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_grid: cannot open " + path);

    char buf[64];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof(buf), "%.17g%c", v, sep);
        out << buf;
    };
    put(grid.spec.origin.x(), ' ');
    put(grid.spec.origin.y(), ' ');
    put(grid.spec.resolution, ' ');
    out << grid.spec.width << " " << grid.spec.height << "\n";
    for (int i = 0; i < grid.spec.height; ++i) {
        for (int j = 0; j < grid.spec.width; ++j)
            put(grid.at(i, j), j + 1 == grid.spec.width ? '\n' : ' ');
    }
    if (!out) throw std::runtime_error("write_grid: write failed for " + path);
}

SdfGrid read_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_grid: cannot open " + path);

    SdfGrid grid;
    double x0, y0, res;
    int w, h;
    if (!(in >> x0 >> y0 >> res >> w >> h) || !(res > 0.0) || w < 1 || h < 1)
        throw std::runtime_error("read_grid: bad header in " + path);
    grid.spec = {{x0, y0}, res, w, h};

    grid.values.resize(static_cast<size_t>(w) * h);
    for (double& v : grid.values) {
        if (!(in >> v)) throw std::runtime_error("read_grid: truncated values in " + path);
        if (!std::isfinite(v)) throw std::runtime_error("read_grid: non-finite value in " + path);
    }
    return grid;
}

}  // namespace gpmap
