#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "gpmap/eval.hpp"
#include "gpmap/simulator.hpp"
#include "test_util.hpp"

using namespace gpmap;

namespace {

SdfGrid make_grid(const GridSpec& spec, std::vector<double> values) {
    SdfGrid g;
    g.spec = spec;
    g.values = std::move(values);
    return g;
}

Ensemble wall_ensemble() {
    MeasurementBatch b;
    std::vector<double> vals;
    for (double x = 0.0; x <= 4.0; x += 0.5) {
        b.locations.push_back({x, 0.0});
        vals.push_back(0.0);
        b.kinds.push_back(MeasurementKind::surface);
        b.locations.push_back({x, 0.1});
        vals.push_back(0.1);
        b.kinds.push_back(MeasurementKind::auxiliary);
    }
    b.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    return init_ensemble(b, EnsembleConfig{});
}

std::vector<unsigned char> read_ppm(const std::string& path, int& w, int& h) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string magic;
    int maxval;
    in >> magic >> w >> h >> maxval;
    REQUIRE(magic == "P6");
    REQUIRE(maxval == 255);
    in.get();  // single whitespace after the header
    std::vector<unsigned char> bytes(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    REQUIRE(in.gcount() == static_cast<std::streamsize>(bytes.size()));
    return bytes;
}

}  // namespace

TEST_CASE("a prior-only expert predicts an all-zero grid") {
    MeasurementBatch b;
    std::vector<double> vals;
    for (double x = 0.0; x <= 3.0; x += 1.0) {
        b.locations.push_back({x, 0.0});
        vals.push_back(0.0);
        b.kinds.push_back(MeasurementKind::surface);
    }
    b.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    Ensemble ens = init_ensemble(b, EnsembleConfig{});

    SdfGrid g = predict_grid(ens, {{-1.0, -1.0}, 0.5, 8, 8}, PredictMode::individual);
    for (double v : g.values) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("a one-cell grid centered on a primary PI reads off its mean") {
    Ensemble ens = wall_ensemble();
    const Expert& e = ens.experts.at(0);
    const Point pi = e.gp.pis[2];
    GridSpec spec{{pi.x() - 0.05, pi.y() - 0.05}, 0.1, 1, 1};
    SdfGrid g = predict_grid(ens, spec, PredictMode::individual);
    CHECK(std::abs(g.values[0] - e.gp.mean[2]) < 1e-9);
}

TEST_CASE("individual and mixture grids agree for a lone expert") {
    Ensemble ens = wall_ensemble();
    GridSpec spec{{-0.55, -0.55}, 0.1, 40, 12};
    SdfGrid a = predict_grid(ens, spec, PredictMode::individual);
    SdfGrid b = predict_grid(ens, spec, PredictMode::mixture);
    for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("rmsd is zero when the band sits on the true surface") {
    GridSpec spec{{0.0, 0.0}, 0.1, 3, 1};
    SdfGrid pred = make_grid(spec, {0.0, 0.5, -0.5});
    SdfGrid gt = make_grid(spec, {0.0, 2.0, 2.0});
    auto r = rmsd(pred, gt);
    REQUIRE(r.has_value());
    CHECK(*r == 0.0);
}

TEST_CASE("rmsd averages squared truth over the band cells") {
    GridSpec spec{{0.0, 0.0}, 0.1, 3, 1};
    SdfGrid pred = make_grid(spec, {0.01, -0.02, 0.5});
    SdfGrid gt = make_grid(spec, {0.03, -0.04, 9.0});
    auto r = rmsd(pred, gt);
    REQUIRE(r.has_value());
    CHECK(std::abs(*r - 0.035355339059327376) < 1e-12);
}

TEST_CASE("rmsd is undefined without band cells") {
    GridSpec spec{{0.0, 0.0}, 0.1, 2, 1};
    CHECK_FALSE(rmsd(make_grid(spec, {0.5, -0.3}), make_grid(spec, {0.0, 0.0})).has_value());
}

TEST_CASE("metrics reject mismatched grid specs") {
    SdfGrid a = make_grid({{0.0, 0.0}, 0.1, 2, 1}, {0.0, 0.0});
    SdfGrid b = make_grid({{0.0, 0.0}, 0.2, 2, 1}, {0.0, 0.0});
    CHECK_THROWS_AS(rmsd(a, b), std::invalid_argument);
    CHECK_THROWS_AS(hausdorff(a, b), std::invalid_argument);
}

TEST_CASE("hausdorff vanishes when both surfaces occupy the same cells") {
    GridSpec spec{{-0.05, -0.05}, 0.1, 5, 1};
    SdfGrid pred = make_grid(spec, {0.9, 0.0, 0.9, 0.9, 0.9});
    SdfGrid gt = make_grid(spec, {0.9, 0.01, 0.9, 0.9, 0.9});
    auto h = hausdorff(pred, gt);
    REQUIRE(h.has_value());
    CHECK(*h == 0.0);
}

TEST_CASE("hausdorff between two singleton cells is their spacing") {
    // Column of four cells at x=0, centers y = 0, 0.1, 0.2, 0.3.
    GridSpec spec{{-0.05, -0.05}, 0.1, 1, 4};
    SdfGrid pred = make_grid(spec, {0.0, 1.0, 1.0, 1.0});
    SdfGrid gt = make_grid(spec, {1.0, 1.0, 1.0, 0.0});
    auto h = hausdorff(pred, gt);
    REQUIRE(h.has_value());
    CHECK(std::abs(*h - 0.3) < 1e-12);
}

TEST_CASE("hausdorff takes the larger directed distance") {
    // Centers x = 0 .. 1; predicted surface only at x=0, truth at both ends.
    GridSpec spec{{-0.05, -0.05}, 0.1, 11, 1};
    std::vector<double> pv(11, 1.0), gv(11, 0.6);
    pv[0] = 0.0;
    gv[0] = 0.0;
    gv[10] = 0.0;
    auto h = hausdorff(make_grid(spec, pv), make_grid(spec, gv));
    REQUIRE(h.has_value());
    CHECK(std::abs(*h - 1.0) < 1e-12);
}

TEST_CASE("gt cells count as surface on sign changes too") {
    // Values straddle zero between columns 1 and 2 without small magnitudes.
    GridSpec spec{{0.0, 0.0}, 0.1, 4, 1};
    SdfGrid pred = make_grid(spec, {0.0, 0.0, 1.0, 1.0});
    SdfGrid gt = make_grid(spec, {0.3, 0.2, -0.2, 0.3});
    auto h = hausdorff(pred, gt);
    REQUIRE(h.has_value());
    // B = centers of columns 1..3 (both neighbors of the crossing), A = 0..1;
    // column 3 is 0.2 from the predicted band.
    CHECK(std::abs(*h - 0.2) < 1e-12);
}

TEST_CASE("hausdorff matches a brute-force oracle on random grids") {
    std::mt19937 rng(19);
    std::uniform_int_distribution<int> pick(0, 2);
    const double choices[3] = {-0.01, 0.3, -0.3};
    GridSpec spec{{0.0, 0.0}, 0.1, 8, 8};

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> pv(64), gv(64);
        for (int i = 0; i < 64; ++i) {
            pv[i] = choices[pick(rng)];
            gv[i] = choices[pick(rng)];
        }
        SdfGrid pred = make_grid(spec, pv), gt = make_grid(spec, gv);

        std::vector<Point> A, B;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
                if (std::abs(pred.at(i, j)) <= 0.02) A.push_back(spec.cell_center(i, j));
                const double v = gt.at(i, j);
                bool touched = std::abs(v) <= 0.05;
                if (i > 0 && v * gt.at(i - 1, j) < 0) touched = true;
                if (i < 7 && v * gt.at(i + 1, j) < 0) touched = true;
                if (j > 0 && v * gt.at(i, j - 1) < 0) touched = true;
                if (j < 7 && v * gt.at(i, j + 1) < 0) touched = true;
                if (touched) B.push_back(spec.cell_center(i, j));
            }

        auto h = hausdorff(pred, gt);
        if (A.empty() || B.empty()) {
            CHECK_FALSE(h.has_value());
            continue;
        }
        double expect = 0.0;
        for (const Point& a : A) {
            double best = 1e18;
            for (const Point& b : B) best = std::min(best, (a - b).norm());
            expect = std::max(expect, best);
        }
        for (const Point& b : B) {
            double best = 1e18;
            for (const Point& a : A) best = std::min(best, (a - b).norm());
            expect = std::max(expect, best);
        }
        REQUIRE(h.has_value());
        CHECK(std::abs(*h - expect) < 1e-12);
    }
}

TEST_CASE("the perfect predictor scores within grid quantization") {
    World w = square_room(5.0);
    w.polygons.push_back({Polygon::Role::obstacle, {{1.0, 1.0}, {3.0, 1.0}, {3.0, 3.0}, {1.0, 3.0}}});
    SdfGrid gt = ground_truth_sdf(w, {{-5.55, -5.55}, 0.1, 111, 111});

    auto r = rmsd(gt, gt);
    auto h = hausdorff(gt, gt);
    REQUIRE(r.has_value());
    REQUIRE(h.has_value());
    CHECK(*r <= 0.05);
    CHECK(*h <= 0.1 * std::sqrt(2.0) + 1e-12);
}

TEST_CASE("an all-zero grid renders pure white") {
    const auto path = std::filesystem::temp_directory_path() / "gpmap_white.ppm";
    render(make_grid({{0.0, 0.0}, 0.1, 3, 2}, std::vector<double>(6, 0.0)), path.string());
    int w, h;
    std::vector<unsigned char> img = read_ppm(path.string(), w, h);
    CHECK(w == 3);
    CHECK(h == 2);
    for (unsigned char c : img) CHECK(c == 255);
    std::filesystem::remove(path);
}

TEST_CASE("saturated values render pure blue and pure red") {
    const auto path = std::filesystem::temp_directory_path() / "gpmap_ends.ppm";
    render(make_grid({{0.0, 0.0}, 0.1, 2, 1}, {-0.5, 0.5}), path.string());
    int w, h;
    std::vector<unsigned char> img = read_ppm(path.string(), w, h);
    REQUIRE(img.size() == 6);
    CHECK(img[0] == 0);
    CHECK(img[1] == 0);
    CHECK(img[2] == 255);
    CHECK(img[3] == 255);
    CHECK(img[4] == 0);
    CHECK(img[5] == 0);
    std::filesystem::remove(path);
}

TEST_CASE("values past the clamp render like the endpoints") {
    const auto path = std::filesystem::temp_directory_path() / "gpmap_clamp.ppm";
    render(make_grid({{0.0, 0.0}, 0.1, 2, 1}, {-3.0, 7.0}), path.string());
    int w, h;
    std::vector<unsigned char> img = read_ppm(path.string(), w, h);
    CHECK(img[2] == 255);
    CHECK(img[3] == 255);
    CHECK(img[1] == 0);
    CHECK(img[4] == 0);
    std::filesystem::remove(path);
}

TEST_CASE("overlay paints one dot per pseudo-input") {
    const auto path = std::filesystem::temp_directory_path() / "gpmap_overlay.ppm";
    SdfGrid g = make_grid({{0.0, 0.0}, 0.1, 4, 4}, std::vector<double>(16, 0.0));
    render(g, path.string(), {{{0.05, 0.05}, 0}, {{0.35, 0.35}, 3}});
    int w, h;
    std::vector<unsigned char> img = read_ppm(path.string(), w, h);
    int dots = 0;
    for (size_t i = 0; i < img.size(); i += 3)
        if (img[i] != 255 || img[i + 1] != 255 || img[i + 2] != 255) ++dots;
    CHECK(dots == 2);
    std::filesystem::remove(path);
}

TEST_CASE("grid files round-trip bitwise") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    SdfGrid g;
    g.spec = {{u(rng), u(rng)}, 0.05, 7, 5};
    for (int i = 0; i < 35; ++i) g.values.push_back(u(rng));

    const auto path = std::filesystem::temp_directory_path() / "gpmap_grid.sdf";
    write_grid(path.string(), g);
    SdfGrid back = read_grid(path.string());
    CHECK(back.spec == g.spec);
    REQUIRE(back.values.size() == g.values.size());
    for (size_t i = 0; i < g.values.size(); ++i) CHECK(back.values[i] == g.values[i]);
    std::filesystem::remove(path);
}

TEST_CASE("unreadable or malformed grid files are rejected") {
    CHECK_THROWS_AS(read_grid("/nonexistent/grid.sdf"), std::runtime_error);
    const auto path = std::filesystem::temp_directory_path() / "gpmap_badgrid.sdf";
    std::ofstream(path.string()) << "0 0 0.1 2 2\n1 2 3\n";
    CHECK_THROWS_WITH_AS(read_grid(path.string()), doctest::Contains("truncated"),
                         std::runtime_error);
    std::filesystem::remove(path);
}
