#include "doctest.h"

#include <algorithm>
#include <random>

#include "gpmap/ensemble.hpp"
#include "test_util.hpp"

using namespace gpmap;

namespace {

MeasurementBatch wall_scan(double x0, double x1, double step = 0.2) {
    MeasurementBatch m;
    std::vector<double> vals;
    for (double x = x0; x < x1 + 1e-9; x += step) {
        m.locations.push_back({x, 0.0});
        vals.push_back(0.0);
        m.kinds.push_back(MeasurementKind::surface);
        m.locations.push_back({x, 0.1});
        vals.push_back(0.1);
        m.kinds.push_back(MeasurementKind::auxiliary);
    }
    m.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    return m;
}

std::vector<std::pair<double, double>> pi_multiset(const Ensemble& ens) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [id, e] : ens.experts)
        for (const Point& p : e.gp.pis) pts.emplace_back(p.x(), p.y());
    std::sort(pts.begin(), pts.end());
    return pts;
}

void check_partition_consistent(const Ensemble& ens) {
    std::vector<std::pair<std::pair<double, double>, int>> expect, got;
    for (const auto& [id, e] : ens.experts)
        for (int i = 0; i < e.primary_count; ++i)
            expect.push_back({{e.gp.pis[i].x(), e.gp.pis[i].y()}, id});
    for (const auto& s : ens.idx.sites) got.push_back({{s.p.x(), s.p.y()}, s.expert});
    std::sort(expect.begin(), expect.end());
    std::sort(got.begin(), got.end());
    REQUIRE(got.size() == expect.size());
    CHECK(got == expect);
}

}  // namespace

TEST_CASE("init with a single surface entry yields one expert with one PI") {
    MeasurementBatch b;
    b.locations.push_back({2.0, 3.0});
    b.values = Eigen::VectorXd::Zero(1);
    b.kinds.push_back(MeasurementKind::surface);

    Ensemble ens = init_ensemble(b, EnsembleConfig{});
    REQUIRE(ens.experts.size() == 1);
    const Expert& e = ens.experts.at(0);
    CHECK(e.primary_count == 1);
    CHECK(e.gp.size() == 1);
    CHECK((e.gp.pis[0] - Point{2.0, 3.0}).norm() == 0.0);
    CHECK(ens.scan_counter == 1);
    CHECK(ens.idx.sites.size() == 1);
}

TEST_CASE("init rejects an empty first batch") {
    MeasurementBatch b;
    b.values = Eigen::VectorXd(0);
    CHECK_THROWS_AS(init_ensemble(b, EnsembleConfig{}), std::invalid_argument);
}

TEST_CASE("init subsamples a 500-entry batch down to 50 pseudo-inputs") {
    MeasurementBatch b;
    std::vector<double> vals;
    for (int i = 0; i < 500; ++i) {
        b.locations.push_back({0.2 * i, 0.0});
        vals.push_back(0.0);
        b.kinds.push_back(MeasurementKind::surface);
    }
    b.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());

    Ensemble ens = init_ensemble(b, EnsembleConfig{});
    const Expert& e = ens.experts.at(0);
    CHECK(e.primary_count == 50);

    for (int i = 0; i < e.gp.size(); ++i)
        for (int j = i + 1; j < e.gp.size(); ++j)
            CHECK((e.gp.pis[i] - e.gp.pis[j]).norm() >= 0.1);
}

TEST_CASE("init places pseudo-inputs at surface locations only") {
    MeasurementBatch b = wall_scan(0.0, 4.0, 1.0);
    Ensemble ens = init_ensemble(b, EnsembleConfig{});
    for (const Point& p : ens.experts.at(0).gp.pis) CHECK(p.y() == 0.0);
    CHECK(ens.experts.at(0).primary_count == 5);
}

TEST_CASE("init falls back to auxiliary locations when no ray hit a surface") {
    MeasurementBatch b;
    std::vector<double> vals;
    for (int i = 0; i < 4; ++i) {
        b.locations.push_back({1.0 * i, 0.1});
        vals.push_back(0.1);
        b.kinds.push_back(MeasurementKind::auxiliary);
    }
    b.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());

    Ensemble ens = init_ensemble(b, EnsembleConfig{});
    CHECK(ens.experts.at(0).primary_count == 4);
}

TEST_CASE("step with an empty batch leaves the PI multiset unchanged") {
    Ensemble ens = init_ensemble(wall_scan(0.0, 6.0), EnsembleConfig{});
    step(ens, wall_scan(0.0, 6.0));

    const auto before = pi_multiset(ens);
    MeasurementBatch empty;
    empty.values = Eigen::VectorXd(0);
    step(ens, empty);

    CHECK(pi_multiset(ens) == before);
    CHECK(ens.scan_counter == 3);
}

TEST_CASE("repeating one batch converges: primary count stops growing") {
    MeasurementBatch b = wall_scan(0.0, 8.0);
    Ensemble ens = init_ensemble(b, EnsembleConfig{});

    std::vector<int> counts;
    for (int k = 0; k < 4; ++k) {
        step(ens, b);
        counts.push_back(ens.total_primary_pis());
    }
    for (size_t k = 1; k + 1 < counts.size(); ++k) CHECK(counts[k + 1] <= counts[k]);
}

TEST_CASE("partition stays consistent with the experts across steps") {
    std::mt19937 rng(11);
    Ensemble ens = init_ensemble(wall_scan(0.0, 6.0), EnsembleConfig{});
    check_partition_consistent(ens);
    for (int k = 0; k < 3; ++k) {
        step(ens, testutil::wall_batch(rng, 15));
        check_partition_consistent(ens);
    }
}

TEST_CASE("total PI count stays below the number of measurements fed") {
    std::mt19937 rng(3);
    MeasurementBatch first = wall_scan(0.0, 6.0);
    Ensemble ens = init_ensemble(first, EnsembleConfig{});
    int fed = first.size();
    for (int k = 0; k < 3; ++k) {
        MeasurementBatch b = testutil::wall_batch(rng, 20);
        step(ens, b);
        fed += b.size();
    }
    CHECK(ens.total_pis() < fed);
}

TEST_CASE("individual prediction of a lone expert is its fitc_predict mean") {
    Ensemble ens = init_ensemble(wall_scan(0.0, 5.0), EnsembleConfig{});
    std::mt19937 rng(7);
    const std::vector<Point> Xs = testutil::random_points(rng, 40, -1.0, 6.0);

    const Eigen::VectorXd got = predict_individual(ens, Xs);
    const auto [mu, cov] = fitc_predict(ens.experts.at(0).gp, Xs);
    for (int i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - mu[i]) < 1e-12);
}

TEST_CASE("individual prediction at a primary PI returns that mean entry") {
    Ensemble ens = init_ensemble(wall_scan(0.0, 5.0), EnsembleConfig{});
    const Expert& e = ens.experts.at(0);
    std::vector<Point> Xs(e.gp.pis.begin(), e.gp.pis.begin() + e.primary_count);
    const Eigen::VectorXd got = predict_individual(ens, Xs);
    for (int i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - e.gp.mean[i]) < 1e-9);
}

TEST_CASE("points on either side of the bisector go to different experts") {
    testutil::WallFixture f = testutil::wall_fixture(21, 0.05);
    Ensemble ens;
    ens.cfg = f.cfg;
    ens.experts.emplace(0, f.a);
    ens.experts.emplace(1, f.b);
    ens.next_id = 2;
    ens.scan_counter = 1;
    rebuild_index(ens);

    // The halves meet near x=5; query clearly left and clearly right of it.
    const std::vector<Point> Xs = {{2.0, 0.05}, {8.0, 0.05}};
    CHECK(responsible_expert(ens.idx, Xs[0]) == 0);
    CHECK(responsible_expert(ens.idx, Xs[1]) == 1);

    const Eigen::VectorXd got = predict_individual(ens, Xs);
    const Eigen::VectorXd via_a = fitc_predict_mean(f.a.gp, {Xs[0]});
    const Eigen::VectorXd via_b = fitc_predict_mean(f.b.gp, {Xs[1]});
    CHECK(got[0] == via_a[0]);
    CHECK(got[1] == via_b[1 - 1]);

    // The biases push the two posteriors apart, so attribution is visible in
    // the values as well.
    const Eigen::VectorXd cross_a = fitc_predict_mean(f.a.gp, {Xs[1]});
    CHECK(std::abs(got[1] - cross_a[0]) > 1e-6);
}

TEST_CASE("mixture prediction of a lone expert equals the individual one") {
    Ensemble ens = init_ensemble(wall_scan(0.0, 5.0), EnsembleConfig{});
    std::mt19937 rng(13);
    const std::vector<Point> Xs = testutil::random_points(rng, 30, -1.0, 6.0);
    const Eigen::VectorXd ind = predict_individual(ens, Xs);
    const Eigen::VectorXd mix = predict_mixture(ens, Xs);
    for (int i = 0; i < ind.size(); ++i) CHECK(mix[i] == ind[i]);
}

TEST_CASE("mixture at a point equidistant from two agreeing experts keeps the value") {
    // Two single-PI experts built from the same sort of data, placed
    // symmetrically about the query, so both predict the same value there.
    EnsembleConfig cfg;
    auto one_expert = [&](int id, double cx) {
        MeasurementBatch m;
        m.locations.push_back({cx, 0.0});
        m.values = Eigen::VectorXd::Constant(1, 0.04);
        m.kinds.push_back(MeasurementKind::surface);
        SparseGP gp = fitc_init({{cx, 0.0}}, m, cfg.noise(), cfg.kernel());
        return make_expert(id, std::move(gp), 1);
    };

    Ensemble ens;
    ens.cfg = cfg;
    ens.experts.emplace(0, one_expert(0, 0.0));
    ens.experts.emplace(1, one_expert(1, 2.0));
    ens.next_id = 2;
    ens.scan_counter = 1;
    rebuild_index(ens);

    const Point q{1.0, 0.0};
    const double va = fitc_predict_mean(ens.experts.at(0).gp, {q})[0];
    const double vb = fitc_predict_mean(ens.experts.at(1).gp, {q})[0];
    REQUIRE(std::abs(va - vb) < 1e-12);

    const Eigen::VectorXd mix = predict_mixture(ens, {q});
    CHECK(std::abs(mix[0] - va) < 1e-12);
}

TEST_CASE("mixture output is a convex combination of contributing experts") {
    testutil::WallFixture f = testutil::wall_fixture(5, 0.05);
    Ensemble ens;
    ens.cfg = f.cfg;
    ens.experts.emplace(0, f.a);
    ens.experts.emplace(1, f.b);
    ens.next_id = 2;
    ens.scan_counter = 1;
    rebuild_index(ens);

    std::mt19937 rng(17);
    const std::vector<Point> Xs = testutil::random_points(rng, 60, 0.0, 10.0);
    const Eigen::VectorXd mix = predict_mixture(ens, Xs);

    for (int i = 0; i < static_cast<int>(Xs.size()); ++i) {
        const int resp = responsible_expert(ens.idx, Xs[i]);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& [id, e] : ens.experts) {
            double d = std::numeric_limits<double>::infinity();
            for (int k = 0; k < e.primary_count; ++k)
                d = std::min(d, (e.gp.pis[k] - Xs[i]).norm());
            if (d > ens.cfg.mix_radius && id != resp) continue;
            const double v = fitc_predict_mean(e.gp, {Xs[i]})[0];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(mix[i] >= lo - 1e-12);
        CHECK(mix[i] <= hi + 1e-12);
    }
}

TEST_CASE("identical inputs give identical ensembles and predictions") {
    auto run = [] {
        std::mt19937 rng(99);
        Ensemble ens = init_ensemble(wall_scan(0.0, 6.0), EnsembleConfig{});
        for (int k = 0; k < 3; ++k) step(ens, testutil::wall_batch(rng, 15));
        return ens;
    };
    Ensemble e1 = run(), e2 = run();

    CHECK(pi_multiset(e1) == pi_multiset(e2));
    CHECK(e1.total_primary_pis() == e2.total_primary_pis());
    CHECK(e1.experts.size() == e2.experts.size());

    std::mt19937 rng(123);
    const std::vector<Point> Xs = testutil::random_points(rng, 50, -1.0, 8.0);
    const Eigen::VectorXd p1 = predict_individual(e1, Xs);
    const Eigen::VectorXd p2 = predict_individual(e2, Xs);
    const Eigen::VectorXd m1 = predict_mixture(e1, Xs);
    const Eigen::VectorXd m2 = predict_mixture(e2, Xs);
    for (int i = 0; i < p1.size(); ++i) {
        CHECK(std::abs(p1[i] - p2[i]) <= 1e-12);
        CHECK(std::abs(m1[i] - m2[i]) <= 1e-12);
    }
}
