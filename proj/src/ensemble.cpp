#include "gpmap/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpmap {

void rebuild_index(Ensemble& ens) {
    std::vector<std::pair<Point, int>> sites;
    for (const auto& [id, e] : ens.experts)
        for (int i = 0; i < e.primary_count; ++i) sites.emplace_back(e.gp.pis[i], id);
    ens.idx = build_partition(sites);
}

Ensemble init_ensemble(const MeasurementBatch& first_batch, const EnsembleConfig& cfg) {
    validate(cfg);
    const int n = first_batch.size();
    if (n < 1) throw std::invalid_argument("init_ensemble: empty first batch");

    // Deterministic subsample of 50 entries in ray order.
    std::vector<int> pick;
    if (n <= 50) {
        for (int i = 0; i < n; ++i) pick.push_back(i);
    } else {
        for (int i = 0; i < 50; ++i) pick.push_back(static_cast<int>(i * int64_t{n} / 50));
    }
    MeasurementBatch sub;
    std::vector<double> vals;
    for (int i : pick) {
        sub.locations.push_back(first_batch.locations[i]);
        vals.push_back(first_batch.values[i]);
        sub.kinds.push_back(first_batch.kinds[i]);
    }
    sub.values = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());

    // Primary PIs: surface locations thinned to the minimum spacing. Should
    // the subsample contain no surface hit, fall back to any locations.
    std::vector<Point> pis;
    auto thin_in = [&](bool surface_only) {
        for (int i = 0; i < sub.size(); ++i) {
            if (surface_only && sub.kinds[i] != MeasurementKind::surface) continue;
            bool ok = true;
            for (const Point& p : pis)
                if ((p - sub.locations[i]).norm() < cfg.min_pi_dist) ok = false;
            if (ok) pis.push_back(sub.locations[i]);
        }
    };
    thin_in(true);
    if (pis.empty()) thin_in(false);

    Ensemble ens;
    ens.cfg = cfg;
    SparseGP gp = fitc_init(pis, sub, cfg.noise(), cfg.kernel());
    const int pc = gp.size();
    ens.experts.emplace(0, make_expert(0, std::move(gp), pc));
    ens.next_id = 1;
    ens.scan_counter = 1;
    rebuild_index(ens);
    return ens;
}

namespace {

template <typename F>
auto with_expert_context(int id, int scan, const char* op, F&& f) {
    try {
        return f();
    } catch (const NumericalError& err) {
        throw NumericalError("expert " + std::to_string(id) + ", scan " +
                             std::to_string(scan) + ", " + op + ": " + err.what());
    }
}

}  // namespace

void step(Ensemble& ens, const MeasurementBatch& batch) {
    const int scan = ens.scan_counter;

    // (1) extend every expert against the pre-step partition.
    std::vector<char> used(batch.size(), 0);
    for (auto& [id, e] : ens.experts) {
        ExtendResult r = with_expert_context(id, scan, "extend",
                                             [&] { return extend(e, batch, ens.idx, ens.cfg); });
        for (int i : r.used) used[i] = 1;
        e = std::move(r.expert);
    }

    // (2) regions follow the grown primary sets.
    rebuild_index(ens);

    // (3) posterior updates with the remaining measurements.
    for (auto& [id, e] : ens.experts)
        e = with_expert_context(id, scan, "update",
                                [&] { return update_expert(e, batch, used, ens.idx, ens.cfg); });

    // (4) contraction.
    for (auto& [id, e] : ens.experts)
        e = with_expert_context(id, scan, "contract",
                                [&] { return contract(e, batch, ens.idx, ens.cfg); });

    // (5) regions follow the shrunk primary sets.
    rebuild_index(ens);

    // (6) subdivision of oversized experts.
    {
        std::vector<int> ids;
        for (const auto& [id, e] : ens.experts) ids.push_back(id);
        bool split = false;
        for (int id : ids) {
            Expert& e = ens.experts.at(id);
            if (e.primary_count <= ens.cfg.n_max) continue;
            std::vector<Expert> parts = with_expert_context(
                id, scan, "subdivide", [&] { return subdivide(e, ens.cfg, ens.next_id); });
            ens.experts.erase(id);
            for (Expert& p : parts) {
                const int pid = p.id;
                ens.experts.emplace(pid, std::move(p));
            }
            split = true;
        }
        if (split) rebuild_index(ens);
    }

    // (7) harmonize experts whose pooled boundary discrepancy is too large.
    // Neighbor posteriors are read from a snapshot taken before any expert
    // harmonizes, so the outcome does not depend on expert order.
    {
        const std::map<int, Expert> snapshot = ens.experts;
        for (auto& [id, e] : ens.experts) {
            const std::set<int> nb = neighbors(ens.idx, id);
            if (nb.empty()) continue;
            double sum = 0.0;
            int count = 0;
            std::vector<const Expert*> nbs;
            for (int j : nb) {
                const Expert& nj = snapshot.at(j);
                const auto [s, c] = with_expert_context(id, scan, "boundary check", [&] {
                    return boundary_discrepancy_stats(e, nj, ens.idx, ens.cfg);
                });
                sum += s;
                count += c;
                nbs.push_back(&nj);
            }
            if (count == 0 || sum / count <= ens.cfg.t_del) continue;
            e = with_expert_context(id, scan, "harmonize",
                                    [&] { return harmonize(e, nbs, ens.idx, ens.cfg); });
        }
    }

    ens.scan_counter += 1;
}

Eigen::VectorXd predict_individual(const Ensemble& ens, const std::vector<Point>& Xs) {
    if (ens.experts.empty()) throw std::invalid_argument("predict: empty ensemble");
    std::map<int, std::vector<int>> by_expert;
    for (int i = 0; i < static_cast<int>(Xs.size()); ++i)
        by_expert[responsible_expert(ens.idx, Xs[i])].push_back(i);

    Eigen::VectorXd out(Xs.size());
    for (const auto& [id, indices] : by_expert) {
        std::vector<Point> pts;
        for (int i : indices) pts.push_back(Xs[i]);
        const Eigen::VectorXd mu = fitc_predict_mean(ens.experts.at(id).gp, pts);
        for (int k = 0; k < static_cast<int>(indices.size()); ++k) out[indices[k]] = mu[k];
    }
    return out;
}

Eigen::VectorXd predict_mixture(const Ensemble& ens, const std::vector<Point>& Xs) {
    if (ens.experts.empty()) throw std::invalid_argument("predict: empty ensemble");

    // Per expert: the points it contributes to, with their weights.
    std::map<int, std::vector<std::pair<int, double>>> contrib;
    for (int i = 0; i < static_cast<int>(Xs.size()); ++i) {
        const int resp = responsible_expert(ens.idx, Xs[i]);
        double wsum = 0.0;
        std::vector<std::pair<int, double>> local;
        for (const auto& [id, e] : ens.experts) {
            double d = std::numeric_limits<double>::infinity();
            for (int k = 0; k < e.primary_count; ++k)
                d = std::min(d, (e.gp.pis[k] - Xs[i]).norm());
            if (d > ens.cfg.mix_radius && id != resp) continue;
            const double w = 1.0 / (d * d + 1e-6);
            local.emplace_back(id, w);
            wsum += w;
        }
        for (auto& [id, w] : local) contrib[id].emplace_back(i, w / wsum);
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(Xs.size());
    for (const auto& [id, points] : contrib) {
        std::vector<Point> pts;
        for (const auto& [i, w] : points) pts.push_back(Xs[i]);
        const Eigen::VectorXd mu = fitc_predict_mean(ens.experts.at(id).gp, pts);
        for (int k = 0; k < static_cast<int>(points.size()); ++k)
            out[points[k].first] += points[k].second * mu[k];
    }
    return out;
}

}  // namespace gpmap
