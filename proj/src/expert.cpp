#include "gpmap/expert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpmap {

void validate(const EnsembleConfig& cfg) {
    if (cfg.sigma2 <= 0.0) throw std::invalid_argument("config: sigma2 must be > 0");
    if (cfg.t_add <= 0.0 || cfg.t_del <= 0.0)
        throw std::invalid_argument("config: thresholds must be > 0");
    if (cfg.min_pi_dist <= 0.0) throw std::invalid_argument("config: min_pi_dist must be > 0");
    if (cfg.kernel_R <= 0.0) throw std::invalid_argument("config: kernel_R must be > 0");
    if (cfg.aux_offset <= 0.0) throw std::invalid_argument("config: aux_offset must be > 0");
    if (cfg.update_margin <= 0.0 || cfg.mix_radius <= 0.0)
        throw std::invalid_argument("config: update_margin and mix_radius must be > 0");
    if (cfg.n_min < 1 || !(cfg.n_min < cfg.n_new && cfg.n_new <= cfg.n_max))
        throw std::invalid_argument("config: need 1 <= n_min < n_new <= n_max");
    if (cfg.scan_stride < 1) throw std::invalid_argument("config: scan_stride must be >= 1");
    if (cfg.k_per_edge < 1) throw std::invalid_argument("config: k_per_edge must be >= 1");
    if (cfg.n_secondary_per_neighbor < 0)
        throw std::invalid_argument("config: n_secondary_per_neighbor must be >= 0");
}

Expert make_expert(int id, SparseGP gp, int primary_count,
                   std::vector<int> secondary_origin) {
    if (primary_count < 1 || primary_count > gp.size())
        throw std::invalid_argument("Expert: primary_count out of range");
    if (static_cast<int>(secondary_origin.size()) != gp.size() - primary_count)
        throw std::invalid_argument("Expert: secondary_origin size mismatch");
    Expert e;
    e.id = id;
    e.gp = std::move(gp);
    e.primary_count = primary_count;
    e.secondary_origin = std::move(secondary_origin);
    return e;
}

namespace {

SparseGP permute_gp(const SparseGP& g, const std::vector<int>& perm) {
    const int n = g.size();
    std::vector<Point> pis(n);
    Eigen::VectorXd mean(n);
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
        pis[i] = g.pis[perm[i]];
        mean[i] = g.mean[perm[i]];
        for (int j = 0; j < n; ++j) cov(i, j) = g.cov(perm[i], perm[j]);
    }
    return make_sparse_gp(std::move(pis), std::move(mean), std::move(cov), g.kp, g.np);
}

// Insert x as a primary PI, keeping the primary block contiguous in front of
// any secondary PIs.
Expert insert_primary(const Expert& e, const Point& x) {
    SparseGP grown = fitc_insert(e.gp, x);
    if (e.secondary_count() > 0) {
        const int n = grown.size();
        std::vector<int> perm;
        for (int i = 0; i < e.primary_count; ++i) perm.push_back(i);
        perm.push_back(n - 1);
        for (int i = e.primary_count; i < n - 1; ++i) perm.push_back(i);
        grown = permute_gp(grown, perm);
    }
    return make_expert(e.id, std::move(grown), e.primary_count + 1, e.secondary_origin);
}

double min_dist_to(const std::vector<Point>& pts, const Point& x, int count = -1) {
    const int n = count < 0 ? static_cast<int>(pts.size()) : count;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) best = std::min(best, (pts[i] - x).norm());
    return best;
}

}  // namespace

ExtendResult extend(const Expert& e, const MeasurementBatch& batch,
                    const PartitionIndex& idx, const EnsembleConfig& cfg) {
    std::vector<int> cand;
    for (int i = 0; i < batch.size(); ++i) {
        const Point& x = batch.locations[i];
        if (responsible_expert(idx, x) != e.id) continue;
        if (min_dist_to(e.gp.pis, x, e.primary_count) < cfg.min_pi_dist) continue;
        if (min_dist_to(e.gp.pis, x) <= 1e-9) continue;  // sits on a secondary PI
        cand.push_back(i);
    }

    ExtendResult res{e, {}};
    while (!cand.empty()) {
        std::vector<Point> locs;
        for (int i : cand) locs.push_back(batch.locations[i]);
        const Eigen::VectorXd mu = fitc_predict_mean(res.expert.gp, locs);
        int best = 0;
        double best_err = -1.0;
        for (int k = 0; k < static_cast<int>(cand.size()); ++k) {
            const double err = std::abs(batch.values[cand[k]] - mu[k]);
            if (err > best_err) {
                best_err = err;
                best = k;
            }
        }
        if (best_err < cfg.t_add) break;

        const int bi = cand[best];
        const Point x = batch.locations[bi];
        res.expert = insert_primary(res.expert, x);
        res.expert.gp = fitc_update(res.expert.gp, x, batch.values[bi]);
        res.used.push_back(bi);

        std::vector<int> next;
        for (int i : cand)
            if (i != bi && (batch.locations[i] - x).norm() >= cfg.min_pi_dist)
                next.push_back(i);
        cand = std::move(next);
    }
    return res;
}

Expert update_expert(const Expert& e, const MeasurementBatch& batch,
                     const std::vector<char>& used, const PartitionIndex& idx,
                     const EnsembleConfig& cfg) {
    Expert out = e;
    for (int i = 0; i < batch.size(); ++i) {
        if (i < static_cast<int>(used.size()) && used[i]) continue;
        const Point& x = batch.locations[i];
        const double d_own = min_dist_to(out.gp.pis, x, out.primary_count);
        double d_global = std::numeric_limits<double>::infinity();
        for (const auto& s : idx.sites) d_global = std::min(d_global, (s.p - x).norm());
        if (d_own - d_global > cfg.update_margin) continue;
        out.gp = fitc_update(out.gp, x, batch.values[i]);
    }
    return out;
}

Expert contract(const Expert& e, const MeasurementBatch& batch,
                const PartitionIndex& idx, const EnsembleConfig& cfg) {
    std::vector<Point> region_locs;
    std::vector<double> region_vals;
    for (int i = 0; i < batch.size(); ++i)
        if (responsible_expert(idx, batch.locations[i]) == e.id) {
            region_locs.push_back(batch.locations[i]);
            region_vals.push_back(batch.values[i]);
        }

    // No in-region evidence this scan, nothing to judge removals against.
    if (region_locs.empty()) return e;

    Expert out = e;
    while (out.primary_count > cfg.n_min) {
        // Trial set: the surviving primary PIs plus the in-region measurements.
        std::vector<Point> trial;
        for (int i = 0; i < out.primary_count; ++i) trial.push_back(out.gp.pis[i]);
        trial.insert(trial.end(), region_locs.begin(), region_locs.end());
        const int denom = static_cast<int>(trial.size());
        const int n = out.gp.size();

        // Candidate scoring shares one factorization per round: solving the
        // system with pseudo-input i removed is the full-model solve w minus
        // a multiple of K_uu^-1 e_i zeroing entry i (partitioned inverse).
        // Falls back to refactoring the reduced model whenever the shared
        // factorization carries jitter or a pivot is unusable.
        const Eigen::MatrixXd ktr = kernel_matrix(out.gp.pis, trial, cfg.kernel());
        const Eigen::VectorXd w = out.gp.solver->solve(out.gp.mean);
        Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(n, out.primary_count);
        for (int i = 0; i < out.primary_count; ++i) unit(i, i) = 1.0;
        const Eigen::MatrixXd z = out.gp.solver->solve(unit);

        int best = -1;
        double best_err = std::numeric_limits<double>::infinity();
        Eigen::VectorXd v(n), mu(denom);
        for (int i = 0; i < out.primary_count; ++i) {
            const double pivot = z(i, i);
            if (out.gp.solver->jitter() == 0.0 && pivot > 0.0 && std::isfinite(pivot)) {
                v = w - (w[i] / pivot) * z.col(i);
                v[i] = 0.0;
                mu.noalias() = ktr.transpose() * v;
            } else {
                const SparseGP reduced = fitc_remove(out.gp, i);
                mu = fitc_predict_mean(reduced, trial);
            }

            double err = 0.0;
            for (int t = 0; t < denom; ++t) {
                const double target =
                    t < out.primary_count ? out.gp.mean[t] : region_vals[t - out.primary_count];
                err += std::abs(target - mu[t]);
            }
            err /= denom;
            if (err < best_err) {
                best_err = err;
                best = i;
            }
        }
        if (best < 0 || best_err >= cfg.t_del) break;
        out.gp = fitc_remove(out.gp, best);
        out.primary_count -= 1;
    }
    return out;
}

std::vector<Expert> subdivide(const Expert& e, const EnsembleConfig& cfg, int& next_id) {
    if (e.primary_count <= cfg.n_max) return {e};

    struct Node {
        Point centroid;
        int size;
        std::vector<int> members;  // ascending PI indices
        int left = -1, right = -1;
        bool active = true;
    };
    std::vector<Node> nodes;
    for (int i = 0; i < e.primary_count; ++i)
        nodes.push_back({e.gp.pis[i], 1, {i}, -1, -1, true});

    // Ward linkage: merge cost |A||B|/(|A|+|B|) * ||cA - cB||^2, smallest
    // first, until a single root remains.
    int active_count = e.primary_count;
    while (active_count > 1) {
        int ba = -1, bb = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < static_cast<int>(nodes.size()); ++a) {
            if (!nodes[a].active) continue;
            for (int b = a + 1; b < static_cast<int>(nodes.size()); ++b) {
                if (!nodes[b].active) continue;
                const double na = nodes[a].size, nb = nodes[b].size;
                const double cost =
                    na * nb / (na + nb) * (nodes[a].centroid - nodes[b].centroid).squaredNorm();
                if (cost < best) {
                    best = cost;
                    ba = a;
                    bb = b;
                }
            }
        }
        Node merged;
        merged.size = nodes[ba].size + nodes[bb].size;
        merged.centroid = (nodes[ba].size * nodes[ba].centroid +
                           nodes[bb].size * nodes[bb].centroid) / merged.size;
        std::merge(nodes[ba].members.begin(), nodes[ba].members.end(),
                   nodes[bb].members.begin(), nodes[bb].members.end(),
                   std::back_inserter(merged.members));
        merged.left = ba;
        merged.right = bb;
        nodes[ba].active = false;
        nodes[bb].active = false;
        nodes.push_back(std::move(merged));
        --active_count;
    }

    // Cut: walk down from the root, emitting the maximal clusters that fit.
    std::vector<std::vector<int>> clusters;
    std::vector<int> stack{static_cast<int>(nodes.size()) - 1};
    while (!stack.empty()) {
        const int ni = stack.back();
        stack.pop_back();
        if (nodes[ni].size <= cfg.n_new) {
            clusters.push_back(nodes[ni].members);
        } else {
            stack.push_back(nodes[ni].right);
            stack.push_back(nodes[ni].left);
        }
    }

    std::vector<Expert> out;
    for (const auto& members : clusters) {
        const int m = static_cast<int>(members.size());
        std::vector<Point> pis(m);
        Eigen::VectorXd mean(m);
        Eigen::MatrixXd cov(m, m);
        for (int i = 0; i < m; ++i) {
            pis[i] = e.gp.pis[members[i]];
            mean[i] = e.gp.mean[members[i]];
            for (int j = 0; j < m; ++j) cov(i, j) = e.gp.cov(members[i], members[j]);
        }
        SparseGP gp = make_sparse_gp(std::move(pis), mean, cov, e.gp.kp, e.gp.np);
        out.push_back(make_expert(next_id++, std::move(gp), m));
    }
    return out;
}

std::pair<double, int> boundary_discrepancy_stats(const Expert& e, const Expert& neighbor,
                                                  const PartitionIndex& idx,
                                                  const EnsembleConfig& cfg) {
    const std::vector<Point> samples =
        boundary_samples(idx, e.id, neighbor.id, cfg.k_per_edge);
    const Eigen::VectorXd mine = fitc_predict_mean(e.gp, samples);
    const Eigen::VectorXd theirs = fitc_predict_mean(neighbor.gp, samples);
    return {(mine - theirs).cwiseAbs().sum(), static_cast<int>(samples.size())};
}

double boundary_discrepancy(const Expert& e, const Expert& neighbor,
                            const PartitionIndex& idx, const EnsembleConfig& cfg) {
    const auto [sum, count] = boundary_discrepancy_stats(e, neighbor, idx, cfg);
    return count > 0 ? sum / count : 0.0;
}

Expert harmonize(const Expert& e, const std::vector<const Expert*>& neighbor_experts,
                 const PartitionIndex& idx, const EnsembleConfig& cfg) {
    Expert out = e;
    while (out.gp.size() > out.primary_count)
        out.gp = fitc_remove(out.gp, out.gp.size() - 1);
    out.secondary_origin.clear();

    for (const Expert* nb : neighbor_experts) {
        const std::vector<Point> border = boundary_samples(idx, e.id, nb->id, cfg.k_per_edge);
        const int n_cand = nb->primary_count;
        if (n_cand == 0 || cfg.n_secondary_per_neighbor == 0) continue;

        // Farthest-point subsample of the neighbor's primary PIs, seeded at
        // the PI closest to the shared boundary.
        int seed = 0;
        double seed_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_cand; ++i) {
            const double d = min_dist_to(border, nb->gp.pis[i]);
            if (d < seed_d) {
                seed_d = d;
                seed = i;
            }
        }
        std::vector<int> chosen{seed};
        while (static_cast<int>(chosen.size()) <
               std::min(cfg.n_secondary_per_neighbor, n_cand)) {
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n_cand; ++i) {
                if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
                double d = std::numeric_limits<double>::infinity();
                for (int c : chosen) d = std::min(d, (nb->gp.pis[i] - nb->gp.pis[c]).norm());
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            chosen.push_back(far);
        }

        for (int ci : chosen) {
            const Point& x = nb->gp.pis[ci];
            if (min_dist_to(out.gp.pis, x) < cfg.min_pi_dist) continue;
            out.gp = fitc_insert(out.gp, x);
            out.secondary_origin.push_back(nb->id);
            out.gp = fitc_update(out.gp, x, nb->gp.mean[ci]);
        }
    }
    return make_expert(out.id, std::move(out.gp), out.primary_count,
                       std::move(out.secondary_origin));
}

}  // namespace gpmap
