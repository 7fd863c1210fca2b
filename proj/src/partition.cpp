#include "gpmap/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpmap {

namespace {

// Closed polygon with one label per edge: the site index whose bisector
// created it, or -1 for a piece of the clipping box.
struct Poly {
    std::vector<Point> v;
    std::vector<int> label;  // label[k] belongs to edge v[k-1] -> v[k] (cyclic)
};

// Keep {x : n.x <= c}. Vertices on the line count as inside.
Poly clip_halfplane(const Poly& in, const Point& n, double c, int new_label) {
    Poly out;
    const int m = static_cast<int>(in.v.size());
    for (int k = 0; k < m; ++k) {
        const Point& a = in.v[k];
        const Point& b = in.v[(k + 1) % m];
        const int lab = in.label[(k + 1) % m];
        const double da = n.dot(a) - c;
        const double db = n.dot(b) - c;
        const bool ain = da <= 0.0, bin = db <= 0.0;
        if (ain && bin) {
            out.v.push_back(b);
            out.label.push_back(lab);
        } else if (ain && !bin) {
            const double t = da / (da - db);
            out.v.push_back(a + t * (b - a));
            out.label.push_back(lab);
        } else if (!ain && bin) {
            const double t = da / (da - db);
            out.v.push_back(a + t * (b - a));
            out.label.push_back(new_label);
            out.v.push_back(b);
            out.label.push_back(lab);
        }
    }
    // Collapse vertices that coincide after clipping through a corner.
    Poly clean;
    const int mm = static_cast<int>(out.v.size());
    for (int k = 0; k < mm; ++k) {
        const Point& prev = out.v[(k + mm - 1) % mm];
        if ((out.v[k] - prev).norm() < 1e-12 && mm > 1) continue;
        clean.v.push_back(out.v[k]);
        clean.label.push_back(out.label[k]);
    }
    return clean;
}

}  // namespace

PartitionIndex build_partition(const std::vector<std::pair<Point, int>>& site_list) {
    PartitionIndex idx;
    for (const auto& [p, e] : site_list) {
        idx.expert_sites[e].push_back(static_cast<int>(idx.sites.size()));
        idx.sites.push_back({p, e});
    }
    const int n = static_cast<int>(idx.sites.size());
    idx.cell_borders.resize(n);
    if (n == 0) return idx;

    Point lo = idx.sites[0].p, hi = idx.sites[0].p;
    for (const auto& s : idx.sites) {
        lo = lo.cwiseMin(s.p);
        hi = hi.cwiseMax(s.p);
    }
    lo.array() -= 1.0;
    hi.array() += 1.0;

    for (int si = 0; si < n; ++si) {
        const Point s = idx.sites[si].p;
        Poly cell;
        cell.v = {{lo.x(), lo.y()}, {hi.x(), lo.y()}, {hi.x(), hi.y()}, {lo.x(), hi.y()}};
        cell.label = {-1, -1, -1, -1};

        std::vector<int> order;
        for (int t = 0; t < n; ++t)
            if (t != si) order.push_back(t);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = (idx.sites[a].p - s).squaredNorm();
            const double db = (idx.sites[b].p - s).squaredNorm();
            if (da != db) return da < db;
            return a < b;
        });

        for (int t : order) {
            if (cell.v.empty()) break;
            double maxd2 = 0.0;
            for (const Point& v : cell.v) maxd2 = std::max(maxd2, (v - s).squaredNorm());
            const double half = (idx.sites[t].p - s).norm() * 0.5;
            if (half * half > maxd2) break;  // all remaining sites are farther still
            const Point d = idx.sites[t].p - s;
            const double c = d.dot(0.5 * (idx.sites[t].p + s));
            cell = clip_halfplane(cell, d, c, t);
        }

        const int m = static_cast<int>(cell.v.size());
        for (int k = 0; k < m; ++k) {
            const int lab = cell.label[(k + 1) % m];
            if (lab < 0) continue;
            const Point& a = cell.v[k];
            const Point& b = cell.v[(k + 1) % m];
            if ((b - a).norm() < 1e-9) continue;
            idx.cell_borders[si].push_back({a, b, lab});
        }
    }

    for (int si = 0; si < n; ++si)
        for (const auto& e : idx.cell_borders[si]) {
            const int ei = idx.sites[si].expert;
            const int ej = idx.sites[e.other_site].expert;
            if (ei == ej) continue;
            idx.adjacency[ei].insert(ej);
            idx.adjacency[ej].insert(ei);
        }
    return idx;
}

int responsible_expert(const PartitionIndex& idx, const Point& p) {
    if (idx.empty()) throw std::invalid_argument("responsible_expert: empty partition");
    int best = 0;
    double best_d2 = (idx.sites[0].p - p).squaredNorm();
    for (int i = 1; i < static_cast<int>(idx.sites.size()); ++i) {
        const double d2 = (idx.sites[i].p - p).squaredNorm();
        if (d2 < best_d2 ||
            (d2 == best_d2 && idx.sites[i].expert < idx.sites[best].expert)) {
            best = i;
            best_d2 = d2;
        }
    }
    return idx.sites[best].expert;
}

std::set<int> neighbors(const PartitionIndex& idx, int expert_id) {
    if (!idx.expert_sites.count(expert_id))
        throw std::invalid_argument("neighbors: unknown expert id " + std::to_string(expert_id));
    auto it = idx.adjacency.find(expert_id);
    if (it == idx.adjacency.end()) return {};
    return it->second;
}

std::vector<Point> boundary_samples(const PartitionIndex& idx, int expert_i,
                                    int expert_j, int k_per_edge) {
    const std::set<int> nb = neighbors(idx, expert_i);
    if (!nb.count(expert_j))
        throw std::invalid_argument("boundary_samples: experts " + std::to_string(expert_i) +
                                    " and " + std::to_string(expert_j) + " are not adjacent");
    std::vector<Point> out;
    for (int si : idx.expert_sites.at(expert_i))
        for (const auto& e : idx.cell_borders[si]) {
            if (idx.sites[e.other_site].expert != expert_j) continue;
            for (int m = 0; m < k_per_edge; ++m) {
                const double t = (m + 0.5) / k_per_edge;
                out.push_back(e.a + t * (e.b - e.a));
            }
        }
    return out;
}

}  // namespace gpmap
