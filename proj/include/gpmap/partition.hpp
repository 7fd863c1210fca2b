// Voronoi areas of responsibility over the primary pseudo-inputs of all
// experts. Cells are built directly by half-plane clipping against the
// perpendicular bisectors of site pairs, which also yields the adjacency
// relation and the shared boundary segments needed for harmonization.
#pragma once

#include <map>
#include <set>

#include "gpmap/kernel.hpp"

namespace gpmap {

struct PartitionIndex {
    struct Site {
        Point p;
        int expert;
    };
    // A piece of a cell border separating this site from another site.
    struct BorderEdge {
        Point a, b;
        int other_site;
    };

    std::vector<Site> sites;
    std::vector<std::vector<BorderEdge>> cell_borders;  // per site
    std::map<int, std::vector<int>> expert_sites;
    std::map<int, std::set<int>> adjacency;  // expert -> neighboring experts

    bool empty() const { return sites.empty(); }
};

PartitionIndex build_partition(const std::vector<std::pair<Point, int>>& sites);

int responsible_expert(const PartitionIndex& idx, const Point& p);

std::set<int> neighbors(const PartitionIndex& idx, int expert_id);

std::vector<Point> boundary_samples(const PartitionIndex& idx, int expert_i,
                                    int expert_j, int k_per_edge);

}  // namespace gpmap
