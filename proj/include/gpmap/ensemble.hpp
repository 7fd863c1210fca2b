// The ensemble of local experts: initialization from the first batch, the
// per-scan extend/update/contract/subdivide/harmonize cycle, and map-level
// mean prediction in individual and mixture modes.
#pragma once

#include <map>

#include "gpmap/expert.hpp"

namespace gpmap {

struct Ensemble {
    std::map<int, Expert> experts;
    PartitionIndex idx;
    EnsembleConfig cfg;
    int scan_counter = 0;
    int next_id = 0;

    int total_pis() const {
        int n = 0;
        for (const auto& [id, e] : experts) n += e.gp.size();
        return n;
    }
    int total_primary_pis() const {
        int n = 0;
        for (const auto& [id, e] : experts) n += e.primary_count;
        return n;
    }
};

// Sites are the union of all experts' primary PIs, in (expert id, PI index)
// order.
void rebuild_index(Ensemble& ens);

Ensemble init_ensemble(const MeasurementBatch& first_batch, const EnsembleConfig& cfg);

void step(Ensemble& ens, const MeasurementBatch& batch);

Eigen::VectorXd predict_individual(const Ensemble& ens, const std::vector<Point>& Xs);

Eigen::VectorXd predict_mixture(const Ensemble& ens, const std::vector<Point>& Xs);

}  // namespace gpmap
