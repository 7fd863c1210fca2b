// Per-expert lifecycle: extension with informative measurements, posterior
// updates, contraction of redundant pseudo-inputs, subdivision of oversized
// experts, and harmonization against neighbors along region boundaries.
#pragma once

#include "gpmap/partition.hpp"
#include "gpmap/sparse_gp.hpp"

namespace gpmap {

struct EnsembleConfig {
    double sigma2 = 0.01;
    double t_add = 0.02;
    double t_del = 0.01;
    double min_pi_dist = 0.1;
    int n_min = 10;
    int n_new = 50;
    int n_max = 100;
    double kernel_R = 20.0;
    double aux_offset = 0.1;
    int scan_stride = 100;
    int k_per_edge = 5;
    int n_secondary_per_neighbor = 10;
    double update_margin = 1.0;
    double mix_radius = 2.0;

    KernelParams kernel() const { return {kernel_R}; }
    NoiseParams noise() const { return {sigma2}; }
};

// Throws std::invalid_argument when a field is out of range.
void validate(const EnsembleConfig& cfg);

// The first primary_count pseudo-inputs of gp are the primary ones, the rest
// are secondary copies borrowed from neighbors during harmonization.
struct Expert {
    int id = 0;
    SparseGP gp;
    int primary_count = 0;
    std::vector<int> secondary_origin;  // owning expert per secondary PI

    int secondary_count() const { return gp.size() - primary_count; }
    std::vector<Point> primary_pis() const {
        return {gp.pis.begin(), gp.pis.begin() + primary_count};
    }
};

Expert make_expert(int id, SparseGP gp, int primary_count,
                   std::vector<int> secondary_origin = {});

struct ExtendResult {
    Expert expert;
    std::vector<int> used;  // batch indices consumed as new pseudo-inputs
};

ExtendResult extend(const Expert& e, const MeasurementBatch& batch,
                    const PartitionIndex& idx, const EnsembleConfig& cfg);

// used[i] != 0 marks batch entries consumed as pseudo-inputs by any expert
// during this scan's extension; those are skipped.
Expert update_expert(const Expert& e, const MeasurementBatch& batch,
                     const std::vector<char>& used, const PartitionIndex& idx,
                     const EnsembleConfig& cfg);

Expert contract(const Expert& e, const MeasurementBatch& batch,
                const PartitionIndex& idx, const EnsembleConfig& cfg);

// Splits an expert with more than n_max primary PIs into Ward clusters of at
// most n_new; fresh ids are drawn from next_id. Below the threshold returns
// the expert unchanged.
std::vector<Expert> subdivide(const Expert& e, const EnsembleConfig& cfg, int& next_id);

// Sum of |mean_i - mean_j| over the boundary samples against one neighbor,
// plus the sample count; callers pool these over all neighbors.
std::pair<double, int> boundary_discrepancy_stats(const Expert& e, const Expert& neighbor,
                                                  const PartitionIndex& idx,
                                                  const EnsembleConfig& cfg);

double boundary_discrepancy(const Expert& e, const Expert& neighbor,
                            const PartitionIndex& idx, const EnsembleConfig& cfg);

// Neighbor models are read from a pre-step snapshot supplied by the caller.
Expert harmonize(const Expert& e, const std::vector<const Expert*>& neighbor_experts,
                 const PartitionIndex& idx, const EnsembleConfig& cfg);

}  // namespace gpmap
