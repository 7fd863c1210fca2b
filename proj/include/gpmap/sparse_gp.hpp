// FITC sparse GP over pseudo-inputs: batch init, prediction, rank-1 update,
// pseudo-input insertion and removal.
//
// Models are values: every operation returns a new SparseGP. The K_uu
// factorization is cached behind a shared pointer; operations that keep the
// pseudo-input set (update) reuse it, operations that change the set
// (insert, remove) rebuild it. All operations on one pseudo-input set go
// through the same factorization, which is what makes the insertion and
// removal identities hold to near machine precision.
#pragma once

#include <memory>

#include "gpmap/kernel.hpp"

namespace gpmap {

struct SparseGP {
    std::vector<Point> pis;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    KernelParams kp;
    NoiseParams np;

    std::shared_ptr<const Eigen::MatrixXd> kuu;
    std::shared_ptr<const SymSolver> solver;

    int size() const { return static_cast<int>(pis.size()); }
};

// Validates shapes, symmetrizes cov, clamps its diagonal at zero, and builds
// the K_uu cache. The one true way to construct a SparseGP from raw parts.
SparseGP make_sparse_gp(std::vector<Point> pis, Eigen::VectorXd mean,
                        Eigen::MatrixXd cov, const KernelParams& kp,
                        const NoiseParams& np);

SparseGP fitc_init(const std::vector<Point>& Xu, const MeasurementBatch& batch,
                   const NoiseParams& np, const KernelParams& kp);

std::pair<Eigen::VectorXd, Eigen::MatrixXd>
fitc_predict(const SparseGP& gp, const std::vector<Point>& Xs);

// Posterior mean only, O(n^2 + |Xs| n) instead of the full covariance cost.
Eigen::VectorXd fitc_predict_mean(const SparseGP& gp, const std::vector<Point>& Xs);

SparseGP fitc_update(const SparseGP& gp, const Point& x_plus, double y_plus);

SparseGP fitc_insert(const SparseGP& gp, const Point& x_new);

SparseGP fitc_remove(const SparseGP& gp, int index);

}  // namespace gpmap
