#include "gpmap/sparse_gp.hpp"

#include <cmath>

namespace gpmap {

namespace {

void clamp_diagonal(Eigen::MatrixXd& cov) {
    for (int i = 0; i < cov.rows(); ++i)
        if (cov(i, i) < 0.0) cov(i, i) = 0.0;
}

void symmetrize(Eigen::MatrixXd& cov) {
    cov = (0.5 * (cov + cov.transpose())).eval();
}

}  // namespace

SparseGP make_sparse_gp(std::vector<Point> pis, Eigen::VectorXd mean,
                        Eigen::MatrixXd cov, const KernelParams& kp,
                        const NoiseParams& np) {
    const int n = static_cast<int>(pis.size());
    if (n < 1) throw std::invalid_argument("SparseGP needs at least one pseudo-input");
    if (mean.size() != n || cov.rows() != n || cov.cols() != n)
        throw std::invalid_argument("SparseGP: mean/cov dimensions do not match pseudo-inputs");
    if (kp.R <= 0.0) throw std::invalid_argument("KernelParams.R must be positive");
    if (np.sigma2 <= 0.0) throw std::invalid_argument("NoiseParams.sigma2 must be positive");

    symmetrize(cov);
    clamp_diagonal(cov);

    SparseGP gp;
    gp.pis = std::move(pis);
    gp.mean = std::move(mean);
    gp.cov = std::move(cov);
    gp.kp = kp;
    gp.np = np;
    gp.kuu = std::make_shared<Eigen::MatrixXd>(kernel_matrix(gp.pis, gp.pis, kp));
    gp.solver = std::make_shared<SymSolver>(
        *gp.kuu, kp, "K_uu factorization (" + std::to_string(n) + " pseudo-inputs)");
    return gp;
}

SparseGP fitc_init(const std::vector<Point>& Xu, const MeasurementBatch& batch,
                   const NoiseParams& np, const KernelParams& kp) {
    if (Xu.empty()) throw std::invalid_argument("fitc_init: need at least one pseudo-input");
    if (batch.size() == 0) throw std::invalid_argument("fitc_init: empty batch");

    const int n = static_cast<int>(Xu.size());
    const Eigen::MatrixXd Kuu = kernel_matrix(Xu, Xu, kp);
    SymSolver usolver(Kuu, kp, "fitc_init K_uu (" + std::to_string(n) + " pseudo-inputs)");

    // Data-space form of the FITC posterior: with Q = K_mu K_uu^-1 K_um and
    // Lambda = diag(K_mm - Q), invert A = Q + Lambda + sigma^2 I instead of
    // Delta = K_uu + K_um (Lambda + sigma^2 I)^-1 K_mu. The two are related
    // by the Woodbury identity; this one keeps the conditioning of a single
    // kernel matrix.
    const Eigen::MatrixXd Kum = kernel_matrix(Xu, batch.locations, kp);
    Eigen::MatrixXd Q = Kum.transpose() * usolver.solve(Kum);
    symmetrize(Q);

    Eigen::MatrixXd A = Q;
    const double prior_var = kp.R * kp.R;  // kernel diagonal is R^2 everywhere
    for (int i = 0; i < A.rows(); ++i) {
        const double lambda = std::max(prior_var - Q(i, i), 0.0);
        A(i, i) += lambda + np.sigma2;
    }
    SymSolver asolver(A, kp, "fitc_init (batch of " + std::to_string(batch.size()) + " points)");

    Eigen::VectorXd mean = Kum * asolver.solve(batch.values);
    Eigen::MatrixXd cov = Kuu - Kum * asolver.solve(Eigen::MatrixXd(Kum.transpose()));
    return make_sparse_gp(Xu, std::move(mean), std::move(cov), kp, np);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd>
fitc_predict(const SparseGP& gp, const std::vector<Point>& Xs) {
    const Eigen::MatrixXd Ksu = kernel_matrix(Xs, gp.pis, gp.kp);
    const Eigen::MatrixXd W = gp.solver->solve(Eigen::MatrixXd(Ksu.transpose()));
    Eigen::VectorXd mean = W.transpose() * gp.mean;
    Eigen::MatrixXd cov =
        kernel_matrix(Xs, Xs, gp.kp) - W.transpose() * ((*gp.kuu - gp.cov) * W);
    symmetrize(cov);
    return {std::move(mean), std::move(cov)};
}

Eigen::VectorXd fitc_predict_mean(const SparseGP& gp, const std::vector<Point>& Xs) {
    const Eigen::VectorXd v = gp.solver->solve(gp.mean);
    Eigen::VectorXd out(Xs.size());
    for (int i = 0; i < static_cast<int>(Xs.size()); ++i) {
        double acc = 0.0;
        for (int k = 0; k < gp.size(); ++k)
            acc += kernel_eval(Xs[i], gp.pis[k], gp.kp) * v[k];
        out[i] = acc;
    }
    return out;
}

SparseGP fitc_update(const SparseGP& gp, const Point& x_plus, double y_plus) {
    Eigen::VectorXd ku(gp.size());
    for (int i = 0; i < gp.size(); ++i) ku[i] = kernel_eval(gp.pis[i], x_plus, gp.kp);
    const Eigen::VectorXd w = gp.solver->solve(ku);

    const double mu_plus = w.dot(gp.mean);
    const double prior_var = kernel_eval(x_plus, x_plus, gp.kp) - w.dot((*gp.kuu - gp.cov) * w);
    const Eigen::VectorXd cross = gp.cov * w;
    const double denom = std::max(prior_var, 0.0) + gp.np.sigma2;
    if (!(denom > 0.0))
        throw NumericalError("fitc_update: non-positive innovation variance");

    SparseGP out = gp;  // shares the K_uu cache; the pseudo-input set is unchanged
    out.mean = gp.mean + cross * ((y_plus - mu_plus) / denom);
    out.cov = gp.cov - (cross * cross.transpose()) / denom;
    symmetrize(out.cov);
    clamp_diagonal(out.cov);
    return out;
}

SparseGP fitc_insert(const SparseGP& gp, const Point& x_new) {
    for (const Point& p : gp.pis)
        if ((p - x_new).norm() <= 1e-9)
            throw std::invalid_argument("fitc_insert: duplicate pseudo-input");

    const int n = gp.size();
    Eigen::VectorXd ku(n);
    for (int i = 0; i < n; ++i) ku[i] = kernel_eval(gp.pis[i], x_new, gp.kp);
    const Eigen::VectorXd w = gp.solver->solve(ku);

    const double mu_new = w.dot(gp.mean);
    const double var_new = kernel_eval(x_new, x_new, gp.kp) - w.dot((*gp.kuu - gp.cov) * w);
    const Eigen::VectorXd cross = gp.cov * w;

    std::vector<Point> pis = gp.pis;
    pis.push_back(x_new);
    Eigen::VectorXd mean(n + 1);
    mean << gp.mean, mu_new;
    Eigen::MatrixXd cov(n + 1, n + 1);
    cov.topLeftCorner(n, n) = gp.cov;
    cov.topRightCorner(n, 1) = cross;
    cov.bottomLeftCorner(1, n) = cross.transpose();
    cov(n, n) = var_new;
    return make_sparse_gp(std::move(pis), std::move(mean), std::move(cov), gp.kp, gp.np);
}

SparseGP fitc_remove(const SparseGP& gp, int index) {
    const int n = gp.size();
    if (index < 0 || index >= n)
        throw std::invalid_argument("fitc_remove: index out of range");
    if (n < 2)
        throw std::invalid_argument("fitc_remove: cannot remove the last pseudo-input");

    std::vector<Point> pis;
    pis.reserve(n - 1);
    Eigen::VectorXd mean(n - 1);
    Eigen::MatrixXd cov(n - 1, n - 1);
    for (int i = 0, r = 0; i < n; ++i) {
        if (i == index) continue;
        pis.push_back(gp.pis[i]);
        mean[r] = gp.mean[i];
        for (int j = 0, c = 0; j < n; ++j) {
            if (j == index) continue;
            cov(r, c) = gp.cov(i, j);
            ++c;
        }
        ++r;
    }
    return make_sparse_gp(std::move(pis), std::move(mean), std::move(cov), gp.kp, gp.np);
}

}  // namespace gpmap
