#include "gpmap/kernel.hpp"

#include <cmath>

namespace gpmap {

double kernel_eval(const Point& x1, const Point& x2, const KernelParams& kp) {
    const double r2 = (x1 - x2).squaredNorm();
    const double R = kp.R;
    double t = 0.0;
    if (r2 > 0.0) t = r2 * std::log(r2);  // 2*r^2*log(r) == r^2*log(r^2), 0 at r=0
    return t - (1.0 + 2.0 * std::log(R)) * r2 + R * R;
}

Eigen::MatrixXd kernel_matrix(const std::vector<Point>& X1,
                              const std::vector<Point>& X2,
                              const KernelParams& kp) {
    Eigen::MatrixXd K(X1.size(), X2.size());
    for (int i = 0; i < static_cast<int>(X1.size()); ++i)
        for (int j = 0; j < static_cast<int>(X2.size()); ++j)
            K(i, j) = kernel_eval(X1[i], X2[j], kp);
    return K;
}

namespace {

// Backward error of the probe solve A*x = A*1. Small iff the factorization
// is usable; stays small even for ill-conditioned but nonsingular systems.
bool factorization_ok(const Eigen::LDLT<Eigen::MatrixXd>& ldlt,
                      const Eigen::MatrixXd& A) {
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd b = A.rowwise().sum();
    const Eigen::VectorXd x = ldlt.solve(b);
    if (!x.allFinite()) return false;
    const double anorm = A.cwiseAbs().rowwise().sum().maxCoeff();
    const double denom = anorm * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
    if (denom == 0.0) return true;
    const double res = (A * x - b).cwiseAbs().maxCoeff();
    return res <= 1e-10 * denom;
}

}  // namespace

SymSolver::SymSolver(Eigen::MatrixXd A, const KernelParams& kp, const std::string& context) {
    const double R2 = kp.R * kp.R;
    for (double jit : {0.0, 1e-8 * R2, 1e-6 * R2}) {
        Eigen::MatrixXd Aj = A;
        if (jit > 0.0) Aj.diagonal().array() += jit;
        ldlt_.compute(Aj);
        if (factorization_ok(ldlt_, Aj)) {
            jitter_ = jit;
            return;
        }
    }
    throw NumericalError("singular system after jitter escalation in " + context);
}

Eigen::MatrixXd SymSolver::solve(const Eigen::MatrixXd& B) const { return ldlt_.solve(B); }
Eigen::VectorXd SymSolver::solve(const Eigen::VectorXd& b) const { return ldlt_.solve(b); }

std::pair<Eigen::VectorXd, Eigen::MatrixXd>
exact_gp_predict(const std::vector<Point>& Xm, const Eigen::VectorXd& y,
                 const NoiseParams& np, const KernelParams& kp,
                 const std::vector<Point>& Xs) {
    if (Xm.empty() || static_cast<int>(Xm.size()) != y.size())
        throw std::invalid_argument("exact_gp_predict: |Xm| must equal |y| and be >= 1");

    // Merge exact duplicates, averaging targets, to keep Kmm invertible.
    std::vector<Point> Xd;
    std::vector<double> sum, cnt;
    for (int i = 0; i < static_cast<int>(Xm.size()); ++i) {
        int found = -1;
        for (int j = 0; j < static_cast<int>(Xd.size()); ++j) {
            if (Xd[j] == Xm[i]) { found = j; break; }
        }
        if (found < 0) {
            Xd.push_back(Xm[i]);
            sum.push_back(y[i]);
            cnt.push_back(1.0);
        } else {
            sum[found] += y[i];
            cnt[found] += 1.0;
        }
    }
    Eigen::VectorXd yd(Xd.size());
    for (int j = 0; j < static_cast<int>(Xd.size()); ++j) yd[j] = sum[j] / cnt[j];

    Eigen::MatrixXd Kmm = kernel_matrix(Xd, Xd, kp);
    Kmm.diagonal().array() += np.sigma2;
    SymSolver solver(Kmm, kp, "exact_gp_predict (batch of " + std::to_string(Xd.size()) + " points)");

    const Eigen::MatrixXd Ksm = kernel_matrix(Xs, Xd, kp);
    Eigen::VectorXd mean = Ksm * solver.solve(yd);
    Eigen::MatrixXd cov =
        kernel_matrix(Xs, Xs, kp) - Ksm * solver.solve(Eigen::MatrixXd(Ksm.transpose()));
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {std::move(mean), std::move(cov)};
}

}  // namespace gpmap
