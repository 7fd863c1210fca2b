// Thin-plate kernel, measurement containers, and exact GP regression.
// The exact GP is the correctness oracle for the sparse models; everything
// downstream shares the solver and jitter policy defined here.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpmap {

using Point = Eigen::Vector2d;

struct KernelParams {
    double R = 20.0;  // largest distance in the environment, meters
};

struct NoiseParams {
    double sigma2 = 0.01;  // observation noise variance, m^2
};

enum class MeasurementKind { surface, auxiliary };

struct MeasurementBatch {
    std::vector<Point> locations;
    Eigen::VectorXd values;
    std::vector<MeasurementKind> kinds;

    int size() const { return static_cast<int>(locations.size()); }
};

// Thrown when a linear system stays unsolvable after jitter escalation, or
// an update denominator collapses. The message names the failing operation.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

double kernel_eval(const Point& x1, const Point& x2, const KernelParams& kp);

Eigen::MatrixXd kernel_matrix(const std::vector<Point>& X1,
                              const std::vector<Point>& X2,
                              const KernelParams& kp);

// Symmetric solver with escalating diagonal jitter. A factorization is
// accepted only if a probe solve has small backward error; otherwise the
// jitter is raised (0, then 1e-8*R^2, then 1e-6*R^2) and on the last failure
// a NumericalError carrying `context` is thrown. Factor once, solve many.
class SymSolver {
public:
    SymSolver(Eigen::MatrixXd A, const KernelParams& kp, const std::string& context);

    Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
    double jitter() const { return jitter_; }

private:
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
    double jitter_ = 0.0;
};

// Posterior mean and covariance at Xs given noisy observations y at Xm.
// Exact duplicate locations in Xm are merged by averaging their targets.
std::pair<Eigen::VectorXd, Eigen::MatrixXd>
exact_gp_predict(const std::vector<Point>& Xm, const Eigen::VectorXd& y,
                 const NoiseParams& np, const KernelParams& kp,
                 const std::vector<Point>& Xs);

}  // namespace gpmap
