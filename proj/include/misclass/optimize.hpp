#pragma once

// Unconstrained maximisation of smooth objectives with analytic gradients.

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace misclass {

struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

using Objective = std::function<ObjectiveValue(const Eigen::VectorXd &)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;

struct OptimizeOptions {
    int max_iterations = 500;
    int max_newton_iterations = 50;
    double score_tolerance = 1e-8;
    double step_tolerance = 1e-10;
    // A step-size stop only counts as converged when the score is at least
    // this small; otherwise it is a stall.
    double stall_score_tolerance = 1e-4;
};

struct OptimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

// Central differences of `grad` with per-coordinate step
// base_step * max(1, |x_j|); the result is symmetrised.
Eigen::MatrixXd fd_hessian(const GradientFn &grad, const Eigen::VectorXd &x, double base_step = 1e-5);

// BFGS with backtracking line search, started from the inverse of the
// finite-difference curvature when that is positive definite, followed by
// damped Newton steps on the finite-difference Hessian until the score
// tolerance is met.
OptimizeResult maximize(const Objective &f, const Eigen::VectorXd &x0, const OptimizeOptions &options = {});

} // namespace misclass
