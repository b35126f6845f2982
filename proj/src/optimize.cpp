#include "misclass/optimize.hpp"

#include <cmath>
#include <limits>

namespace misclass {

namespace {

double max_abs(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool finite(const ObjectiveValue &v) { return std::isfinite(v.value) && v.gradient.allFinite(); }

// Inverse of -H when -H is positive definite.
std::optional<Eigen::MatrixXd> inverse_neg_hessian(const Eigen::MatrixXd &h) {
    Eigen::LLT<Eigen::MatrixXd> llt(-h);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
    if (!inv.allFinite()) return std::nullopt;
    return inv;
}

struct LineSearchResult {
    bool ok = false;
    Eigen::VectorXd x;
    ObjectiveValue fx;
};

// Backtracking (Armijo) along an ascent direction.
LineSearchResult line_search(const Objective &f, const Eigen::VectorXd &x, const ObjectiveValue &fx,
                             const Eigen::VectorXd &dir) {
    const double slope = fx.gradient.dot(dir);
    LineSearchResult res;
    if (!(slope > 0.0)) return res;
    double t = 1.0;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
        Eigen::VectorXd xn = x + t * dir;
        ObjectiveValue fn = f(xn);
        if (finite(fn) && fn.value >= fx.value + 1e-4 * t * slope) {
            res.ok = true;
            res.x = std::move(xn);
            res.fx = std::move(fn);
            return res;
        }
    }
    return res;
}

} // namespace

Eigen::MatrixXd fd_hessian(const GradientFn &grad, const Eigen::VectorXd &x, double base_step) {
    const Eigen::Index d = x.size();
    Eigen::MatrixXd h(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double step = base_step * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) += step;
        xm(j) -= step;
        h.col(j) = (grad(xp) - grad(xm)) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

OptimizeResult maximize(const Objective &f, const Eigen::VectorXd &x0, const OptimizeOptions &opt) {
    OptimizeResult out;
    Eigen::VectorXd x = x0;
    ObjectiveValue fx = f(x);
    out.x = x;
    out.value = fx.value;
    out.gradient = fx.gradient;
    if (!finite(fx)) {
        out.message = "objective not finite at the starting point";
        return out;
    }
    const GradientFn grad = [&f](const Eigen::VectorXd &z) { return f(z).gradient; };
    const Eigen::Index d = x.size();

    Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(d, d);
    if (auto ih = inverse_neg_hessian(fd_hessian(grad, x))) inv_h = *ih;

    int it = 0;
    bool step_stop = false;
    for (; it < opt.max_iterations; ++it) {
        if (max_abs(fx.gradient) < opt.score_tolerance) break;
        Eigen::VectorXd dir = inv_h * fx.gradient;
        if (!(fx.gradient.dot(dir) > 0.0)) {
            inv_h = Eigen::MatrixXd::Identity(d, d);
            dir = fx.gradient;
        }
        auto ls = line_search(f, x, fx, dir);
        if (!ls.ok) {
            if (inv_h.isIdentity()) break;
            inv_h = Eigen::MatrixXd::Identity(d, d);
            continue;
        }
        const Eigen::VectorXd s = ls.x - x;
        // Minimisation convention: y = grad(-f)_new - grad(-f)_old.
        const Eigen::VectorXd yv = fx.gradient - ls.fx.gradient;
        x = ls.x;
        fx = std::move(ls.fx);
        if (max_abs(s) < opt.step_tolerance) {
            step_stop = true;
            ++it;
            break;
        }
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
            inv_h = (eye - rho * s * yv.transpose()) * inv_h * (eye - rho * yv * s.transpose()) +
                    rho * s * s.transpose();
        }
    }

    // Newton polish on the finite-difference Hessian.
    for (int k = 0; k < opt.max_newton_iterations && max_abs(fx.gradient) >= opt.score_tolerance; ++k) {
        auto ih = inverse_neg_hessian(fd_hessian(grad, x));
        if (!ih) break;
        const Eigen::VectorXd dir = *ih * fx.gradient;
        auto ls = line_search(f, x, fx, dir);
        ++it;
        if (!ls.ok) break;
        const double step = max_abs(ls.x - x);
        x = ls.x;
        fx = std::move(ls.fx);
        if (step < opt.step_tolerance) {
            step_stop = true;
            break;
        }
    }

    out.x = x;
    out.value = fx.value;
    out.gradient = fx.gradient;
    out.iterations = it;
    const double score = max_abs(fx.gradient);
    if (score < opt.score_tolerance) {
        out.converged = true;
        out.message = "score tolerance reached";
    } else if (step_stop && score < opt.stall_score_tolerance) {
        out.converged = true;
        out.message = "step tolerance reached";
    } else {
        out.message = "no convergence: max |score| = " + std::to_string(score) + " after " +
                      std::to_string(it) + " iterations";
    }
    return out;
}

} // namespace misclass
