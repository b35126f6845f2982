#include "misclass/logit_core.hpp"

#include "misclass/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace misclass {

namespace {

const double kLogFloor = std::log(kProbabilityFloor);

void check_dims(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    if (y.size() != x.rows()) {
        throw DimensionError("outcome length " + std::to_string(y.size()) + " does not match design rows " +
                             std::to_string(x.rows()));
    }
    if (beta.size() != x.cols()) {
        throw DimensionError("coefficient length " + std::to_string(beta.size()) +
                             " does not match design columns " + std::to_string(x.cols()));
    }
}

// log(exp(a) + exp(b)) with a or b allowed to be -inf.
double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (a == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

} // namespace

void ErrorRates::validate() const {
    auto ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r < 0.5; };
    if (!ok(r0) || !ok(r1)) throw DomainError("error rates must lie in [0, 0.5)");
}

double logistic(double eta) {
    if (!std::isfinite(eta)) throw DomainError("logistic: non-finite linear predictor");
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double log_logistic(double eta) {
    if (eta >= 0.0) return -std::log1p(std::exp(-eta));
    return eta - std::log1p(std::exp(eta));
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    if (beta.size() != x.cols()) {
        throw DimensionError("coefficient length " + std::to_string(beta.size()) +
                             " does not match design columns " + std::to_string(x.cols()));
    }
    return x * beta;
}

double liu_response_prob(double eta, const ErrorRates &err) {
    return err.r0 + (1.0 - err.r0 - err.r1) * logistic(eta);
}

LogLikelihood std_loglik(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    check_dims(y, x, beta);
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd resid(y.size());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double e = eta(i);
        ll += y(i) == 1.0 ? log_logistic(e) : log_logistic(-e);
        resid(i) = y(i) - logistic(e);
    }
    return {ll, x.transpose() * resid};
}

LogLikelihood liu_loglik(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta,
                         const ErrorRates &err) {
    check_dims(y, x, beta);
    err.validate();
    const double slope = 1.0 - err.r0 - err.r1;
    const double log_slope = std::log(slope);
    const double log_r0 = safe_log(err.r0);
    const double log_r1 = safe_log(err.r1);

    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd d_eta(y.size());
    double ll = 0.0, d_r0 = 0.0, d_r1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double lp = log_logistic(eta(i));   // log pi
        const double lq = log_logistic(-eta(i));  // log (1 - pi)
        // q = r0 + s pi,  1 - q = r1 + s (1 - pi)
        const double log_q = std::max(log_add_exp(log_r0, log_slope + lp), kLogFloor);
        const double log_nq = std::max(log_add_exp(log_r1, log_slope + lq), kLogFloor);
        if (y(i) == 1.0) {
            ll += log_q;
            d_eta(i) = std::exp(log_slope + lp + lq - log_q);
            d_r0 += std::exp(lq - log_q);  // dq/dr0 = 1 - pi
            d_r1 -= std::exp(lp - log_q);  // dq/dr1 = -pi
        } else {
            ll += log_nq;
            d_eta(i) = -std::exp(log_slope + lp + lq - log_nq);
            d_r0 -= std::exp(lq - log_nq);
            d_r1 += std::exp(lp - log_nq);
        }
    }
    LogLikelihood out;
    out.value = ll;
    out.gradient.resize(beta.size() + 2);
    out.gradient.head(beta.size()) = x.transpose() * d_eta;
    out.gradient(beta.size()) = d_r0;
    out.gradient(beta.size() + 1) = d_r1;
    return out;
}

LogLikelihood bec_marginal_loglik_full(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                       const CoefficientVector &beta, double se, double sp) {
    check_dims(y, x, beta);
    if (!(se > 0.0 && se <= 1.0 && sp > 0.0 && sp <= 1.0)) {
        throw DomainError("sensitivity and specificity must lie in (0, 1]");
    }
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd d_eta(y.size());
    double ll = 0.0, d_se = 0.0, d_sp = 0.0;
    const double youden = se + sp - 1.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double pi = logistic(eta(i));
        const double one_minus_pi = logistic(-eta(i));
        const double dpi = pi * one_minus_pi;
        if (y(i) == 1.0) {
            const double q = std::max(se * pi + (1.0 - sp) * one_minus_pi, kProbabilityFloor);
            ll += std::log(q);
            d_eta(i) = youden * dpi / q;
            d_se += pi / q;
            d_sp -= one_minus_pi / q;
        } else {
            const double nq = std::max((1.0 - se) * pi + sp * one_minus_pi, kProbabilityFloor);
            ll += std::log(nq);
            d_eta(i) = -youden * dpi / nq;
            d_se -= pi / nq;
            d_sp += one_minus_pi / nq;
        }
    }
    LogLikelihood out;
    out.value = ll;
    out.gradient.resize(beta.size() + 2);
    out.gradient.head(beta.size()) = x.transpose() * d_eta;
    out.gradient(beta.size()) = d_se;
    out.gradient(beta.size() + 1) = d_sp;
    return out;
}

double std_loglik_value(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    check_dims(y, x, beta);
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) ll += y(i) == 1.0 ? log_logistic(eta(i)) : log_logistic(-eta(i));
    return ll;
}

double bec_loglik_value(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta,
                        double se, double sp) {
    check_dims(y, x, beta);
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double pi = logistic(eta(i));
        const double one_minus_pi = logistic(-eta(i));
        if (y(i) == 1.0) {
            ll += std::log(std::max(se * pi + (1.0 - sp) * one_minus_pi, kProbabilityFloor));
        } else {
            ll += std::log(std::max((1.0 - se) * pi + sp * one_minus_pi, kProbabilityFloor));
        }
    }
    return ll;
}

LogLikelihood bec_marginal_loglik(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                  const CoefficientVector &beta, const AssayProfile &assay) {
    if (assay.mode != AssayMode::Fixed) {
        throw DomainError("bec_marginal_loglik needs a fixed-mode assay");
    }
    assay.validate();
    auto full = bec_marginal_loglik_full(y, x, beta, assay.sensitivity, assay.specificity);
    full.gradient.conservativeResize(beta.size());
    return full;
}

} // namespace misclass
