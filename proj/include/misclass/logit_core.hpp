#pragma once

// Link functions and log-likelihoods for logistic regression with and
// without outcome misclassification.
//
//   standard: P(Y=1|x) = pi(x)
//   Liu:      P(Y=1|x) = r0 + (1 - r0 - r1) pi(x)
//   BEC:      P(Y=1|x) = Se pi(x) + (1 - Sp)(1 - pi(x))
//
// The BEC form is the latent true status summed out; with r0 = 1 - Sp and
// r1 = 1 - Se it is the Liu form.

#include "misclass/data_model.hpp"

#include <Eigen/Dense>

namespace misclass {

using CoefficientVector = Eigen::VectorXd;

struct ErrorRates {
    double r0 = 0.0; // false-positive rate P(Y=1 | true 0)
    double r1 = 0.0; // false-negative rate P(Y=0 | true 1)

    // Throws DomainError unless 0 <= r < 0.5 for both rates.
    void validate() const;
    static ErrorRates from_assay(const AssayProfile &assay) {
        return {1.0 - assay.specificity, 1.0 - assay.sensitivity};
    }
};

// Log arguments are clamped at this floor in the misclassification likelihoods.
inline constexpr double kProbabilityFloor = 1e-300;

double logistic(double eta);
// log(logistic(eta)) without overflow or cancellation.
double log_logistic(double eta);

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd &x, const CoefficientVector &beta);
inline Eigen::VectorXd linear_predictor(const DesignMatrix &x, const CoefficientVector &beta) {
    return linear_predictor(x.values, beta);
}

double liu_response_prob(double eta, const ErrorRates &err);

struct LogLikelihood {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

// Gradient over beta: X^T (y - pi).
LogLikelihood std_loglik(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta);

// Gradient over (beta, r0, r1), length p + 3.
LogLikelihood liu_loglik(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta,
                         const ErrorRates &err);

// Fixed-mode assay; gradient over beta.
LogLikelihood bec_marginal_loglik(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                  const CoefficientVector &beta, const AssayProfile &assay);

// Same likelihood with (se, sp) as free arguments; gradient over
// (beta, se, sp), length p + 3. Requires se, sp in (0, 1].
LogLikelihood bec_marginal_loglik_full(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                       const CoefficientVector &beta, double se, double sp);

// Value-only forms for samplers (no gradient work).
double std_loglik_value(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta);
double bec_loglik_value(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta,
                        double se, double sp);

} // namespace misclass
