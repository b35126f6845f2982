#pragma once

// Maximum-likelihood fitting: Newton/IRLS for the standard logistic model
// and quasi-Newton joint estimation of coefficients and error rates for the
// Liu misclassification model.

#include "misclass/data_model.hpp"
#include "misclass/logit_core.hpp"
#include "misclass/optimize.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace misclass {

enum class ModelTag { STD, LIU, BC, BEC };
std::string_view to_string(ModelTag tag);
ModelTag parse_model_tag(std::string_view text);

enum class LiuVariant { BothErrorsFree, FalsePositiveOnly, FalseNegativeOnly, ErrorsEqual };
std::string_view to_string(LiuVariant v);
LiuVariant parse_liu_variant(std::string_view text);
int free_error_parameters(LiuVariant v);

struct ErrorRateEstimate {
    ErrorRates rates;
    std::optional<double> r0_se; // absent when r0 was not estimated or SEs are unavailable
    std::optional<double> r1_se;
};

struct FitResult {
    ModelTag model = ModelTag::STD;
    std::vector<std::string> coefficient_names;
    CoefficientVector beta_hat;
    std::optional<Eigen::VectorXd> beta_se;
    std::optional<ErrorRateEstimate> error_rates;     // LIU only
    std::optional<LiuVariant> liu_variant;            // LIU only
    std::optional<Eigen::MatrixXd> covariance;        // beta block first, then free error rates
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    std::optional<std::string> condition_warning;
    std::optional<double> rcond;
};

struct InformationResult {
    Eigen::MatrixXd information; // negative Hessian
    std::optional<Eigen::MatrixXd> covariance;
    std::optional<Eigen::VectorXd> se;
    double rcond = 0.0;
    std::optional<std::string> warning;
};

// Negative Hessian of a log-likelihood by central differences of its
// analytic gradient (step 1e-5 * max(1, |theta_j|)). SEs are absent when
// the matrix is not positive definite.
InformationResult observed_information(const GradientFn &gradient, const Eigen::VectorXd &theta_hat);

inline constexpr double kSeparationThreshold = 30.0;

// Throws SingularDesignError naming the collinear columns when X is rank
// deficient (column-pivoted QR).
void check_full_rank(const DesignMatrix &x);

FitResult fit_std(const Eigen::VectorXd &y, const DesignMatrix &x);

struct LiuStart {
    CoefficientVector beta;
    ErrorRates rates{0.01, 0.01};
};

// beta from fit_std, both error rates 0.01.
LiuStart default_liu_init(const Eigen::VectorXd &y, const DesignMatrix &x);

struct LiuOptions {
    OptimizeOptions optimizer{};
    // Free error rates closer than this to 0 or 0.5 are boundary estimates
    // and the fit is reported as not converged.
    double boundary_margin = 1e-6;
    bool compute_se = true;
};

FitResult fit_liu(const Eigen::VectorXd &y, const DesignMatrix &x, LiuVariant variant = LiuVariant::BothErrorsFree,
                  const std::optional<LiuStart> &init = std::nullopt, const LiuOptions &options = {});

// Coefficients only, error rates held at `rates` (zero rates reduce to the
// standard model).
FitResult fit_liu_fixed_rates(const Eigen::VectorXd &y, const DesignMatrix &x, const ErrorRates &rates);

struct MultiStartResult {
    FitResult best;
    std::size_t best_index = 0; // 0 is the default start
    std::vector<double> logliks;
};

// Restart 0 uses default_liu_init; the others perturb it randomly. Picks
// the highest log-likelihood with ties going to the lowest index.
MultiStartResult fit_liu_multistart(const Eigen::VectorXd &y, const DesignMatrix &x, LiuVariant variant,
                                    std::size_t random_restarts, std::uint64_t seed,
                                    const LiuOptions &options = {});

} // namespace misclass
