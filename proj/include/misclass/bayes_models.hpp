#pragma once

// Bayesian logistic models.
//
// BC:  beta_j ~ N(0, pi^2 / (3(p+1))) for j = 0..p, standard likelihood;
//      prevalence is corrected externally afterwards.
// BEC: same prior, likelihood with the latent true status summed out,
//      P(Y=1|x) = Se pi + (1 - Sp)(1 - pi). Se and Sp are either fixed or
//      carry Beta priors truncated to Se + Sp > 1.
//
// fit_bc / fit_bec centre and scale continuous covariates before applying
// the prior and report every draw back on the original covariate scale.

#include "misclass/data_model.hpp"
#include "misclass/freq_fit.hpp"
#include "misclass/logit_core.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/optimize.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace misclass {

double newman_prior_variance(std::size_t p);

double bc_log_posterior(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta);
ObjectiveValue bc_log_posterior_with_gradient(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                              const CoefficientVector &beta);

struct BecParameterBlock {
    CoefficientVector beta;
    // Sampled coordinates, present only for BetaPrior assays.
    std::optional<double> se;
    std::optional<double> sp;
};

// Fixed assays use the assay's Se/Sp; BetaPrior assays read se/sp from the
// block and add truncated Beta log-densities (-inf when se + sp <= 1).
double bec_log_posterior(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const BecParameterBlock &block,
                         const AssayProfile &assay);
// Gradient over beta, followed by (se, sp) for BetaPrior assays.
ObjectiveValue bec_log_posterior_with_gradient(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                               const BecParameterBlock &block, const AssayProfile &assay);

// Centring/scaling of the non-binary covariate columns.
struct Standardization {
    std::vector<Eigen::Index> columns;
    Eigen::VectorXd center;
    Eigen::VectorXd scale;

    static Standardization detect(const Eigen::MatrixXd &x);
    static Standardization none() { return {}; }
    Eigen::MatrixXd apply(const Eigen::MatrixXd &x) const;
    Eigen::VectorXd to_original(const Eigen::VectorXd &beta_std) const;
    Eigen::VectorXd to_standardized(const Eigen::VectorXd &beta_orig) const;
};

struct BayesOptions {
    bool standardize = true;
    double rhat_threshold = 1.05;
    // Chains start at the posterior mode plus this many Laplace SDs of noise.
    double init_spread = 2.0;
};

struct BayesFit {
    FitResult fit;
    PosteriorDraws draws; // coefficient columns first (original scale), then se, sp if sampled
    Standardization standardization;
};

BayesFit fit_bc(const Eigen::VectorXd &y, const DesignMatrix &x, const SamplerConfig &config,
                const BayesOptions &options = {});
BayesFit fit_bec(const Eigen::VectorXd &y, const DesignMatrix &x, const AssayProfile &assay,
                 const SamplerConfig &config, const BayesOptions &options = {});

} // namespace misclass
