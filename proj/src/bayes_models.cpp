#include "misclass/bayes_models.hpp"

#include "misclass/error.hpp"
#include "misclass/parallel.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <limits>
#include <random>

namespace misclass {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_log_density_sum(const CoefficientVector &beta, double variance) {
    const double two_pi = 2.0 * boost::math::constants::pi<double>();
    return -0.5 * static_cast<double>(beta.size()) * std::log(two_pi * variance) -
           0.5 * beta.squaredNorm() / variance;
}

double beta_log_density(double x, const BetaParams &b) {
    if (!(x > 0.0 && x < 1.0)) return kNegInf;
    return (b.alpha - 1.0) * std::log(x) + (b.beta - 1.0) * std::log1p(-x) + std::lgamma(b.alpha + b.beta) -
           std::lgamma(b.alpha) - std::lgamma(b.beta);
}

std::size_t covariate_count(const Eigen::MatrixXd &x) { return static_cast<std::size_t>(x.cols()) - 1; }

struct SamplingModel {
    std::function<double(const Eigen::VectorXd &)> log_density;
    Objective objective;                      // same density with gradient, for mode finding
    std::vector<std::string> names;           // sampling-space names
    std::function<Eigen::VectorXd(const Eigen::VectorXd &)> to_reported; // sampling -> reported
};

double logit(double p) { return std::log(p) - std::log1p(-p); }

// Posterior mode, Laplace covariance, overdispersed starts, sampling and
// back-transformation shared by BC and BEC.
BayesFit run_bayes(ModelTag tag, const SamplingModel &model, const Eigen::VectorXd &mode_start,
                   const Standardization &standardization, const std::vector<std::string> &reported_names,
                   std::size_t n_coef, const SamplerConfig &config, const BayesOptions &options,
                   const std::function<double(const Eigen::VectorXd &)> &loglik_at_reported) {
    const OptimizeResult mode = maximize(model.objective, mode_start);
    if (!mode.x.allFinite() || !std::isfinite(mode.value)) {
        throw SamplerInitError("posterior mode search failed: " + mode.message);
    }
    const GradientFn grad = [&](const Eigen::VectorXd &t) { return model.objective(t).gradient; };
    const Eigen::MatrixXd neg_h = -fd_hessian(grad, mode.x);
    const Eigen::Index d = mode.x.size();

    SamplerConfig cfg = config;
    Eigen::MatrixXd laplace_chol = 0.1 * Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
    if (llt.info() == Eigen::Success) {
        const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
        Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
        if (cov.allFinite() && cov_llt.info() == Eigen::Success) {
            laplace_chol = cov_llt.matrixL();
            if (!cfg.initial_covariance) cfg.initial_covariance = cov;
        }
    }

    std::vector<Eigen::VectorXd> inits;
    for (std::size_t c = 0; c < cfg.chains; ++c) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0x5eed0000ULL + c));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd z(d);
        for (Eigen::Index k = 0; k < d; ++k) z(k) = gauss(rng);
        double spread = options.init_spread;
        Eigen::VectorXd start = mode.x + spread * (laplace_chol * z);
        while (!std::isfinite(model.log_density(start)) && spread > 1e-6) {
            spread *= 0.5;
            start = mode.x + spread * (laplace_chol * z);
        }
        if (!std::isfinite(model.log_density(start))) start = mode.x;
        inits.push_back(std::move(start));
    }

    PosteriorDraws raw = sample(model.log_density, static_cast<std::size_t>(d), cfg, inits, model.names);

    PosteriorDraws reported = raw;
    reported.param_names = reported_names;
    for (std::size_t c = 0; c < raw.chains(); ++c) {
        const Eigen::MatrixXd &src = raw.draws[c];
        Eigen::MatrixXd dst(src.rows(), static_cast<Eigen::Index>(reported_names.size()));
        for (Eigen::Index i = 0; i < src.rows(); ++i) dst.row(i) = model.to_reported(src.row(i).transpose()).transpose();
        reported.draws[c] = std::move(dst);
    }
    reported.refresh_diagnostics();

    BayesFit out;
    out.standardization = standardization;
    FitResult &fit = out.fit;
    fit.model = tag;
    fit.coefficient_names.assign(reported_names.begin(), reported_names.begin() + static_cast<std::ptrdiff_t>(n_coef));
    const Eigen::VectorXd mean = reported.posterior_mean();
    const Eigen::VectorXd sd = reported.posterior_sd();
    fit.beta_hat = mean.head(static_cast<Eigen::Index>(n_coef));
    fit.beta_se = sd.head(static_cast<Eigen::Index>(n_coef));
    fit.loglik = loglik_at_reported(mean);
    fit.iterations = static_cast<int>(cfg.chains * (cfg.warmup + cfg.samples));

    // Convergence is judged on the sampling-space coordinates.
    const auto worst = raw.max_rhat();
    fit.converged = worst && *worst < options.rhat_threshold;
    if (!worst) {
        fit.condition_warning = "R-hat unavailable (a parameter has zero posterior variance)";
    } else if (!fit.converged) {
        fit.condition_warning = "max R-hat " + std::to_string(*worst) + " >= " + std::to_string(options.rhat_threshold);
    }
    out.draws = std::move(reported);
    return out;
}

} // namespace

double newman_prior_variance(std::size_t p) {
    const double pi = boost::math::constants::pi<double>();
    return pi * pi / (3.0 * static_cast<double>(p + 1));
}

double bc_log_posterior(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    return std_loglik_value(y, x, beta) + normal_log_density_sum(beta, newman_prior_variance(covariate_count(x)));
}

ObjectiveValue bc_log_posterior_with_gradient(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                              const CoefficientVector &beta) {
    const double v = newman_prior_variance(covariate_count(x));
    LogLikelihood ll = std_loglik(y, x, beta);
    return {ll.value + normal_log_density_sum(beta, v), ll.gradient - beta / v};
}

double bec_log_posterior(const Eigen::VectorXd &y, const Eigen::MatrixXd &x, const BecParameterBlock &block,
                         const AssayProfile &assay) {
    const double v = newman_prior_variance(covariate_count(x));
    const double prior_beta = normal_log_density_sum(block.beta, v);
    if (assay.mode == AssayMode::Fixed) {
        return bec_loglik_value(y, x, block.beta, assay.sensitivity, assay.specificity) + prior_beta;
    }
    if (!block.se || !block.sp) throw DomainError("BetaPrior assay needs se and sp in the parameter block");
    const double se = *block.se;
    const double sp = *block.sp;
    if (!(se > 0.0 && se < 1.0 && sp > 0.0 && sp < 1.0) || !(se + sp > 1.0)) return kNegInf;
    return bec_loglik_value(y, x, block.beta, se, sp) + prior_beta + beta_log_density(se, assay.se_prior) +
           beta_log_density(sp, assay.sp_prior);
}

ObjectiveValue bec_log_posterior_with_gradient(const Eigen::VectorXd &y, const Eigen::MatrixXd &x,
                                               const BecParameterBlock &block, const AssayProfile &assay) {
    const double v = newman_prior_variance(covariate_count(x));
    const Eigen::Index nb = block.beta.size();
    if (assay.mode == AssayMode::Fixed) {
        LogLikelihood ll = bec_marginal_loglik_full(y, x, block.beta, assay.sensitivity, assay.specificity);
        return {ll.value + normal_log_density_sum(block.beta, v), ll.gradient.head(nb) - block.beta / v};
    }
    if (!block.se || !block.sp) throw DomainError("BetaPrior assay needs se and sp in the parameter block");
    const double se = *block.se;
    const double sp = *block.sp;
    ObjectiveValue out;
    out.gradient = Eigen::VectorXd::Zero(nb + 2);
    if (!(se > 0.0 && se < 1.0 && sp > 0.0 && sp < 1.0) || !(se + sp > 1.0)) {
        out.value = kNegInf;
        return out;
    }
    LogLikelihood ll = bec_marginal_loglik_full(y, x, block.beta, se, sp);
    const BetaParams &a = assay.se_prior;
    const BetaParams &b = assay.sp_prior;
    out.value = ll.value + normal_log_density_sum(block.beta, v) + beta_log_density(se, a) + beta_log_density(sp, b);
    out.gradient.head(nb) = ll.gradient.head(nb) - block.beta / v;
    out.gradient(nb) = ll.gradient(nb) + (a.alpha - 1.0) / se - (a.beta - 1.0) / (1.0 - se);
    out.gradient(nb + 1) = ll.gradient(nb + 1) + (b.alpha - 1.0) / sp - (b.beta - 1.0) / (1.0 - sp);
    return out;
}

Standardization Standardization::detect(const Eigen::MatrixXd &x) {
    Standardization s;
    std::vector<double> centers, scales;
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
        const auto col = x.col(j);
        const bool binary = (col.array() == 0.0 || col.array() == 1.0).all();
        if (binary) continue;
        const double m = col.mean();
        const double sd = std::sqrt((col.array() - m).square().sum() / static_cast<double>(col.size() - 1));
        if (!(sd > 0.0)) continue;
        s.columns.push_back(j);
        centers.push_back(m);
        scales.push_back(sd);
    }
    s.center = Eigen::Map<Eigen::VectorXd>(centers.data(), static_cast<Eigen::Index>(centers.size()));
    s.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));
    return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd &x) const {
    Eigen::MatrixXd out = x;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out.col(columns[k]) = (x.col(columns[k]).array() - center(i)) / scale(i);
    }
    return out;
}

Eigen::VectorXd Standardization::to_original(const Eigen::VectorXd &beta_std) const {
    Eigen::VectorXd b = beta_std;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        b(columns[k]) = beta_std(columns[k]) / scale(i);
        b(0) -= beta_std(columns[k]) * center(i) / scale(i);
    }
    return b;
}

Eigen::VectorXd Standardization::to_standardized(const Eigen::VectorXd &beta_orig) const {
    Eigen::VectorXd b = beta_orig;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        b(columns[k]) = beta_orig(columns[k]) * scale(i);
        b(0) += beta_orig(columns[k]) * center(i);
    }
    return b;
}

BayesFit fit_bc(const Eigen::VectorXd &y, const DesignMatrix &x, const SamplerConfig &config,
                const BayesOptions &options) {
    if (y.size() != x.rows()) throw DimensionError("outcome length does not match design rows");
    config.validate();
    const Standardization stdz = options.standardize ? Standardization::detect(x.values) : Standardization::none();
    const Eigen::MatrixXd xs = stdz.apply(x.values);

    SamplingModel model;
    model.log_density = [&y, &xs](const Eigen::VectorXd &b) { return bc_log_posterior(y, xs, b); };
    model.objective = [&y, &xs](const Eigen::VectorXd &b) { return bc_log_posterior_with_gradient(y, xs, b); };
    model.names = x.column_names;
    model.to_reported = [&stdz](const Eigen::VectorXd &b) { return stdz.to_original(b); };

    const Eigen::MatrixXd &xo = x.values;
    auto loglik = [&y, &xo](const Eigen::VectorXd &b) { return std_loglik_value(y, xo, b); };
    return run_bayes(ModelTag::BC, model, Eigen::VectorXd::Zero(x.cols()), stdz, x.column_names,
                     static_cast<std::size_t>(x.cols()), config, options, loglik);
}

BayesFit fit_bec(const Eigen::VectorXd &y, const DesignMatrix &x, const AssayProfile &assay,
                 const SamplerConfig &config, const BayesOptions &options) {
    if (y.size() != x.rows()) throw DimensionError("outcome length does not match design rows");
    assay.validate();
    config.validate();
    const Standardization stdz = options.standardize ? Standardization::detect(x.values) : Standardization::none();
    const Eigen::MatrixXd xs = stdz.apply(x.values);
    const Eigen::Index nb = x.cols();
    const Eigen::MatrixXd &xo = x.values;

    // Mode search for the fixed-assay posterior starts from the BC mode.
    const Objective bc_obj = [&y, &xs](const Eigen::VectorXd &b) { return bc_log_posterior_with_gradient(y, xs, b); };
    const Eigen::VectorXd bc_mode = maximize(bc_obj, Eigen::VectorXd::Zero(nb)).x;

    SamplingModel model;
    std::vector<std::string> reported_names = x.column_names;
    Eigen::VectorXd mode_start;
    std::function<double(const Eigen::VectorXd &)> loglik;

    if (assay.mode == AssayMode::Fixed) {
        model.log_density = [&](const Eigen::VectorXd &b) { return bec_log_posterior(y, xs, {b, {}, {}}, assay); };
        model.objective = [&](const Eigen::VectorXd &b) {
            return bec_log_posterior_with_gradient(y, xs, {b, {}, {}}, assay);
        };
        model.names = x.column_names;
        model.to_reported = [&stdz](const Eigen::VectorXd &b) { return stdz.to_original(b); };
        mode_start = bc_mode;
        loglik = [&](const Eigen::VectorXd &b) {
            return bec_loglik_value(y, xo, b, assay.sensitivity, assay.specificity);
        };
    } else {
        // Sampling space: (beta, logit se, logit sp) with the Jacobian added.
        auto unpack = [nb](const Eigen::VectorXd &t) {
            return BecParameterBlock{t.head(nb), logistic(t(nb)), logistic(t(nb + 1))};
        };
        model.log_density = [&, unpack](const Eigen::VectorXd &t) {
            const BecParameterBlock blk = unpack(t);
            const double lp = bec_log_posterior(y, xs, blk, assay);
            if (!std::isfinite(lp)) return lp;
            return lp + std::log(*blk.se * (1.0 - *blk.se)) + std::log(*blk.sp * (1.0 - *blk.sp));
        };
        model.objective = [&, unpack](const Eigen::VectorXd &t) {
            const BecParameterBlock blk = unpack(t);
            ObjectiveValue v = bec_log_posterior_with_gradient(y, xs, blk, assay);
            if (!std::isfinite(v.value)) return v;
            const double se = *blk.se, sp = *blk.sp;
            v.value += std::log(se * (1.0 - se)) + std::log(sp * (1.0 - sp));
            v.gradient(nb) = v.gradient(nb) * se * (1.0 - se) + (1.0 - 2.0 * se);
            v.gradient(nb + 1) = v.gradient(nb + 1) * sp * (1.0 - sp) + (1.0 - 2.0 * sp);
            return v;
        };
        model.names = x.column_names;
        model.names.emplace_back("logit_se");
        model.names.emplace_back("logit_sp");
        model.to_reported = [&stdz, nb](const Eigen::VectorXd &t) {
            Eigen::VectorXd out(t.size());
            out.head(nb) = stdz.to_original(t.head(nb));
            out(nb) = logistic(t(nb));
            out(nb + 1) = logistic(t(nb + 1));
            return out;
        };
        reported_names.emplace_back("se");
        reported_names.emplace_back("sp");
        mode_start.resize(nb + 2);
        mode_start.head(nb) = bc_mode;
        mode_start(nb) = logit(assay.sensitivity);
        mode_start(nb + 1) = logit(assay.specificity);
        loglik = [&](const Eigen::VectorXd &t) { return bec_loglik_value(y, xo, t.head(nb), t(nb), t(nb + 1)); };
    }

    BayesFit out = run_bayes(ModelTag::BEC, model, mode_start, stdz, reported_names,
                             static_cast<std::size_t>(nb), config, options, loglik);
    if (assay.mode == AssayMode::BetaPrior) {
        const Eigen::VectorXd mean = out.draws.posterior_mean();
        const Eigen::VectorXd sd = out.draws.posterior_sd();
        out.fit.error_rates = ErrorRateEstimate{{1.0 - mean(nb + 1), 1.0 - mean(nb)}, sd(nb + 1), sd(nb)};
    }
    return out;
}

} // namespace misclass
