#include "misclass/freq_fit.hpp"

#include "misclass/config.hpp"
#include "misclass/error.hpp"
#include "misclass/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace misclass {

namespace {

double max_abs(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// r = 0.5 * logistic(u) maps the real line onto (0, 0.5).
double rate_from_unconstrained(double u) { return 0.5 * logistic(u); }
double rate_derivative(double u) {
    const double s = logistic(u);
    return 0.5 * s * (1.0 - s);
}
double unconstrained_from_rate(double r) {
    const double s = 2.0 * r;
    return std::log(s) - std::log1p(-s);
}

struct LiuLayout {
    LiuVariant variant;
    Eigen::Index nbeta;

    Eigen::Index n_free() const { return free_error_parameters(variant); }

    ErrorRates rates_from_u(const Eigen::VectorXd &theta) const {
        const auto u = theta.tail(n_free());
        switch (variant) {
        case LiuVariant::BothErrorsFree: return {rate_from_unconstrained(u(0)), rate_from_unconstrained(u(1))};
        case LiuVariant::FalsePositiveOnly: return {rate_from_unconstrained(u(0)), 0.0};
        case LiuVariant::FalseNegativeOnly: return {0.0, rate_from_unconstrained(u(0))};
        case LiuVariant::ErrorsEqual: {
            const double r = rate_from_unconstrained(u(0));
            return {r, r};
        }
        }
        return {};
    }

    ErrorRates rates_from_natural(const Eigen::VectorXd &phi) const {
        const auto r = phi.tail(n_free());
        switch (variant) {
        case LiuVariant::BothErrorsFree: return {r(0), r(1)};
        case LiuVariant::FalsePositiveOnly: return {r(0), 0.0};
        case LiuVariant::FalseNegativeOnly: return {0.0, r(0)};
        case LiuVariant::ErrorsEqual: return {r(0), r(0)};
        }
        return {};
    }

    Eigen::VectorXd u_from_rates(const ErrorRates &e) const {
        Eigen::VectorXd u(n_free());
        switch (variant) {
        case LiuVariant::BothErrorsFree:
            u << unconstrained_from_rate(e.r0), unconstrained_from_rate(e.r1);
            break;
        case LiuVariant::FalsePositiveOnly: u << unconstrained_from_rate(e.r0); break;
        case LiuVariant::FalseNegativeOnly: u << unconstrained_from_rate(e.r1); break;
        case LiuVariant::ErrorsEqual: u << unconstrained_from_rate(0.5 * (e.r0 + e.r1)); break;
        }
        return u;
    }

    // Reduces the (r0, r1) gradient to the free natural parameters.
    Eigen::VectorXd free_rate_gradient(double d_r0, double d_r1) const {
        Eigen::VectorXd g(n_free());
        switch (variant) {
        case LiuVariant::BothErrorsFree: g << d_r0, d_r1; break;
        case LiuVariant::FalsePositiveOnly: g << d_r0; break;
        case LiuVariant::FalseNegativeOnly: g << d_r1; break;
        case LiuVariant::ErrorsEqual: g << d_r0 + d_r1; break;
        }
        return g;
    }

    std::vector<double> free_rates(const ErrorRates &e) const {
        switch (variant) {
        case LiuVariant::BothErrorsFree: return {e.r0, e.r1};
        case LiuVariant::FalsePositiveOnly: return {e.r0};
        case LiuVariant::FalseNegativeOnly: return {e.r1};
        case LiuVariant::ErrorsEqual: return {e.r0};
        }
        return {};
    }
};

void append_warning(FitResult &fit, const std::string &msg) {
    if (fit.condition_warning) {
        *fit.condition_warning += "; " + msg;
    } else {
        fit.condition_warning = msg;
    }
}

} // namespace

std::string_view to_string(ModelTag tag) {
    switch (tag) {
    case ModelTag::STD: return "STD";
    case ModelTag::LIU: return "Liu";
    case ModelTag::BC: return "BC";
    case ModelTag::BEC: return "BEC";
    }
    return "?";
}

ModelTag parse_model_tag(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "std") return ModelTag::STD;
    if (t == "liu") return ModelTag::LIU;
    if (t == "bc") return ModelTag::BC;
    if (t == "bec") return ModelTag::BEC;
    throw InputError("unknown model '" + std::string(text) + "' (expected std, liu, bc or bec)");
}

std::string_view to_string(LiuVariant v) {
    switch (v) {
    case LiuVariant::BothErrorsFree: return "both";
    case LiuVariant::FalsePositiveOnly: return "fp-only";
    case LiuVariant::FalseNegativeOnly: return "fn-only";
    case LiuVariant::ErrorsEqual: return "equal";
    }
    return "?";
}

LiuVariant parse_liu_variant(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "both") return LiuVariant::BothErrorsFree;
    if (t == "fp-only") return LiuVariant::FalsePositiveOnly;
    if (t == "fn-only") return LiuVariant::FalseNegativeOnly;
    if (t == "equal") return LiuVariant::ErrorsEqual;
    throw InputError("unknown Liu variant '" + std::string(text) + "' (expected both, fp-only, fn-only, equal)");
}

int free_error_parameters(LiuVariant v) { return v == LiuVariant::BothErrorsFree ? 2 : 1; }

InformationResult observed_information(const GradientFn &gradient, const Eigen::VectorXd &theta_hat) {
    InformationResult out;
    out.information = -fd_hessian(gradient, theta_hat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.information, Eigen::EigenvaluesOnly);
    const auto &ev = eig.eigenvalues();
    const double lo = ev.minCoeff();
    const double hi = ev.cwiseAbs().maxCoeff();
    out.rcond = hi > 0.0 ? lo / hi : 0.0;
    if (!(lo > 0.0) || !out.information.allFinite()) {
        out.warning = "observed information is not positive definite (reciprocal condition " +
                      std::to_string(out.rcond) + ")";
        out.rcond = std::max(out.rcond, 0.0);
        return out;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(out.information);
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(theta_hat.size(), theta_hat.size()));
    out.se = cov.diagonal().cwiseSqrt();
    out.covariance = std::move(cov);
    return out;
}

void check_full_rank(const DesignMatrix &x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.values);
    const Eigen::Index rank = qr.rank();
    if (rank == x.cols()) return;
    std::string names;
    const auto &perm = qr.colsPermutation().indices();
    for (Eigen::Index k = rank; k < x.cols(); ++k) {
        if (!names.empty()) names += ", ";
        const auto col = static_cast<std::size_t>(perm(k));
        names += col < x.column_names.size() ? x.column_names[col] : std::to_string(col);
    }
    throw SingularDesignError("design matrix is rank deficient (rank " + std::to_string(rank) + " of " +
                              std::to_string(x.cols()) + "); collinear column(s): " + names);
}

FitResult fit_std(const Eigen::VectorXd &y, const DesignMatrix &x) {
    if (y.size() != x.rows()) throw DimensionError("outcome length does not match design rows");
    check_full_rank(x);
    const Eigen::MatrixXd &X = x.values;
    const Eigen::Index d = X.cols();

    FitResult fit;
    fit.model = ModelTag::STD;
    fit.coefficient_names = x.column_names;
    CoefficientVector beta = CoefficientVector::Zero(d);
    LogLikelihood ll = std_loglik(y, X, beta);

    auto information = [&](const CoefficientVector &b) {
        const Eigen::VectorXd eta = X * b;
        Eigen::VectorXd w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double p = logistic(eta(i));
            w(i) = p * (1.0 - p);
        }
        Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
        return info;
    };

    constexpr int kMaxIterations = 100;
    bool converged = false;
    bool separated = false;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        const Eigen::MatrixXd info = information(beta);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step = ldlt.solve(ll.gradient);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) break;

        // A tiny score with a large Newton step means the optimum is at
        // infinity (fitted probabilities collapsing to 0 or 1).
        const double score = max_abs(ll.gradient);
        const double step_size = max_abs(step);
        if ((score < 1e-8 && step_size < 1e-6) || step_size < 1e-10) {
            converged = true;
            break;
        }
        double t = 1.0;
        CoefficientVector next = beta + step;
        LogLikelihood ll_next = std_loglik(y, X, next);
        while (ll_next.value < ll.value - 1e-12 * std::abs(ll.value) && t > 1e-8) {
            t *= 0.5;
            next = beta + t * step;
            ll_next = std_loglik(y, X, next);
        }
        beta = next;
        ll = ll_next;
        if (max_abs(beta) > kSeparationThreshold) {
            separated = true;
            ++it;
            break;
        }
    }

    fit.beta_hat = beta;
    fit.loglik = ll.value;
    fit.iterations = it;
    fit.converged = converged && max_abs(beta) <= kSeparationThreshold;

    const Eigen::MatrixXd info = information(beta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    fit.rcond = hi > 0.0 ? std::max(lo / hi, 0.0) : 0.0;
    if (lo > 0.0) {
        Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
        fit.beta_se = cov.diagonal().cwiseSqrt();
        fit.covariance = std::move(cov);
    } else {
        append_warning(fit, "information matrix is not positive definite; standard errors unavailable");
    }

    if (separated || (!converged && max_abs(beta) > kSeparationThreshold)) {
        append_warning(fit, "separation: coefficient magnitude exceeded " +
                                std::to_string(static_cast<int>(kSeparationThreshold)) +
                                " with a non-vanishing Newton step (MLE at infinity)");
    } else if (!fit.converged) {
        append_warning(fit, "Newton iterations did not converge (max |score| = " +
                                std::to_string(max_abs(ll.gradient)) + ")");
    }
    return fit;
}

LiuStart default_liu_init(const Eigen::VectorXd &y, const DesignMatrix &x) {
    LiuStart s;
    s.beta = fit_std(y, x).beta_hat;
    s.rates = {0.01, 0.01};
    return s;
}

FitResult fit_liu(const Eigen::VectorXd &y, const DesignMatrix &x, LiuVariant variant,
                  const std::optional<LiuStart> &init, const LiuOptions &options) {
    if (y.size() != x.rows()) throw DimensionError("outcome length does not match design rows");
    check_full_rank(x);
    const Eigen::MatrixXd &X = x.values;
    const LiuLayout layout{variant, X.cols()};
    const Eigen::Index nb = layout.nbeta;
    const Eigen::Index nf = layout.n_free();

    LiuStart start = init ? *init : default_liu_init(y, x);
    if (start.beta.size() != nb) throw DimensionError("Liu start point has the wrong number of coefficients");
    start.rates.validate();
    if (!start.beta.allFinite()) throw DomainError("Liu start point is not finite");
    // Keep the start strictly inside (0, 0.5) on the unconstrained scale.
    start.rates.r0 = std::clamp(start.rates.r0, 1e-6, 0.5 - 1e-6);
    start.rates.r1 = std::clamp(start.rates.r1, 1e-6, 0.5 - 1e-6);

    Eigen::VectorXd theta0(nb + nf);
    theta0.head(nb) = start.beta;
    theta0.tail(nf) = layout.u_from_rates(start.rates);

    const Objective objective = [&](const Eigen::VectorXd &theta) {
        const ErrorRates e = layout.rates_from_u(theta);
        ObjectiveValue out;
        // Rates underflowing to 0.5 exactly leave the model's domain.
        if (!(e.r0 < 0.5 && e.r1 < 0.5)) {
            out.value = -std::numeric_limits<double>::infinity();
            out.gradient = Eigen::VectorXd::Zero(theta.size());
            return out;
        }
        const LogLikelihood ll = liu_loglik(y, X, theta.head(nb), e);
        out.value = ll.value;
        out.gradient.resize(theta.size());
        out.gradient.head(nb) = ll.gradient.head(nb);
        const Eigen::VectorXd g_rates = layout.free_rate_gradient(ll.gradient(nb), ll.gradient(nb + 1));
        for (Eigen::Index k = 0; k < nf; ++k) out.gradient(nb + k) = g_rates(k) * rate_derivative(theta(nb + k));
        return out;
    };

    const OptimizeResult opt = maximize(objective, theta0, options.optimizer);

    FitResult fit;
    fit.model = ModelTag::LIU;
    fit.liu_variant = variant;
    fit.coefficient_names = x.column_names;
    fit.beta_hat = opt.x.head(nb);
    fit.loglik = opt.value;
    fit.iterations = opt.iterations;
    fit.converged = opt.converged;
    const ErrorRates rates = layout.rates_from_u(opt.x);
    fit.error_rates = ErrorRateEstimate{rates, std::nullopt, std::nullopt};
    if (!opt.converged) append_warning(fit, opt.message);

    if (max_abs(fit.beta_hat) > kSeparationThreshold) {
        fit.converged = false;
        append_warning(fit, "separation: coefficient magnitude exceeded " +
                                std::to_string(static_cast<int>(kSeparationThreshold)));
    }
    bool at_boundary = false;
    for (double r : layout.free_rates(rates)) {
        if (r < options.boundary_margin || r > 0.5 - options.boundary_margin) at_boundary = true;
    }
    if (at_boundary) {
        fit.converged = false;
        append_warning(fit, "error-rate estimate at the boundary of [0, 0.5) (r0 = " + std::to_string(rates.r0) +
                                ", r1 = " + std::to_string(rates.r1) + ")");
    }

    if (options.compute_se && !at_boundary) {
        Eigen::VectorXd phi(nb + nf);
        phi.head(nb) = fit.beta_hat;
        const auto fr = layout.free_rates(rates);
        for (Eigen::Index k = 0; k < nf; ++k) phi(nb + k) = fr[static_cast<std::size_t>(k)];
        const GradientFn natural_gradient = [&](const Eigen::VectorXd &p) {
            const LogLikelihood ll = liu_loglik(y, X, p.head(nb), layout.rates_from_natural(p));
            Eigen::VectorXd g(p.size());
            g.head(nb) = ll.gradient.head(nb);
            g.tail(nf) = layout.free_rate_gradient(ll.gradient(nb), ll.gradient(nb + 1));
            return g;
        };
        try {
            InformationResult info = observed_information(natural_gradient, phi);
            fit.rcond = info.rcond;
            if (info.se) {
                fit.beta_se = info.se->head(nb);
                fit.covariance = info.covariance;
                auto &er = *fit.error_rates;
                switch (variant) {
                case LiuVariant::BothErrorsFree:
                    er.r0_se = (*info.se)(nb);
                    er.r1_se = (*info.se)(nb + 1);
                    break;
                case LiuVariant::FalsePositiveOnly: er.r0_se = (*info.se)(nb); break;
                case LiuVariant::FalseNegativeOnly: er.r1_se = (*info.se)(nb); break;
                case LiuVariant::ErrorsEqual:
                    er.r0_se = (*info.se)(nb);
                    er.r1_se = (*info.se)(nb);
                    break;
                }
            } else {
                fit.converged = false;
                append_warning(fit, *info.warning);
            }
        } catch (const DomainError &e) {
            fit.converged = false;
            append_warning(fit, std::string("observed information unavailable: ") + e.what());
        }
    }
    if (!fit.converged && !fit.condition_warning) append_warning(fit, "not converged");
    return fit;
}

FitResult fit_liu_fixed_rates(const Eigen::VectorXd &y, const DesignMatrix &x, const ErrorRates &rates) {
    if (y.size() != x.rows()) throw DimensionError("outcome length does not match design rows");
    check_full_rank(x);
    rates.validate();
    const Eigen::MatrixXd &X = x.values;
    const Eigen::Index nb = X.cols();
    const Objective objective = [&](const Eigen::VectorXd &beta) {
        const LogLikelihood ll = liu_loglik(y, X, beta, rates);
        return ObjectiveValue{ll.value, ll.gradient.head(nb)};
    };
    const OptimizeResult opt = maximize(objective, fit_std(y, x).beta_hat);

    FitResult fit;
    fit.model = ModelTag::LIU;
    fit.coefficient_names = x.column_names;
    fit.beta_hat = opt.x;
    fit.loglik = opt.value;
    fit.iterations = opt.iterations;
    fit.converged = opt.converged && max_abs(opt.x) <= kSeparationThreshold;
    fit.error_rates = ErrorRateEstimate{rates, std::nullopt, std::nullopt};
    if (!fit.converged) append_warning(fit, opt.message);

    const GradientFn grad = [&](const Eigen::VectorXd &beta) { return objective(beta).gradient; };
    InformationResult info = observed_information(grad, opt.x);
    fit.rcond = info.rcond;
    if (info.se) {
        fit.beta_se = info.se;
        fit.covariance = info.covariance;
    } else {
        fit.converged = false;
        append_warning(fit, *info.warning);
    }
    return fit;
}

MultiStartResult fit_liu_multistart(const Eigen::VectorXd &y, const DesignMatrix &x, LiuVariant variant,
                                    std::size_t random_restarts, std::uint64_t seed, const LiuOptions &options) {
    const FitResult std_fit = fit_std(y, x);
    const LiuStart base{std_fit.beta_hat, {0.01, 0.01}};
    const Eigen::Index nb = std_fit.beta_hat.size();

    std::vector<LiuStart> starts{base};
    for (std::size_t r = 1; r <= random_restarts; ++r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.001, 0.2);
        LiuStart s = base;
        for (Eigen::Index j = 0; j < nb; ++j) {
            const double scale = std_fit.beta_se ? 3.0 * (*std_fit.beta_se)(j) : 0.5;
            s.beta(j) += scale * gauss(rng);
        }
        s.rates.r0 = unif(rng);
        s.rates.r1 = unif(rng);
        starts.push_back(std::move(s));
    }

    std::vector<std::optional<FitResult>> fits(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) { fits[i] = fit_liu(y, x, variant, starts[i], options); });

    MultiStartResult out;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        out.logliks.push_back(fits[i]->loglik);
        if (fits[i]->loglik > best) {
            best = fits[i]->loglik;
            out.best_index = i;
        }
    }
    out.best = *fits[out.best_index];
    return out;
}

} // namespace misclass
