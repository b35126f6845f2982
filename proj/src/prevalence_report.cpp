#include "misclass/prevalence_report.hpp"

#include "misclass/config.hpp"
#include "misclass/error.hpp"
#include "misclass/parallel.hpp"
#include "misclass/stats_util.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace misclass {

namespace {

constexpr std::array<const char *, 4> kSlotNames{"STD", "Liu", "BC", "BEC"};

struct Interval {
    double lower;
    double upper;
};

Interval percentile_interval(std::vector<double> values, double conf_level) {
    const double tail = 0.5 * (1.0 - conf_level);
    return {quantile(values, tail), quantile(values, 1.0 - tail)};
}

PrevalenceEstimate make_estimate(std::string model, double point, Interval iv, IntervalMethod method) {
    PrevalenceEstimate est;
    est.model = std::move(model);
    est.point = point;
    est.lower = std::min(iv.lower, point);
    est.upper = std::max(iv.upper, point);
    est.interval_method = method;
    est.ci_width = est.upper - est.lower;
    return est;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_converged(const FitResult &fit, const char *what) {
    if (!fit.converged) {
        throw StatisticalError(std::string(what) + " fit did not converge" +
                               (fit.condition_warning ? ": " + *fit.condition_warning : std::string{}));
    }
}

void check_conf(double conf_level) {
    if (!(conf_level > 0.0 && conf_level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
}

// d/d beta of the standardized prevalence.
Eigen::VectorXd prevalence_gradient(const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double pi = logistic(eta(i));
        w(i) = pi * (1.0 - pi);
    }
    return x.transpose() * w / static_cast<double>(x.rows());
}

Interval delta_interval(double point, double se, double conf_level) {
    const double z = normal_quantile(0.5 + 0.5 * conf_level);
    return {clamp01(point - z * se), clamp01(point + z * se)};
}

std::string na_or(const std::optional<double> &v) { return v ? format_roundtrip(*v) : "NA"; }

std::optional<double> parse_optional(const std::string &text) {
    if (text == "NA") return std::nullopt;
    return parse_double_strict(text, "report field");
}

std::vector<std::string> split(const std::string &line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

} // namespace

std::string to_string(IntervalMethod method) {
    switch (method) {
    case IntervalMethod::Delta: return "delta";
    case IntervalMethod::Bootstrap: return "bootstrap";
    case IntervalMethod::PosteriorQuantile: return "posterior-quantile";
    }
    return "?";
}

IntervalMethod parse_interval_method(std::string_view text) {
    const std::string t = to_lower(std::string(text));
    if (t == "delta") return IntervalMethod::Delta;
    if (t == "bootstrap") return IntervalMethod::Bootstrap;
    if (t == "posterior-quantile") return IntervalMethod::PosteriorQuantile;
    throw InputError("unknown interval method '" + std::string(text) + "'");
}

std::optional<double> percent_change(double value, double reference) {
    if (reference == 0.0 || !std::isfinite(reference) || !std::isfinite(value)) return std::nullopt;
    return 100.0 * (value - reference) / std::abs(reference);
}

double standardized_prevalence(const Eigen::MatrixXd &x, const CoefficientVector &beta) {
    if (x.cols() != beta.size()) throw DimensionError("coefficient length does not match design columns");
    if (x.rows() == 0) throw DomainError("empty design matrix");
    const Eigen::VectorXd eta = x * beta;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) sum += logistic(eta(i));
    return sum / static_cast<double>(eta.size());
}

PrevalenceEstimate marginal_prevalence_std(const FitResult &fit, const Eigen::VectorXd &y, const DesignMatrix &x,
                                           const AssayProfile &assay, const PrevalenceOptions &options) {
    require_converged(fit, "STD");
    check_conf(options.conf_level);
    assay.validate();
    const AssayProfile fixed = assay.as_fixed();
    const double p_model = standardized_prevalence(x.values, fit.beta_hat);
    const double point = rogan_gladen(p_model, fixed).p_adj;

    if (options.method == IntervalMethod::Delta) {
        if (!fit.covariance) throw StatisticalError("STD fit has no coefficient covariance");
        const Eigen::VectorXd g = prevalence_gradient(x.values, fit.beta_hat);
        const double var = g.dot(*fit.covariance * g);
        const double se = std::sqrt(std::max(var, 0.0)) / fixed.youden();
        return make_estimate("STD", point, delta_interval(rogan_gladen_raw(p_model, fixed), se, options.conf_level),
                             IntervalMethod::Delta);
    }
    if (options.method != IntervalMethod::Bootstrap) throw DomainError("STD intervals are delta or bootstrap");
    if (options.resamples < 2) throw DomainError("bootstrap needs at least 2 resamples");
    if (y.size() != x.rows()) throw DimensionError("outcome length does not match design rows");

    const Eigen::Index n = x.rows();
    std::vector<double> values(options.resamples, std::numeric_limits<double>::quiet_NaN());
    parallel_for(options.resamples, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(options.seed, b));
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        DesignMatrix xb{Eigen::MatrixXd(n, x.cols()), x.column_names};
        Eigen::VectorXd yb(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index r = pick(rng);
            xb.values.row(i) = x.values.row(r);
            yb(i) = y(r);
        }
        try {
            const FitResult refit = fit_std(yb, xb);
            if (refit.converged) values[b] = rogan_gladen(standardized_prevalence(xb.values, refit.beta_hat), fixed).p_adj;
        } catch (const Error &) {
        }
    });
    std::vector<double> ok;
    for (double v : values)
        if (std::isfinite(v)) ok.push_back(v);
    if (ok.size() < 2) throw StatisticalError("STD bootstrap: fewer than 2 resamples converged");
    PrevalenceEstimate est =
        make_estimate("STD", point, percentile_interval(ok, options.conf_level), IntervalMethod::Bootstrap);
    est.failed_resamples = values.size() - ok.size();
    return est;
}

PrevalenceEstimate marginal_prevalence_liu(const FitResult &fit, const DesignMatrix &x,
                                           const PrevalenceOptions &options) {
    require_converged(fit, "Liu");
    check_conf(options.conf_level);
    if (fit.model != ModelTag::LIU || !fit.error_rates || !fit.liu_variant) {
        throw DomainError("marginal_prevalence_liu needs a Liu fit with error rates");
    }
    const double point = standardized_prevalence(x.values, fit.beta_hat);

    if (options.method == IntervalMethod::Delta) {
        if (!fit.covariance) throw StatisticalError("Liu fit has no covariance (information not positive definite)");
        const Eigen::Index p = fit.beta_hat.size();
        const Eigen::VectorXd g = prevalence_gradient(x.values, fit.beta_hat);
        const double var = g.dot(fit.covariance->topLeftCorner(p, p) * g);
        return make_estimate("Liu", point, delta_interval(point, std::sqrt(std::max(var, 0.0)), options.conf_level),
                             IntervalMethod::Delta);
    }
    if (options.method != IntervalMethod::Bootstrap) throw DomainError("Liu intervals are delta or bootstrap");
    if (options.resamples < 2) throw DomainError("bootstrap needs at least 2 refits");

    const ErrorRates rates = fit.error_rates->rates;
    const Eigen::VectorXd eta = linear_predictor(x.values, fit.beta_hat);
    Eigen::VectorXd prob(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) prob(i) = liu_response_prob(eta(i), rates);
    const LiuStart start{fit.beta_hat, rates};
    LiuOptions liu_opts;
    liu_opts.compute_se = false;

    std::vector<double> values(options.resamples, std::numeric_limits<double>::quiet_NaN());
    parallel_for(options.resamples, [&](std::size_t b) {
        std::mt19937_64 rng(derive_seed(options.seed, b));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::VectorXd yb(prob.size());
        for (Eigen::Index i = 0; i < prob.size(); ++i) yb(i) = unif(rng) < prob(i) ? 1.0 : 0.0;
        try {
            const FitResult refit = fit_liu(yb, x, *fit.liu_variant, start, liu_opts);
            if (refit.converged) values[b] = standardized_prevalence(x.values, refit.beta_hat);
        } catch (const Error &) {
        }
    });
    std::vector<double> ok;
    for (double v : values)
        if (std::isfinite(v)) ok.push_back(v);
    if (ok.size() < 2) throw StatisticalError("Liu parametric bootstrap: fewer than 2 refits converged");
    PrevalenceEstimate est =
        make_estimate("Liu", point, percentile_interval(ok, options.conf_level), IntervalMethod::Bootstrap);
    est.failed_resamples = values.size() - ok.size();
    return est;
}

std::vector<double> prevalence_draws(const PosteriorDraws &draws, const DesignMatrix &x, const AssayProfile &assay,
                                     Correction correction) {
    const Eigen::Index p = x.cols();
    if (draws.dim() < static_cast<std::size_t>(p)) throw DimensionError("draws have fewer columns than the design");
    const AssayProfile fixed = assay.as_fixed();
    if (correction == Correction::External) fixed.validate();
    std::vector<double> out;
    out.reserve(draws.chains() * draws.samples());
    for (const Eigen::MatrixXd &chain : draws.draws) {
        const Eigen::MatrixXd eta = x.values * chain.leftCols(p).transpose(); // n x samples
        for (Eigen::Index s = 0; s < eta.cols(); ++s) {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < eta.rows(); ++i) sum += logistic(eta(i, s));
            double ps = sum / static_cast<double>(eta.rows());
            if (correction == Correction::External) ps = rogan_gladen(ps, fixed).p_adj;
            out.push_back(ps);
        }
    }
    return out;
}

PrevalenceEstimate marginal_prevalence_bayes(const PosteriorDraws &draws, const DesignMatrix &x,
                                             const AssayProfile &assay, Correction correction, double conf_level,
                                             double rhat_threshold) {
    check_conf(conf_level);
    if (draws.chains() == 0 || draws.samples() == 0) throw DomainError("no posterior draws");
    const std::size_t p = static_cast<std::size_t>(x.cols());
    std::ostringstream bad;
    for (std::size_t j = 0; j < p && j < draws.rhat.size(); ++j) {
        const auto &r = draws.rhat[j];
        if (r) {
            if (!(*r < rhat_threshold)) bad << ' ' << draws.param_names[j] << '=' << format_roundtrip(*r);
            continue;
        }
        // Undefined R-hat: acceptable only when the coordinate is constant.
        const double first = draws.draws.front()(0, static_cast<Eigen::Index>(j));
        for (const auto &chain : draws.draws) {
            if ((chain.col(static_cast<Eigen::Index>(j)).array() != first).any()) {
                bad << ' ' << draws.param_names[j] << "=undefined";
                break;
            }
        }
    }
    if (!bad.str().empty()) throw StatisticalError("R-hat >= " + format_roundtrip(rhat_threshold) + ":" + bad.str());

    const std::vector<double> ps = prevalence_draws(draws, x, assay, correction);
    return make_estimate("", mean(ps), percentile_interval(ps, conf_level), IntervalMethod::PosteriorQuantile);
}

std::optional<double> relative_se_change(std::optional<double> se_a, std::optional<double> se_b) {
    if (!se_a || !se_b || *se_b == 0.0) return std::nullopt;
    return *se_a / *se_b - 1.0;
}

const PrevalenceEstimate *ComparisonReport::row(std::string_view model) const {
    for (const auto &r : prevalence)
        if (r.model == model) return &r;
    return nullptr;
}

ComparisonReport build_comparison_report(const std::string &outcome_label, const CrudeEstimate &crude,
                                         const std::array<ModelOutcome, 4> &models) {
    ComparisonReport report;
    report.outcome_label = outcome_label;
    report.n = crude.n;

    PrevalenceEstimate crude_row =
        make_estimate("Crude", crude.p_obs, {crude.lower, crude.upper}, IntervalMethod::Delta);
    report.prevalence.push_back(crude_row);

    const auto &std_prev = models[kSlotSTD].prevalence;
    for (std::size_t k = 0; k < 4; ++k) {
        const ModelOutcome &m = models[k];
        if (!m.prevalence) {
            report.gaps.push_back({kSlotNames[k], m.failure.value_or("prevalence not available")});
            continue;
        }
        PrevalenceEstimate row = *m.prevalence;
        row.model = kSlotNames[k];
        row.ci_width = row.upper - row.lower;
        row.change_vs_crude_pct = percent_change(row.point, crude.p_obs);
        row.change_vs_std_pct = (k != kSlotSTD && std_prev) ? percent_change(row.point, std_prev->point) : std::nullopt;
        report.prevalence.push_back(std::move(row));
    }

    // Coefficient names come from the first available fit.
    std::vector<std::string> names;
    for (const auto &m : models)
        if (m.fit && names.empty()) names = m.fit->coefficient_names;
    for (std::size_t k = 0; k < 4; ++k) {
        if (models[k].fit && models[k].fit->coefficient_names != names) {
            throw DimensionError(std::string(kSlotNames[k]) + " fit has different coefficients from the others");
        }
        if (!models[k].fit && models[k].prevalence) {
            report.gaps.push_back({kSlotNames[k], "coefficients not available"});
        }
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        CoefficientComparison row;
        row.coefficient_name = names[j];
        const auto idx = static_cast<Eigen::Index>(j);
        for (std::size_t k = 0; k < 4; ++k) {
            const auto &fit = models[k].fit;
            if (!fit) continue;
            row.estimate[k] = fit->beta_hat(idx);
            if (fit->beta_se) row.se[k] = (*fit->beta_se)(idx);
        }
        auto change = [](const std::optional<double> &v, const std::optional<double> &ref) -> std::optional<double> {
            if (!v || !ref) return std::nullopt;
            return percent_change(*v, *ref);
        };
        row.liu_change_vs_std_pct = change(row.estimate[kSlotLiu], row.estimate[kSlotSTD]);
        row.bc_change_vs_std_pct = change(row.estimate[kSlotBC], row.estimate[kSlotSTD]);
        row.bec_change_vs_std_pct = change(row.estimate[kSlotBEC], row.estimate[kSlotSTD]);
        row.bec_change_vs_bc_pct = change(row.estimate[kSlotBEC], row.estimate[kSlotBC]);
        row.se_change_liu_vs_bec = relative_se_change(row.se[kSlotLiu], row.se[kSlotBEC]);
        if (row.se_change_liu_vs_bec) {
            const double ratio = *row.se_change_liu_vs_bec + 1.0;
            row.variance_change_liu_vs_bec = ratio * ratio - 1.0;
        }
        report.coefficients.push_back(std::move(row));
    }
    return report;
}

void write_report_csv(std::ostream &out, const ComparisonReport &report) {
    out << "#meta\n";
    out << "outcome," << report.outcome_label << '\n';
    out << "n," << report.n << '\n';
    out << "#prevalence\n";
    out << "model,point,lower,upper,interval_method,change_vs_crude_pct,change_vs_std_pct,ci_width,"
           "failed_resamples\n";
    for (const auto &r : report.prevalence) {
        out << r.model << ',' << format_roundtrip(r.point) << ',' << format_roundtrip(r.lower) << ','
            << format_roundtrip(r.upper) << ',' << to_string(r.interval_method) << ',' << na_or(r.change_vs_crude_pct)
            << ',' << na_or(r.change_vs_std_pct) << ',' << format_roundtrip(r.ci_width) << ',' << r.failed_resamples
            << '\n';
    }
    out << "#coefficients\n";
    out << "coefficient,STD,Liu,BC,BEC,Liu_change_vs_STD_pct,BC_change_vs_STD_pct,BEC_change_vs_STD_pct,"
           "BEC_change_vs_BC_pct\n";
    for (const auto &c : report.coefficients) {
        out << c.coefficient_name;
        for (const auto &e : c.estimate) out << ',' << na_or(e);
        out << ',' << na_or(c.liu_change_vs_std_pct) << ',' << na_or(c.bc_change_vs_std_pct) << ','
            << na_or(c.bec_change_vs_std_pct) << ',' << na_or(c.bec_change_vs_bc_pct) << '\n';
    }
    out << "#standard_errors\n";
    out << "coefficient,SE_STD,SE_Liu,SE_BC,SE_BEC,SE_ratio_Liu_BEC_minus_1,variance_ratio_Liu_BEC_minus_1\n";
    for (const auto &c : report.coefficients) {
        out << c.coefficient_name;
        for (const auto &s : c.se) out << ',' << na_or(s);
        out << ',' << na_or(c.se_change_liu_vs_bec) << ',' << na_or(c.variance_change_liu_vs_bec) << '\n';
    }
    out << "#gaps\n";
    out << "model,reason\n";
    for (const auto &g : report.gaps) {
        std::string reason = g.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        out << g.model << ',' << reason << '\n';
    }
}

ComparisonReport read_report_csv(std::istream &in) {
    ComparisonReport report;
    std::string line, section;
    bool expect_header = false;
    std::size_t line_no = 0;
    auto fail = [&](const std::string &msg) { return ParseError(msg, line_no, section); };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            section = line.substr(1);
            expect_header = section != "meta";
            continue;
        }
        if (expect_header) {
            expect_header = false;
            continue;
        }
        const auto f = split(line, ',');
        try {
            if (section == "meta") {
                if (f.size() != 2) throw fail("meta rows have 2 fields");
                if (f[0] == "outcome") report.outcome_label = f[1];
                else if (f[0] == "n") report.n = static_cast<std::size_t>(parse_int_strict(f[1], "n"));
            } else if (section == "prevalence") {
                if (f.size() != 9) throw fail("prevalence rows have 9 fields");
                PrevalenceEstimate r;
                r.model = f[0];
                r.point = parse_double_strict(f[1], "report field");
                r.lower = parse_double_strict(f[2], "report field");
                r.upper = parse_double_strict(f[3], "report field");
                r.interval_method = parse_interval_method(f[4]);
                r.change_vs_crude_pct = parse_optional(f[5]);
                r.change_vs_std_pct = parse_optional(f[6]);
                r.ci_width = parse_double_strict(f[7], "report field");
                r.failed_resamples = static_cast<std::size_t>(parse_int_strict(f[8], "failed_resamples"));
                report.prevalence.push_back(std::move(r));
            } else if (section == "coefficients") {
                if (f.size() != 9) throw fail("coefficient rows have 9 fields");
                CoefficientComparison c;
                c.coefficient_name = f[0];
                for (std::size_t k = 0; k < 4; ++k) c.estimate[k] = parse_optional(f[1 + k]);
                c.liu_change_vs_std_pct = parse_optional(f[5]);
                c.bc_change_vs_std_pct = parse_optional(f[6]);
                c.bec_change_vs_std_pct = parse_optional(f[7]);
                c.bec_change_vs_bc_pct = parse_optional(f[8]);
                report.coefficients.push_back(std::move(c));
            } else if (section == "standard_errors") {
                if (f.size() != 7) throw fail("standard error rows have 7 fields");
                auto it = std::find_if(report.coefficients.begin(), report.coefficients.end(),
                                       [&](const CoefficientComparison &c) { return c.coefficient_name == f[0]; });
                if (it == report.coefficients.end()) throw fail("standard errors for unknown coefficient " + f[0]);
                for (std::size_t k = 0; k < 4; ++k) it->se[k] = parse_optional(f[1 + k]);
                it->se_change_liu_vs_bec = parse_optional(f[5]);
                it->variance_change_liu_vs_bec = parse_optional(f[6]);
            } else if (section == "gaps") {
                if (f.size() < 2) throw fail("gap rows have 2 fields");
                report.gaps.push_back({f[0], f[1]});
            } else {
                throw fail("unknown report section '" + section + "'");
            }
        } catch (const ParseError &) {
            throw;
        } catch (const InputError &e) {
            throw ParseError(e.what(), line_no, section);
        }
    }
    return report;
}

namespace {

std::string fixed(const std::optional<double> &v, int digits) {
    if (!v) return "--";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << *v;
    return ss.str();
}

} // namespace

void write_report_text(std::ostream &out, const ComparisonReport &report) {
    out << "Adjusted prevalence: " << report.outcome_label << " (n = " << report.n << ")\n";
    out << std::left << std::setw(7) << "Model" << std::right << std::setw(10) << "Adj. P" << std::setw(10)
        << "Lower" << std::setw(10) << "Upper" << std::setw(14) << "vs Crude %" << std::setw(12) << "vs STD %"
        << std::setw(10) << "CI width" << "  Interval\n";
    auto print_row = [&](const PrevalenceEstimate &r) {
        out << std::left << std::setw(7) << r.model << std::right << std::setw(10) << fixed(r.point, 4)
            << std::setw(10) << fixed(r.lower, 4) << std::setw(10) << fixed(r.upper, 4) << std::setw(14)
            << fixed(r.change_vs_crude_pct, 2) << std::setw(12) << fixed(r.change_vs_std_pct, 2) << std::setw(10)
            << fixed(r.ci_width, 4) << "  " << to_string(r.interval_method) << '\n';
    };
    for (const char *name : {"Crude", "STD", "Liu", "BC", "BEC"}) {
        if (const PrevalenceEstimate *r = report.row(name)) {
            print_row(*r);
        } else {
            out << std::left << std::setw(7) << name << std::right << "  (not available)\n";
        }
    }

    out << "\nCoefficients\n";
    out << std::left << std::setw(14) << "Coefficient" << std::right << std::setw(10) << "STD" << std::setw(10)
        << "Liu" << std::setw(13) << "Liu chg %" << std::setw(10) << "BC" << std::setw(10) << "BEC"
        << std::setw(13) << "BEC chg %" << std::setw(16) << "BEC vs BC %" << '\n';
    for (const auto &c : report.coefficients) {
        out << std::left << std::setw(14) << c.coefficient_name << std::right << std::setw(10)
            << fixed(c.estimate[kSlotSTD], 3) << std::setw(10) << fixed(c.estimate[kSlotLiu], 3) << std::setw(13)
            << fixed(c.liu_change_vs_std_pct, 2) << std::setw(10) << fixed(c.estimate[kSlotBC], 3) << std::setw(10)
            << fixed(c.estimate[kSlotBEC], 3) << std::setw(13) << fixed(c.bec_change_vs_std_pct, 2)
            << std::setw(16) << fixed(c.bec_change_vs_bc_pct, 2) << '\n';
    }

    out << "\nStandard errors\n";
    out << std::left << std::setw(14) << "Coefficient" << std::right << std::setw(10) << "SE STD" << std::setw(10)
        << "SE Liu" << std::setw(10) << "SE BC" << std::setw(10) << "SE BEC" << std::setw(18) << "Liu/BEC - 1"
        << std::setw(20) << "(Liu/BEC)^2 - 1" << '\n';
    for (const auto &c : report.coefficients) {
        out << std::left << std::setw(14) << c.coefficient_name << std::right;
        for (const auto &s : c.se) out << std::setw(10) << fixed(s, 3);
        out << std::setw(18) << fixed(c.se_change_liu_vs_bec, 3) << std::setw(20)
            << fixed(c.variance_change_liu_vs_bec, 3) << '\n';
    }

    if (!report.gaps.empty()) {
        out << "\nGaps\n";
        for (const auto &g : report.gaps) out << "  " << g.model << ": " << g.reason << '\n';
    }
}

void write_fit_csv(std::ostream &out, const FitResult &fit) {
    out << "#fit\n";
    out << "model," << to_string(fit.model) << '\n';
    if (fit.liu_variant) out << "liu_variant," << to_string(*fit.liu_variant) << '\n';
    out << "converged," << (fit.converged ? "true" : "false") << '\n';
    out << "iterations," << fit.iterations << '\n';
    out << "loglik," << format_roundtrip(fit.loglik) << '\n';
    if (fit.rcond) out << "rcond," << format_roundtrip(*fit.rcond) << '\n';
    if (fit.condition_warning) {
        std::string w = *fit.condition_warning;
        std::replace(w.begin(), w.end(), ',', ';');
        out << "warning," << w << '\n';
    }
    out << "#coefficients\n";
    out << "coefficient,estimate,se\n";
    for (std::size_t j = 0; j < fit.coefficient_names.size(); ++j) {
        const auto idx = static_cast<Eigen::Index>(j);
        out << fit.coefficient_names[j] << ',' << format_roundtrip(fit.beta_hat(idx)) << ','
            << (fit.beta_se ? format_roundtrip((*fit.beta_se)(idx)) : "NA") << '\n';
    }
    if (fit.error_rates) {
        out << "#error_rates\n";
        out << "rate,estimate,se\n";
        out << "r0," << format_roundtrip(fit.error_rates->rates.r0) << ',' << na_or(fit.error_rates->r0_se) << '\n';
        out << "r1," << format_roundtrip(fit.error_rates->rates.r1) << ',' << na_or(fit.error_rates->r1_se) << '\n';
    }
}

void write_fit_text(std::ostream &out, const FitResult &fit) {
    out << "Model: " << to_string(fit.model);
    if (fit.liu_variant) out << " (" << to_string(*fit.liu_variant) << ")";
    out << "\nConverged: " << (fit.converged ? "yes" : "no") << "   iterations: " << fit.iterations
        << "   log-likelihood: " << fixed(fit.loglik, 4) << '\n';
    if (fit.condition_warning) out << "Warning: " << *fit.condition_warning << '\n';
    out << std::left << std::setw(14) << "Coefficient" << std::right << std::setw(12) << "Estimate"
        << std::setw(12) << "SE" << '\n';
    for (std::size_t j = 0; j < fit.coefficient_names.size(); ++j) {
        const auto idx = static_cast<Eigen::Index>(j);
        out << std::left << std::setw(14) << fit.coefficient_names[j] << std::right << std::setw(12)
            << fixed(fit.beta_hat(idx), 4) << std::setw(12)
            << fixed(fit.beta_se ? std::optional<double>((*fit.beta_se)(idx)) : std::nullopt, 4) << '\n';
    }
    if (fit.error_rates) {
        out << "r0 (false positive) " << fixed(fit.error_rates->rates.r0, 5) << "  SE "
            << fixed(fit.error_rates->r0_se, 5) << '\n';
        out << "r1 (false negative) " << fixed(fit.error_rates->rates.r1, 5) << "  SE "
            << fixed(fit.error_rates->r1_se, 5) << '\n';
    }
}

} // namespace misclass
