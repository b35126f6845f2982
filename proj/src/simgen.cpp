#include "misclass/simgen.hpp"

#include "misclass/bayes_models.hpp"
#include "misclass/error.hpp"
#include "misclass/parallel.hpp"
#include "misclass/rogan_gladen.hpp"
#include "misclass/stats_util.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>

namespace misclass {

namespace {

const boost::math::normal_distribution<double> kStdNormal{};

double phi(double z) { return boost::math::pdf(kStdNormal, z); }
double Phi(double z) { return boost::math::cdf(kStdNormal, z); }

struct Draws {
    std::vector<SubjectRecord> records;
    Eigen::MatrixXd x;
};

// Covariates only; outcomes are filled in by the caller.
Draws draw_covariates(const SimScenario &sc, std::size_t n, std::mt19937_64 &rng) {
    const TruncatedNormal age = solve_truncated_normal(sc.covariate_spec.age_mean, sc.covariate_spec.age_sd,
                                                       sc.covariate_spec.age_min, sc.covariate_spec.age_max);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::discrete_distribution<int> group(sc.covariate_spec.group_probs.begin(), sc.covariate_spec.group_probs.end());
    Draws d;
    d.records.resize(n);
    for (auto &r : d.records) {
        r.age = age.quantile(unif(rng));
        r.sex = unif(rng) < sc.covariate_spec.male_prob ? 1 : 0;
        r.other_sti_result = unif(rng) < sc.covariate_spec.other_sti_rate ? 1 : 0;
        r.hepb_result = unif(rng) < sc.covariate_spec.hepb_rate ? 1 : 0;
        r.population_group = static_cast<PopulationGroup>(group(rng));
    }
    const Cohort tmp(d.records, sc.outcome_label);
    d.x = build_design_matrix(tmp, sc.covariates).values;
    return d;
}

double mean_logistic(const Eigen::VectorXd &eta, double shift) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) sum += logistic(eta(i) + shift);
    return sum / static_cast<double>(eta.size());
}

} // namespace

double TruncatedNormal::mean() const {
    const double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
    const double z = Phi(b) - Phi(a);
    return mu + sigma * (phi(a) - phi(b)) / z;
}

double TruncatedNormal::sd() const {
    const double a = (lo - mu) / sigma, b = (hi - mu) / sigma;
    const double z = Phi(b) - Phi(a);
    const double m = (phi(a) - phi(b)) / z;
    return sigma * std::sqrt(1.0 + (a * phi(a) - b * phi(b)) / z - m * m);
}

double TruncatedNormal::quantile(double u) const {
    const double fa = Phi((lo - mu) / sigma), fb = Phi((hi - mu) / sigma);
    const double p = std::clamp(fa + u * (fb - fa), 1e-300, 1.0 - 1e-16);
    return std::clamp(mu + sigma * boost::math::quantile(kStdNormal, p), lo, hi);
}

TruncatedNormal solve_truncated_normal(double mean, double sd, double lo, double hi) {
    if (!(lo < hi) || !(mean > lo && mean < hi) || !(sd > 0.0)) {
        throw DomainError("truncated normal needs lo < mean < hi and sd > 0");
    }
    if (sd >= (hi - lo) / std::sqrt(12.0)) throw DomainError("sd too large for the truncation interval");
    // Newton on (mu, log sigma) with a finite-difference Jacobian.
    Eigen::Vector2d t(mean, std::log(sd));
    auto residual = [&](const Eigen::Vector2d &v) {
        const TruncatedNormal tn{v(0), std::exp(v(1)), lo, hi};
        return Eigen::Vector2d(tn.mean() - mean, tn.sd() - sd);
    };
    for (int it = 0; it < 200; ++it) {
        const Eigen::Vector2d r = residual(t);
        if (r.norm() < 1e-12) break;
        Eigen::Matrix2d j;
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d h = Eigen::Vector2d::Zero();
            h(k) = 1e-6;
            j.col(k) = (residual(t + h) - residual(t - h)) / 2e-6;
        }
        Eigen::Vector2d step = j.colPivHouseholderQr().solve(r);
        double scale = 1.0;
        while (scale > 1e-6) {
            const Eigen::Vector2d cand = t - scale * step;
            const Eigen::Vector2d rc = residual(cand);
            if (rc.allFinite() && rc.norm() < r.norm()) {
                t = cand;
                break;
            }
            scale *= 0.5;
        }
        if (scale <= 1e-6) break;
    }
    TruncatedNormal out{t(0), std::exp(t(1)), lo, hi};
    if (std::abs(out.mean() - mean) > 1e-8 || std::abs(out.sd() - sd) > 1e-8) {
        throw DomainError("could not match the truncated normal moments");
    }
    return out;
}

CoefficientVector demo_beta() {
    CoefficientVector b(9);
    b << -4.717, -0.015, 0.512, 1.892, 0.454, 0.717, 0.513, 0.319, -0.138;
    return b;
}

void SimScenario::validate() const {
    if (n < 1) throw DomainError("scenario n must be at least 1");
    if (beta_true.size() != static_cast<Eigen::Index>(covariates.size()) + 1) {
        throw DimensionError("beta_true needs an intercept plus one coefficient per covariate");
    }
    if (!beta_true.allFinite()) throw DomainError("beta_true must be finite");
    if (assay_true.mode != AssayMode::Fixed) throw DomainError("the true assay of a scenario must be fixed");
    assay_true.validate();
    const auto &g = covariate_spec.group_probs;
    for (double p : g)
        if (!(p >= 0.0)) throw DomainError("group probabilities must be non-negative");
    if (std::abs(std::accumulate(g.begin(), g.end(), 0.0) - 1.0) > 1e-12) {
        throw DomainError("group probabilities must sum to 1");
    }
    for (double p : {covariate_spec.male_prob, covariate_spec.other_sti_rate, covariate_spec.hepb_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("covariate rates must lie in [0, 1]");
    }
    solve_truncated_normal(covariate_spec.age_mean, covariate_spec.age_sd, covariate_spec.age_min,
                           covariate_spec.age_max);
}

SimScenario SimScenario::from_config(const KeyValueConfig &cfg) {
    static const std::vector<std::string> known{
        "n",       "seed",      "outcome",   "covariates", "beta",           "se",        "sp",
        "age_mean", "age_sd",   "age_min",   "age_max",    "male_prob",      "group_probs", "other_sti_rate",
        "hepb_rate", "target_prevalence", "require_overlap"};
    for (const auto &[key, value] : cfg.entries()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw SchemaError("unknown scenario key '" + key + "'");
        }
    }
    SimScenario sc;
    if (auto v = cfg.get_int("n")) {
        if (*v < 1) throw SchemaError("scenario n must be at least 1");
        sc.n = static_cast<std::size_t>(*v);
    }
    if (auto v = cfg.get_int("seed")) sc.seed = static_cast<std::uint64_t>(*v);
    if (auto v = cfg.get("outcome")) sc.outcome_label = *v;
    if (auto v = cfg.get_list("covariates")) {
        sc.covariates.clear();
        for (const auto &name : *v) sc.covariates.push_back(parse_covariate(name));
    }
    if (auto v = cfg.get_double_list("beta")) {
        sc.beta_true = Eigen::Map<const Eigen::VectorXd>(v->data(), static_cast<Eigen::Index>(v->size()));
    } else if (sc.covariates.size() != kAllCovariates.size()) {
        throw SchemaError("scenario with a covariate subset needs an explicit beta");
    }
    const auto known_assay = default_assay_for(sc.outcome_label);
    double se = known_assay ? known_assay->sensitivity : 1.0;
    double sp = known_assay ? known_assay->specificity : 1.0;
    if (auto v = cfg.get_double("se")) se = *v;
    if (auto v = cfg.get_double("sp")) sp = *v;
    sc.assay_true = AssayProfile::fixed(se, sp);

    CovariateSpec &cs = sc.covariate_spec;
    if (auto v = cfg.get_double("age_mean")) cs.age_mean = *v;
    if (auto v = cfg.get_double("age_sd")) cs.age_sd = *v;
    if (auto v = cfg.get_double("age_min")) cs.age_min = *v;
    if (auto v = cfg.get_double("age_max")) cs.age_max = *v;
    if (auto v = cfg.get_double("male_prob")) cs.male_prob = *v;
    if (auto v = cfg.get_double("other_sti_rate")) cs.other_sti_rate = *v;
    if (auto v = cfg.get_double("hepb_rate")) cs.hepb_rate = *v;
    if (auto v = cfg.get("require_overlap")) {
        const std::string t = to_lower(*v);
        if (t != "true" && t != "false") throw SchemaError("require_overlap must be true or false");
        sc.require_overlap = t == "true";
    }
    if (auto v = cfg.get_double_list("group_probs")) {
        if (v->size() != 5) throw SchemaError("group_probs needs 5 values");
        std::copy(v->begin(), v->end(), cs.group_probs.begin());
    }
    try {
        sc.validate();
        if (auto v = cfg.get_double("target_prevalence")) sc.beta_true(0) = calibrate_intercept(sc, *v);
    } catch (const InputError &) {
        throw;
    } catch (const Error &e) {
        throw SchemaError(std::string("invalid scenario: ") + e.what());
    }
    return sc;
}

SimScenario SimScenario::load(const std::string &path) { return from_config(KeyValueConfig::load(path)); }

namespace {

SimOutput simulate_once(const SimScenario &sc, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Draws d = draw_covariates(sc, sc.n, rng);
    const Eigen::VectorXd eta = d.x * sc.beta_true;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SimTruth truth;
    truth.true_status.resize(sc.n);
    truth.true_prob.resize(sc.n);
    const double se = sc.assay_true.sensitivity, sp = sc.assay_true.specificity;
    for (std::size_t i = 0; i < sc.n; ++i) {
        const double pi = logistic(eta(static_cast<Eigen::Index>(i)));
        const int t = unif(rng) < pi ? 1 : 0;
        const double p_pos = t == 1 ? se : 1.0 - sp;
        truth.true_prob[i] = pi;
        truth.true_status[i] = t;
        d.records[i].observed_outcome = unif(rng) < p_pos ? 1 : 0;
    }
    return {Cohort(std::move(d.records), sc.outcome_label), std::move(truth)};
}

constexpr std::size_t kMaxOverlapAttempts = 1000;

} // namespace

bool has_outcome_overlap(const DesignMatrix &x, const Eigen::VectorXd &y) {
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
        const auto col = x.values.col(j);
        if (!(col.array() == 0.0 || col.array() == 1.0).all()) continue;
        bool pos = false, neg = false;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (col(i) != 1.0) continue;
            (y(i) == 1.0 ? pos : neg) = true;
        }
        if (!pos || !neg) return false;
    }
    return true;
}

SimOutput simulate(const SimScenario &sc) {
    sc.validate();
    for (std::size_t attempt = 0; attempt < kMaxOverlapAttempts; ++attempt) {
        SimOutput out = simulate_once(sc, attempt == 0 ? sc.seed : derive_seed(sc.seed, attempt));
        out.attempts = attempt + 1;
        if (!sc.require_overlap) return out;
        const DesignMatrix x = build_design_matrix(out.cohort, sc.covariates);
        if (has_outcome_overlap(x, outcome_vector(out.cohort))) return out;
    }
    throw StatisticalError("no simulated cohort with outcome overlap in every binary covariate level");
}

double brute_force_prevalence(const SimTruth &truth) {
    if (truth.true_status.empty()) throw DomainError("empty truth record");
    const auto pos = std::count(truth.true_status.begin(), truth.true_status.end(), 1);
    return static_cast<double>(pos) / static_cast<double>(truth.true_status.size());
}

double calibrate_intercept(const SimScenario &scenario, double target, std::size_t sample_size) {
    if (!(target > 0.0 && target < 1.0)) throw DomainError("target prevalence must lie in (0, 1)");
    std::mt19937_64 rng(derive_seed(scenario.seed, 0xca11b7a7eULL));
    const Draws d = draw_covariates(scenario, sample_size, rng);
    CoefficientVector b = scenario.beta_true;
    b(0) = 0.0;
    const Eigen::VectorXd eta = d.x * b;
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_logistic(eta, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
    case EstimatorKind::Observed: return "Observed";
    case EstimatorKind::STD: return "STD";
    case EstimatorKind::LIU: return "Liu";
    case EstimatorKind::BC: return "BC";
    case EstimatorKind::BEC: return "BEC";
    }
    return "?";
}

EstimatorKind parse_estimator_kind(std::string_view text) {
    const std::string t = to_lower(std::string(text));
    if (t == "observed" || t == "crude") return EstimatorKind::Observed;
    if (t == "std") return EstimatorKind::STD;
    if (t == "liu") return EstimatorKind::LIU;
    if (t == "bc") return EstimatorKind::BC;
    if (t == "bec") return EstimatorKind::BEC;
    throw InputError("unknown estimator '" + std::string(text) + "'");
}

namespace {

ReplicateRecord run_estimator(EstimatorKind kind, const Cohort &cohort, const DesignMatrix &x,
                              const Eigen::VectorXd &y, const AssayProfile &assay, const StudyOptions &opt,
                              std::uint64_t seed) {
    ReplicateRecord rec;
    PrevalenceOptions popt;
    popt.method = opt.frequentist_interval;
    popt.resamples = opt.bootstrap_resamples;
    popt.conf_level = opt.conf_level;
    popt.seed = seed;
    PrevalenceEstimate est;
    switch (kind) {
    case EstimatorKind::Observed: {
        const CrudeEstimate c = observed_proportion_interval(cohort.positives(), cohort.size(), opt.conf_level);
        est.point = c.p_obs;
        est.lower = c.lower;
        est.upper = c.upper;
        break;
    }
    case EstimatorKind::STD: {
        const FitResult fit = fit_std(y, x);
        if (!fit.converged) throw StatisticalError(fit.condition_warning.value_or("STD fit did not converge"));
        est = marginal_prevalence_std(fit, y, x, assay, popt);
        break;
    }
    case EstimatorKind::LIU: {
        const FitResult fit = fit_liu(y, x, opt.liu_variant);
        if (!fit.converged) throw StatisticalError(fit.condition_warning.value_or("Liu fit did not converge"));
        est = marginal_prevalence_liu(fit, x, popt);
        rec.error_rates = fit.error_rates->rates;
        break;
    }
    case EstimatorKind::BC:
    case EstimatorKind::BEC: {
        SamplerConfig cfg = opt.sampler;
        cfg.seed = seed;
        const BayesFit bf = kind == EstimatorKind::BC ? fit_bc(y, x, cfg) : fit_bec(y, x, assay, cfg);
        est = marginal_prevalence_bayes(bf.draws, x, assay,
                                        kind == EstimatorKind::BC ? Correction::External : Correction::None,
                                        opt.conf_level);
        break;
    }
    }
    rec.ok = true;
    rec.estimate = est.point;
    rec.lower = est.lower;
    rec.upper = est.upper;
    return rec;
}

} // namespace

StudyResult replicate_study(const SimScenario &scenario, const StudyOptions &options, std::size_t reps) {
    if (reps < 2) throw DomainError("replicate_study needs at least 2 replicates");
    if (options.estimators.empty()) throw DomainError("no estimators selected");
    scenario.validate();
    const AssayProfile assay = options.analysis_assay.value_or(scenario.assay_true);
    const std::size_t k_est = options.estimators.size();

    std::vector<std::vector<ReplicateRecord>> grid(reps, std::vector<ReplicateRecord>(k_est));
    std::vector<double> truths(reps, 0.0);
    parallel_for(reps, [&](std::size_t r) {
        SimScenario sc = scenario;
        sc.seed = derive_seed(scenario.seed, r);
        const SimOutput sim = simulate(sc);
        const double truth = brute_force_prevalence(sim.truth);
        truths[r] = truth;
        const DesignMatrix x = build_design_matrix(sim.cohort, sc.covariates);
        const Eigen::VectorXd y = outcome_vector(sim.cohort);
        for (std::size_t k = 0; k < k_est; ++k) {
            ReplicateRecord rec;
            try {
                rec = run_estimator(options.estimators[k], sim.cohort, x, y, assay, options,
                                    derive_seed(sc.seed, k + 1));
            } catch (const std::exception &e) {
                rec.ok = false;
                rec.failure = e.what();
            }
            rec.truth = truth;
            grid[r][k] = std::move(rec);
        }
    });

    StudyResult result;
    result.truths = truths;
    const ErrorRates true_rates = ErrorRates::from_assay(scenario.assay_true);
    for (std::size_t k = 0; k < k_est; ++k) {
        EstimatorSummary s;
        s.kind = options.estimators[k];
        s.reps = reps;
        double bias = 0.0, width = 0.0, r0 = 0.0, r1 = 0.0;
        std::size_t covered = 0, ok = 0, with_rates = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const ReplicateRecord &rec = grid[r][k];
            s.records.push_back(rec);
            if (!rec.ok) {
                ++s.failures;
                continue;
            }
            ++ok;
            bias += rec.estimate - rec.truth;
            width += rec.upper - rec.lower;
            if (rec.lower <= rec.truth && rec.truth <= rec.upper) ++covered;
            if (rec.error_rates) {
                ++with_rates;
                r0 += rec.error_rates->r0 - true_rates.r0;
                r1 += rec.error_rates->r1 - true_rates.r1;
            }
        }
        s.failure_rate = static_cast<double>(s.failures) / static_cast<double>(reps);
        if (ok > 0) {
            s.mean_bias = bias / static_cast<double>(ok);
            s.mean_width = width / static_cast<double>(ok);
            s.coverage = static_cast<double>(covered) / static_cast<double>(ok);
        } else {
            s.mean_bias = s.mean_width = s.coverage = std::numeric_limits<double>::quiet_NaN();
        }
        if (with_rates > 0) {
            s.r0_bias = r0 / static_cast<double>(with_rates);
            s.r1_bias = r1 / static_cast<double>(with_rates);
        }
        result.summaries.push_back(std::move(s));
    }
    return result;
}

void write_study_csv(std::ostream &out, const StudyResult &result) {
    out << "estimator,reps,failures,failure_rate,mean_bias,coverage,mean_width,r0_bias,r1_bias\n";
    auto fmt = [](double v) { return std::isfinite(v) ? format_roundtrip(v) : std::string("NA"); };
    for (const auto &s : result.summaries) {
        out << to_string(s.kind) << ',' << s.reps << ',' << s.failures << ',' << fmt(s.failure_rate) << ','
            << fmt(s.mean_bias) << ',' << fmt(s.coverage) << ',' << fmt(s.mean_width) << ','
            << (s.r0_bias ? fmt(*s.r0_bias) : "NA") << ',' << (s.r1_bias ? fmt(*s.r1_bias) : "NA") << '\n';
    }
}

void write_study_text(std::ostream &out, const StudyResult &result) {
    const double truth = result.truths.empty() ? 0.0 : mean(result.truths);
    out << "Replicates: " << result.truths.size() << "   mean true prevalence: " << std::fixed
        << std::setprecision(5) << truth << '\n';
    out << std::left << std::setw(10) << "Estimator" << std::right << std::setw(8) << "Reps" << std::setw(10)
        << "Failures" << std::setw(12) << "Fail rate" << std::setw(12) << "Mean bias" << std::setw(10)
        << "Coverage" << std::setw(12) << "Mean width" << '\n';
    for (const auto &s : result.summaries) {
        out << std::left << std::setw(10) << to_string(s.kind) << std::right << std::setw(8) << s.reps
            << std::setw(10) << s.failures << std::setw(12) << std::setprecision(3) << s.failure_rate
            << std::setw(12) << std::setprecision(5) << s.mean_bias << std::setw(10) << std::setprecision(3)
            << s.coverage << std::setw(12) << std::setprecision(5) << s.mean_width << '\n';
    }
    out.unsetf(std::ios::floatfield);
}

} // namespace misclass
