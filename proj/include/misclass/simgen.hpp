#pragma once

// Synthetic cohorts with known truth: covariates are drawn first, the true
// status from the logistic model, and the observed result through a fixed
// non-differential Se/Sp channel.

#include "misclass/config.hpp"
#include "misclass/data_model.hpp"
#include "misclass/freq_fit.hpp"
#include "misclass/logit_core.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/prevalence_report.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace misclass {

// Normal distribution truncated to [lo, hi], parameterised by the
// underlying (untruncated) mu and sigma.
struct TruncatedNormal {
    double mu = 0.0;
    double sigma = 1.0;
    double lo = 0.0;
    double hi = 1.0;

    double mean() const;
    double sd() const;
    // Inverse-CDF draw from a uniform u in (0, 1).
    double quantile(double u) const;
};

// Finds mu, sigma whose truncation to [lo, hi] has the requested mean and sd.
TruncatedNormal solve_truncated_normal(double mean, double sd, double lo, double hi);

struct CovariateSpec {
    // Moments of the truncated age distribution itself.
    double age_mean = 34.0;
    double age_sd = 14.0;
    double age_min = 15.0;
    double age_max = 80.0;
    double male_prob = 0.50;
    // GeneralPopulation, MSM, LGTBI, OtherPopulations, SexWorker.
    std::array<double, 5> group_probs{6574.0 / 11452.0, 3248.0 / 11452.0, 224.0 / 11452.0, 193.0 / 11452.0,
                                      1213.0 / 11452.0};
    // Co-test reactivity rates; their association with the true status is
    // carried by the corresponding coefficients in beta_true.
    double other_sti_rate = 905.0 / 11452.0;
    double hepb_rate = 8.0 / 11452.0;
};

// log(5): default co-test log odds ratio on the true status.
inline const double kDefaultCotestLogOdds = std::log(5.0);

// Coefficients of the bundled HIV demo cohort (all eight covariates).
CoefficientVector demo_beta();

struct SimScenario {
    std::size_t n = 11452;
    std::vector<Covariate> covariates{kAllCovariates.begin(), kAllCovariates.end()};
    CoefficientVector beta_true = demo_beta(); // intercept, then one entry per covariate
    AssayProfile assay_true = hiv_assay();
    CovariateSpec covariate_spec{};
    std::string outcome_label = "HIV";
    std::uint64_t seed = 1;
    // Redraw (seed streams 1, 2, ...) until every binary covariate level
    // holds both observed outcomes, so the ML estimates exist.
    bool require_overlap = false;

    void validate() const;

    // Keys: n, seed, outcome, covariates, beta, se, sp, age_mean, age_sd,
    // age_min, age_max, male_prob, group_probs, other_sti_rate, hepb_rate,
    // require_overlap, target_prevalence (recalibrates the intercept).
    static SimScenario from_config(const KeyValueConfig &config);
    static SimScenario load(const std::string &path);
};

struct SimTruth {
    std::vector<int> true_status;
    std::vector<double> true_prob;
};

struct SimOutput {
    Cohort cohort;
    SimTruth truth;
    std::size_t attempts = 1;
};

// True when every 0/1 design column has observed positives and negatives
// among its rows equal to 1.
bool has_outcome_overlap(const DesignMatrix &x, const Eigen::VectorXd &y);

SimOutput simulate(const SimScenario &scenario);

// Fraction of subjects whose true status is 1.
double brute_force_prevalence(const SimTruth &truth);

// Intercept giving an expected true prevalence of `target` over a large
// covariate sample drawn from the scenario (bisection).
double calibrate_intercept(const SimScenario &scenario, double target, std::size_t sample_size = 200000);

enum class EstimatorKind { Observed, STD, LIU, BC, BEC };
std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(std::string_view text);

struct StudyOptions {
    std::vector<EstimatorKind> estimators{EstimatorKind::STD, EstimatorKind::LIU, EstimatorKind::BC,
                                          EstimatorKind::BEC};
    // STD and Liu intervals.
    IntervalMethod frequentist_interval = IntervalMethod::Delta;
    std::size_t bootstrap_resamples = 200;
    LiuVariant liu_variant = LiuVariant::BothErrorsFree;
    SamplerConfig sampler{};
    // Assay assumed by the analysis; defaults to the scenario's true assay.
    std::optional<AssayProfile> analysis_assay;
    double conf_level = 0.95;
};

struct ReplicateRecord {
    bool ok = false;
    double truth = 0.0;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::optional<ErrorRates> error_rates; // Liu only
    std::string failure;
};

struct EstimatorSummary {
    EstimatorKind kind = EstimatorKind::STD;
    std::size_t reps = 0;
    std::size_t failures = 0;
    double mean_bias = 0.0;
    double coverage = 0.0;
    double mean_width = 0.0;
    double failure_rate = 0.0;
    // Liu only: mean (estimate - true) of r0 and r1 over successful fits.
    std::optional<double> r0_bias;
    std::optional<double> r1_bias;
    std::vector<ReplicateRecord> records;
};

struct StudyResult {
    std::vector<EstimatorSummary> summaries;
    std::vector<double> truths;
};

StudyResult replicate_study(const SimScenario &scenario, const StudyOptions &options, std::size_t reps);

void write_study_csv(std::ostream &out, const StudyResult &result);
void write_study_text(std::ostream &out, const StudyResult &result);

} // namespace misclass
