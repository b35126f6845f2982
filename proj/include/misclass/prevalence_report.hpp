#pragma once

// Adjusted prevalence by marginal standardization (mean fitted probability
// over the analysis cohort) and the model comparison report.

#include "misclass/bayes_models.hpp"
#include "misclass/data_model.hpp"
#include "misclass/freq_fit.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/rogan_gladen.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace misclass {

enum class IntervalMethod { Delta, Bootstrap, PosteriorQuantile };
enum class Correction { External, None };

std::string to_string(IntervalMethod method);
IntervalMethod parse_interval_method(std::string_view text);

struct PrevalenceEstimate {
    std::string model; // "Crude", "STD", "Liu", "BC", "BEC"
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    IntervalMethod interval_method = IntervalMethod::Delta;
    std::optional<double> change_vs_crude_pct;
    std::optional<double> change_vs_std_pct;
    double ci_width = 0.0;
    // Bootstrap resamples or refits that failed and were left out.
    std::size_t failed_resamples = 0;

    bool operator==(const PrevalenceEstimate &) const = default;
};

// 100 (value - reference) / |reference|; absent when reference is 0.
std::optional<double> percent_change(double value, double reference);

// Mean of logistic(x_i' beta) over the rows of x.
double standardized_prevalence(const Eigen::MatrixXd &x, const CoefficientVector &beta);

struct PrevalenceOptions {
    IntervalMethod method = IntervalMethod::Bootstrap;
    std::size_t resamples = 1000;
    double conf_level = 0.95;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultStdResamples = 1000;
inline constexpr std::size_t kDefaultLiuRefits = 500;

// Rogan-Gladen applied to the standardized prevalence. Bootstrap resamples
// rows and refits; Delta uses the coefficient covariance.
PrevalenceEstimate marginal_prevalence_std(const FitResult &fit, const Eigen::VectorXd &y, const DesignMatrix &x,
                                           const AssayProfile &assay, const PrevalenceOptions &options = {});

// Standardized prevalence from the Liu coefficients (already on the true
// status scale). Bootstrap is parametric: outcomes are redrawn from the
// fitted (beta, r0, r1) model and refitted.
PrevalenceEstimate marginal_prevalence_liu(const FitResult &fit, const DesignMatrix &x,
                                           const PrevalenceOptions &options = {.resamples = kDefaultLiuRefits});

// Per-draw standardized prevalence, corrected per draw when External, then
// averaged; interval from posterior quantiles. Coefficient columns are the
// first x.cols() columns of the draws.
PrevalenceEstimate marginal_prevalence_bayes(const PosteriorDraws &draws, const DesignMatrix &x,
                                             const AssayProfile &assay, Correction correction,
                                             double conf_level = 0.95, double rhat_threshold = 1.05);

// Per-draw prevalence values before averaging (exposed for checks).
std::vector<double> prevalence_draws(const PosteriorDraws &draws, const DesignMatrix &x, const AssayProfile &assay,
                                     Correction correction);

enum ModelSlot : std::size_t { kSlotSTD = 0, kSlotLiu = 1, kSlotBC = 2, kSlotBEC = 3 };
inline constexpr std::array<ModelTag, 4> kReportModels{ModelTag::STD, ModelTag::LIU, ModelTag::BC, ModelTag::BEC};

struct ModelOutcome {
    std::optional<FitResult> fit;
    std::optional<PrevalenceEstimate> prevalence;
    std::optional<std::string> failure; // why the fit or prevalence is missing
};

struct CoefficientComparison {
    std::string coefficient_name;
    std::array<std::optional<double>, 4> estimate; // STD, Liu, BC, BEC
    std::optional<double> liu_change_vs_std_pct;
    std::optional<double> bc_change_vs_std_pct;
    std::optional<double> bec_change_vs_std_pct;
    std::optional<double> bec_change_vs_bc_pct;
    std::array<std::optional<double>, 4> se;
    // SE_Liu / SE_BEC - 1 and (SE_Liu / SE_BEC)^2 - 1.
    std::optional<double> se_change_liu_vs_bec;
    std::optional<double> variance_change_liu_vs_bec;

    bool operator==(const CoefficientComparison &) const = default;
};

struct ReportGap {
    std::string model;
    std::string reason;
    bool operator==(const ReportGap &) const = default;
};

struct ComparisonReport {
    std::string outcome_label;
    std::size_t n = 0;
    std::vector<PrevalenceEstimate> prevalence; // available rows in Crude, STD, Liu, BC, BEC order
    std::vector<CoefficientComparison> coefficients;
    std::vector<ReportGap> gaps;

    const PrevalenceEstimate *row(std::string_view model) const;
};

// Relative SE change SE_a / SE_b - 1.
std::optional<double> relative_se_change(std::optional<double> se_a, std::optional<double> se_b);

// The crude row is the observed proportion with its Wald interval.
ComparisonReport build_comparison_report(const std::string &outcome_label, const CrudeEstimate &crude,
                                         const std::array<ModelOutcome, 4> &models);

void write_report_csv(std::ostream &out, const ComparisonReport &report);
ComparisonReport read_report_csv(std::istream &in);
void write_report_text(std::ostream &out, const ComparisonReport &report);

void write_fit_csv(std::ostream &out, const FitResult &fit);
void write_fit_text(std::ostream &out, const FitResult &fit);

} // namespace misclass
