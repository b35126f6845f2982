#include "misclass/rogan_gladen.hpp"

#include "misclass/error.hpp"
#include "misclass/stats_util.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace misclass {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_counts(std::size_t count_pos, std::size_t n) {
    if (n == 0) throw DomainError("prevalence interval needs n >= 1");
    if (count_pos > n) throw DomainError("positive count exceeds sample size");
}

} // namespace

double rogan_gladen_raw(double p_obs, const AssayProfile &assay) {
    if (!(p_obs >= 0.0 && p_obs <= 1.0)) throw DomainError("observed proportion must lie in [0, 1]");
    if (!(assay.youden() > 0.0)) throw DomainError("sensitivity + specificity must exceed 1");
    // Written as (p_obs - r0) / youden so a perfect assay returns p_obs exactly.
    return (p_obs - (1.0 - assay.specificity)) / assay.youden();
}

CrudeEstimate rogan_gladen(double p_obs, const AssayProfile &assay) {
    const double raw = rogan_gladen_raw(p_obs, assay);
    CrudeEstimate est;
    est.p_obs = p_obs;
    est.p_adj = clamp01(raw);
    est.truncated = raw < 0.0 || raw > 1.0;
    est.lower = est.upper = est.p_adj;
    return est;
}

CrudeEstimate rogan_gladen_interval(std::size_t count_pos, std::size_t n, const AssayProfile &assay,
                                    const CrudeIntervalOptions &options) {
    check_counts(count_pos, n);
    if (!(options.conf_level > 0.0 && options.conf_level < 1.0)) throw DomainError("conf_level must lie in (0, 1)");
    const double p_obs = static_cast<double>(count_pos) / static_cast<double>(n);
    CrudeEstimate est = rogan_gladen(p_obs, assay);
    est.n = n;
    est.interval_method = options.method;
    const double alpha = 1.0 - options.conf_level;

    if (options.method == CrudeIntervalMethod::WaldDelta) {
        const double raw = rogan_gladen_raw(p_obs, assay);
        const double se = std::sqrt(p_obs * (1.0 - p_obs) / static_cast<double>(n)) / assay.youden();
        const double half = normal_quantile(1.0 - alpha / 2.0) * se;
        est.lower = std::min(clamp01(raw - half), est.p_adj);
        est.upper = std::max(clamp01(raw + half), est.p_adj);
        return est;
    }

    if (options.bootstrap_resamples < 2) throw DomainError("bootstrap needs at least two resamples");
    std::mt19937_64 rng(options.seed);
    std::binomial_distribution<std::size_t> binom(n, p_obs);
    std::vector<double> reps(options.bootstrap_resamples);
    for (auto &r : reps) {
        const double p_star = static_cast<double>(binom(rng)) / static_cast<double>(n);
        r = clamp01(rogan_gladen_raw(p_star, assay));
    }
    est.lower = std::min(quantile(reps, alpha / 2.0), est.p_adj);
    est.upper = std::max(quantile(reps, 1.0 - alpha / 2.0), est.p_adj);
    return est;
}

CrudeEstimate observed_proportion_interval(std::size_t count_pos, std::size_t n, double conf_level) {
    check_counts(count_pos, n);
    const double p = static_cast<double>(count_pos) / static_cast<double>(n);
    const double half =
        normal_quantile(0.5 + conf_level / 2.0) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CrudeEstimate est;
    est.p_obs = p;
    est.p_adj = p;
    est.n = n;
    est.lower = clamp01(p - half);
    est.upper = clamp01(p + half);
    est.interval_method = CrudeIntervalMethod::WaldDelta;
    return est;
}

} // namespace misclass
