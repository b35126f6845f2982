#pragma once

// Closed-form prevalence correction for a test with known sensitivity and
// specificity:  p_adj = (p_obs + Sp - 1) / (Se + Sp - 1), truncated to [0, 1].

#include "misclass/data_model.hpp"

#include <cstddef>
#include <cstdint>

namespace misclass {

enum class CrudeIntervalMethod { WaldDelta, Bootstrap };

struct CrudeEstimate {
    double p_obs = 0.0;
    double p_adj = 0.0;
    std::size_t n = 0;
    bool truncated = false; // raw corrected value fell outside [0, 1]
    double lower = 0.0;
    double upper = 0.0;
    CrudeIntervalMethod interval_method = CrudeIntervalMethod::WaldDelta;
};

// Raw (unclamped) corrected value.
double rogan_gladen_raw(double p_obs, const AssayProfile &assay);

// Point estimate only; the interval collapses onto the point.
CrudeEstimate rogan_gladen(double p_obs, const AssayProfile &assay);

struct CrudeIntervalOptions {
    CrudeIntervalMethod method = CrudeIntervalMethod::WaldDelta;
    double conf_level = 0.95;
    std::size_t bootstrap_resamples = 2000;
    std::uint64_t seed = 0;
};

// Wald-delta: SE = sqrt(p_obs (1 - p_obs) / n) / (Se + Sp - 1) around the
// raw corrected value, then both ends clamped to [0, 1].
// Bootstrap: percentile interval over binomial resamples of the count.
CrudeEstimate rogan_gladen_interval(std::size_t count_pos, std::size_t n, const AssayProfile &assay,
                                    const CrudeIntervalOptions &options = {});

// Wald interval on the observed proportion itself (no correction).
CrudeEstimate observed_proportion_interval(std::size_t count_pos, std::size_t n, double conf_level = 0.95);

} // namespace misclass
