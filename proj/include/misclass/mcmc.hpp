#pragma once

// Adaptive random-walk Metropolis with multi-chain diagnostics.
//
// During warmup the proposal is lambda * L z with L the Cholesky factor of
// the empirical covariance of warmup draws (or its diagonal) and lambda
// tuned by Robbins-Monro toward the target acceptance rate. Both are frozen
// at the end of warmup, so the post-warmup kernel is a fixed
// random-walk Metropolis kernel.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace misclass {

struct SamplerConfig {
    std::size_t chains = 4;
    std::size_t warmup = 2000;
    std::size_t samples = 2000;
    std::uint64_t seed = 0;
    // Defaults to 0.44 in one dimension and 0.234 otherwise.
    std::optional<double> target_accept;
    std::size_t adapt_window = 50;
    // false: adapt only per-coordinate scales (diagonal proposal).
    bool adapt_covariance = true;
    // Proposal shape before the first adaptation window closes.
    std::optional<Eigen::MatrixXd> initial_covariance;
    bool record_scale_trace = false;

    void validate() const;
    double effective_target(std::size_t dim) const;
};

using LogDensity = std::function<double(const Eigen::VectorXd &)>;

struct ChainAdaptation {
    double scale = 1.0;                // frozen lambda
    Eigen::MatrixXd proposal_cholesky; // frozen L
    std::vector<double> scale_trace;   // lambda per iteration (warmup + samples), when recorded
};

struct PosteriorDraws {
    std::vector<Eigen::MatrixXd> draws; // per chain: samples x dim, warmup excluded
    std::vector<std::string> param_names;
    std::vector<std::optional<double>> rhat;     // absent: zero-variance parameter
    std::vector<std::optional<double>> ess_bulk; // absent: zero-variance parameter
    std::vector<double> accept_rate;             // per chain, post-warmup
    std::vector<std::size_t> nan_rejections;     // per chain, all iterations
    std::vector<ChainAdaptation> adaptation;

    std::size_t chains() const noexcept { return draws.size(); }
    std::size_t samples() const noexcept { return draws.empty() ? 0 : static_cast<std::size_t>(draws.front().rows()); }
    std::size_t dim() const noexcept { return draws.empty() ? 0 : static_cast<std::size_t>(draws.front().cols()); }
    // All chains concatenated for one parameter, chain-major.
    std::vector<double> pooled(std::size_t param) const;
    Eigen::VectorXd posterior_mean() const;
    Eigen::VectorXd posterior_sd() const;
    // max over parameters; absent if any parameter has no rhat.
    std::optional<double> max_rhat() const;
    // Recomputes rhat and ess_bulk from `draws`.
    void refresh_diagnostics();
};

// `init` holds one start point per chain (or a single point shared by all).
PosteriorDraws sample(const LogDensity &log_post, std::size_t dim, const SamplerConfig &config,
                      const std::vector<Eigen::VectorXd> &init, std::vector<std::string> param_names = {});

// Split-chain potential scale reduction factor per parameter.
std::vector<std::optional<double>> rhat(const std::vector<Eigen::MatrixXd> &draws);

// Rank-normalised split-chain effective sample size per parameter, with
// the autocorrelation sum truncated at the first negative pair sum.
std::vector<std::optional<double>> ess_bulk(const std::vector<Eigen::MatrixXd> &draws);

// One row per draw: parameters, then chain id and draw index.
void write_draws_csv(std::ostream &out, const PosteriorDraws &draws);

} // namespace misclass
