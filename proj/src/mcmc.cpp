#include "misclass/mcmc.hpp"

#include "misclass/error.hpp"
#include "misclass/parallel.hpp"
#include "misclass/stats_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace misclass {

namespace {

struct ChainResult {
    Eigen::MatrixXd draws;
    double accept_rate = 0.0;
    std::size_t nan_rejections = 0;
    ChainAdaptation adaptation;
};

std::optional<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd &m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::MatrixXd l = llt.matrixL();
    if (!l.allFinite()) return std::nullopt;
    return l;
}

ChainResult run_chain(const LogDensity &log_post, std::size_t dim, const SamplerConfig &cfg,
                      const Eigen::VectorXd &start, std::uint64_t chain_seed) {
    const auto d = static_cast<Eigen::Index>(dim);
    std::mt19937_64 rng(chain_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const double target = cfg.effective_target(dim);
    const double base_scale = 2.38 / std::sqrt(static_cast<double>(dim));
    double log_adj = 0.0;

    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(d, d);
    if (cfg.initial_covariance) {
        if (auto l = cholesky(*cfg.initial_covariance)) chol = *l;
    }

    Eigen::VectorXd x = start;
    double lp = log_post(x);
    if (!std::isfinite(lp)) throw SamplerInitError("log density is not finite at the initial point");

    ChainResult res;
    res.draws.resize(static_cast<Eigen::Index>(cfg.samples), d);
    if (cfg.record_scale_trace) res.adaptation.scale_trace.reserve(cfg.warmup + cfg.samples);

    // Warmup moments, accumulated from a quarter of the way through warmup.
    const std::size_t collect_from = cfg.warmup / 4;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
    std::size_t count = 0;
    bool empirical = false;
    std::size_t rm_step = 0;
    const double prior_weight = 10.0 * static_cast<double>(dim);

    std::size_t accepted = 0;
    Eigen::VectorXd z(d);
    const std::size_t total = cfg.warmup + cfg.samples;
    for (std::size_t t = 0; t < total; ++t) {
        const bool warm = t < cfg.warmup;
        const double scale = base_scale * std::exp(log_adj);
        for (Eigen::Index k = 0; k < d; ++k) z(k) = gauss(rng);
        const Eigen::VectorXd proposal = x + scale * (chol * z);
        const double lp_new = log_post(proposal);
        double accept_prob = 0.0;
        if (std::isnan(lp_new)) {
            ++res.nan_rejections;
        } else {
            accept_prob = std::min(1.0, std::exp(lp_new - lp));
        }
        const double u = unif(rng);
        if (!std::isnan(lp_new) && std::log(u) < lp_new - lp) {
            x = proposal;
            lp = lp_new;
            if (!warm) ++accepted;
        }
        if (cfg.record_scale_trace) res.adaptation.scale_trace.push_back(scale);

        if (warm) {
            ++rm_step;
            log_adj += std::pow(static_cast<double>(rm_step), -0.6) * (accept_prob - target);
            log_adj = std::clamp(log_adj, -30.0, 30.0);

            if (t >= collect_from) {
                ++count;
                const Eigen::VectorXd delta = x - mean;
                mean += delta / static_cast<double>(count);
                m2 += delta * (x - mean).transpose();
            }
            const bool window_end = (t + 1) % cfg.adapt_window == 0;
            if (window_end && count >= std::max<std::size_t>(cfg.adapt_window, 2 * dim + 2)) {
                Eigen::MatrixXd cov = m2 / static_cast<double>(count - 1);
                if (cfg.initial_covariance) {
                    // Shrink toward the supplied shape, worth prior_weight draws.
                    const double w = static_cast<double>(count) / (static_cast<double>(count) + prior_weight);
                    cov = w * cov + (1.0 - w) * *cfg.initial_covariance;
                }
                if (!cfg.adapt_covariance) cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
                const double ridge = 1e-10 * std::max(1e-300, cov.diagonal().maxCoeff());
                cov.diagonal().array() += ridge;
                if (auto l = cholesky(cov)) {
                    chol = *l;
                    if (!empirical) {
                        empirical = true;
                        log_adj = 0.0;
                        rm_step = 0;
                    }
                }
            }
        } else {
            res.draws.row(static_cast<Eigen::Index>(t - cfg.warmup)) = x.transpose();
        }
    }
    res.accept_rate = cfg.samples ? static_cast<double>(accepted) / static_cast<double>(cfg.samples) : 0.0;
    res.adaptation.scale = base_scale * std::exp(log_adj);
    res.adaptation.proposal_cholesky = chol;
    return res;
}

// Split every chain into halves; drops the middle draw of odd-length chains.
std::vector<Eigen::VectorXd> split_chains(const std::vector<Eigen::MatrixXd> &draws, Eigen::Index param) {
    std::vector<Eigen::VectorXd> out;
    for (const auto &chain : draws) {
        const Eigen::Index n = chain.rows();
        const Eigen::Index half = n / 2;
        out.emplace_back(chain.col(param).head(half));
        out.emplace_back(chain.col(param).tail(half));
    }
    return out;
}

void check_draw_shape(const std::vector<Eigen::MatrixXd> &draws) {
    if (draws.size() < 2) throw DomainError("diagnostics need at least two chains");
    const Eigen::Index n = draws.front().rows();
    const Eigen::Index d = draws.front().cols();
    if (n < 4) throw DomainError("diagnostics need at least four draws per chain");
    for (const auto &c : draws) {
        if (c.rows() != n || c.cols() != d) throw DimensionError("chains must share the same shape");
    }
}

struct BetweenWithin {
    double within = 0.0;   // W
    double var_plus = 0.0; // pooled variance estimate
};

BetweenWithin between_within(const std::vector<Eigen::VectorXd> &chains) {
    const double m = static_cast<double>(chains.size());
    const double n = static_cast<double>(chains.front().size());
    Eigen::VectorXd means(chains.size());
    double w = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        means(static_cast<Eigen::Index>(c)) = chains[c].mean();
        w += (chains[c].array() - means(static_cast<Eigen::Index>(c))).square().sum() / (n - 1.0);
    }
    w /= m;
    const double b = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
    return {w, (n - 1.0) / n * w + b / n};
}

// Replaces values by normal scores of their fractional ranks (ties averaged).
std::vector<Eigen::VectorXd> rank_normalize(const std::vector<Eigen::VectorXd> &chains) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (Eigen::Index i = 0; i < chains[c].size(); ++i) {
            all.emplace_back(chains[c](i), c * static_cast<std::size_t>(chains[c].size()) + static_cast<std::size_t>(i));
        }
    }
    std::sort(all.begin(), all.end());
    const double s = static_cast<double>(all.size());
    std::vector<double> z(all.size());
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[j + 1].first == all[i].first) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        const double score = normal_quantile((rank - 0.375) / (s + 0.25));
        for (std::size_t k = i; k <= j; ++k) z[all[k].second] = score;
        i = j + 1;
    }
    std::vector<Eigen::VectorXd> out;
    std::size_t offset = 0;
    for (const auto &c : chains) {
        Eigen::VectorXd v(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i) v(i) = z[offset + static_cast<std::size_t>(i)];
        offset += static_cast<std::size_t>(c.size());
        out.push_back(std::move(v));
    }
    return out;
}

double autocovariance(const Eigen::VectorXd &x, double mean, Eigen::Index lag) {
    const Eigen::Index n = x.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i + lag < n; ++i) acc += (x(i) - mean) * (x(i + lag) - mean);
    return acc / static_cast<double>(n);
}

std::optional<double> ess_of(const std::vector<Eigen::VectorXd> &chains) {
    const BetweenWithin bw = between_within(chains);
    if (!(bw.within > 0.0) || !(bw.var_plus > 0.0)) return std::nullopt;
    const Eigen::Index n = chains.front().size();
    const double m = static_cast<double>(chains.size());
    std::vector<double> means;
    for (const auto &c : chains) means.push_back(c.mean());

    auto rho = [&](Eigen::Index lag) {
        double mean_acov = 0.0;
        for (std::size_t c = 0; c < chains.size(); ++c) mean_acov += autocovariance(chains[c], means[c], lag);
        mean_acov /= m;
        // Stan's convention: W uses n-1, autocovariances use n.
        return 1.0 - (bw.within - mean_acov) / bw.var_plus;
    };

    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; 2 * k + 1 < n; ++k) {
        const double even = k == 0 ? 1.0 : rho(2 * k);
        double pair = even + rho(2 * k + 1);
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair); // initial monotone sequence
        prev_pair = pair;
        tau += 2.0 * pair;
    }
    const double total = m * static_cast<double>(n);
    tau = std::max(tau, 1.0 / std::log10(total));
    return total / tau;
}

} // namespace

void SamplerConfig::validate() const {
    if (chains < 2) throw DomainError("sampler needs at least two chains");
    if (warmup < 100) throw DomainError("warmup must be at least 100 iterations");
    if (samples < 100) throw DomainError("samples must be at least 100 per chain");
    if (adapt_window == 0) throw DomainError("adapt_window must be positive");
    if (target_accept && !(*target_accept > 0.0 && *target_accept < 1.0)) {
        throw DomainError("target_accept must lie in (0, 1)");
    }
}

double SamplerConfig::effective_target(std::size_t dim) const {
    if (target_accept) return *target_accept;
    return dim == 1 ? 0.44 : 0.234;
}

std::vector<double> PosteriorDraws::pooled(std::size_t param) const {
    std::vector<double> out;
    out.reserve(chains() * samples());
    for (const auto &c : draws) {
        for (Eigen::Index i = 0; i < c.rows(); ++i) out.push_back(c(i, static_cast<Eigen::Index>(param)));
    }
    return out;
}

Eigen::VectorXd PosteriorDraws::posterior_mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
    for (const auto &c : draws) m += c.colwise().sum().transpose();
    return m / static_cast<double>(chains() * samples());
}

Eigen::VectorXd PosteriorDraws::posterior_sd() const {
    const Eigen::VectorXd m = posterior_mean();
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(m.size());
    for (const auto &c : draws) ss += (c.rowwise() - m.transpose()).array().square().colwise().sum().matrix().transpose();
    return (ss / static_cast<double>(chains() * samples() - 1)).cwiseSqrt();
}

std::optional<double> PosteriorDraws::max_rhat() const {
    double worst = 0.0;
    for (const auto &r : rhat) {
        if (!r) return std::nullopt;
        worst = std::max(worst, *r);
    }
    return worst;
}

void PosteriorDraws::refresh_diagnostics() {
    rhat = misclass::rhat(draws);
    ess_bulk = misclass::ess_bulk(draws);
}

PosteriorDraws sample(const LogDensity &log_post, std::size_t dim, const SamplerConfig &config,
                      const std::vector<Eigen::VectorXd> &init, std::vector<std::string> param_names) {
    config.validate();
    if (dim == 0) throw DomainError("sampler dimension must be positive");
    if (init.empty() || (init.size() != 1 && init.size() != config.chains)) {
        throw DomainError("provide one initial point per chain or a single shared one");
    }
    for (const auto &p : init) {
        if (p.size() != static_cast<Eigen::Index>(dim)) throw DimensionError("initial point has the wrong dimension");
    }
    if (config.initial_covariance &&
        (config.initial_covariance->rows() != static_cast<Eigen::Index>(dim) ||
         config.initial_covariance->cols() != static_cast<Eigen::Index>(dim))) {
        throw DimensionError("initial covariance has the wrong dimension");
    }
    if (param_names.empty()) {
        for (std::size_t k = 0; k < dim; ++k) param_names.push_back("theta[" + std::to_string(k) + "]");
    }
    if (param_names.size() != dim) throw DimensionError("parameter names do not match the dimension");
    for (const auto &p : init) {
        if (!std::isfinite(log_post(p))) throw SamplerInitError("log density is not finite at an initial point");
    }

    std::vector<ChainResult> results(config.chains);
    parallel_for(config.chains, [&](std::size_t c) {
        const Eigen::VectorXd &start = init.size() == 1 ? init.front() : init[c];
        results[c] = run_chain(log_post, dim, config, start, derive_seed(config.seed, c));
    });

    PosteriorDraws out;
    out.param_names = std::move(param_names);
    for (auto &r : results) {
        if (!r.draws.allFinite()) throw StatisticalError("sampler produced non-finite draws");
        out.draws.push_back(std::move(r.draws));
        out.accept_rate.push_back(r.accept_rate);
        out.nan_rejections.push_back(r.nan_rejections);
        out.adaptation.push_back(std::move(r.adaptation));
    }
    out.refresh_diagnostics();
    return out;
}

std::vector<std::optional<double>> rhat(const std::vector<Eigen::MatrixXd> &draws) {
    check_draw_shape(draws);
    std::vector<std::optional<double>> out;
    for (Eigen::Index k = 0; k < draws.front().cols(); ++k) {
        const BetweenWithin bw = between_within(split_chains(draws, k));
        if (!(bw.within > 0.0)) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(std::sqrt(bw.var_plus / bw.within));
        }
    }
    return out;
}

std::vector<std::optional<double>> ess_bulk(const std::vector<Eigen::MatrixXd> &draws) {
    check_draw_shape(draws);
    std::vector<std::optional<double>> out;
    for (Eigen::Index k = 0; k < draws.front().cols(); ++k) {
        const auto split = split_chains(draws, k);
        if (!(between_within(split).within > 0.0)) {
            out.emplace_back(std::nullopt);
            continue;
        }
        out.push_back(ess_of(rank_normalize(split)));
    }
    return out;
}

void write_draws_csv(std::ostream &out, const PosteriorDraws &draws) {
    for (const auto &name : draws.param_names) out << name << ',';
    out << "chain,draw\n";
    for (std::size_t c = 0; c < draws.chains(); ++c) {
        const auto &m = draws.draws[c];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index k = 0; k < m.cols(); ++k) out << format_roundtrip(m(i, k)) << ',';
            out << c << ',' << i << '\n';
        }
    }
}

} // namespace misclass
