#pragma once

// Shared generators and oracles for the unit tests.

#include "misclass/data_model.hpp"
#include "misclass/logit_core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testsupport {

inline Eigen::MatrixXd random_design(std::mt19937_64 &rng, Eigen::Index n, Eigen::Index p) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::bernoulli_distribution b(0.4);
    Eigen::MatrixXd x(n, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        for (Eigen::Index j = 1; j <= p; ++j) x(i, j) = (j % 2 == 1) ? g(rng) : (b(rng) ? 1.0 : 0.0);
    }
    return x;
}

inline Eigen::VectorXd random_vector(std::mt19937_64 &rng, Eigen::Index n, double sd) {
    std::normal_distribution<double> g(0.0, sd);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

inline Eigen::VectorXd bernoulli_outcomes(std::mt19937_64 &rng, const Eigen::VectorXd &prob) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::VectorXd y(prob.size());
    for (Eigen::Index i = 0; i < prob.size(); ++i) y(i) = u(rng) < prob(i) ? 1.0 : 0.0;
    return y;
}

inline Eigen::VectorXd logistic_outcomes(std::mt19937_64 &rng, const Eigen::MatrixXd &x, const Eigen::VectorXd &beta) {
    Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
    return bernoulli_outcomes(rng, p);
}

inline misclass::DesignMatrix as_design(const Eigen::MatrixXd &x) {
    misclass::DesignMatrix d;
    d.values = x;
    d.column_names.push_back("intercept");
    for (Eigen::Index j = 1; j < x.cols(); ++j) d.column_names.push_back("x" + std::to_string(j));
    return d;
}

// Central differences of a scalar function, step h * max(1, |x_j|).
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd &)> &f, const Eigen::VectorXd &x,
                                   double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double step = h * std::max(1.0, std::abs(x(j)));
        Eigen::VectorXd a = x, b = x;
        a(j) += step;
        b(j) -= step;
        g(j) = (f(a) - f(b)) / (2.0 * step);
    }
    return g;
}

// Max over coordinates of |a - b| / max(|b|, floor).
inline double max_rel_error(const Eigen::VectorXd &a, const Eigen::VectorXd &b, double floor = 1.0) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        worst = std::max(worst, std::abs(a(j) - b(j)) / std::max(std::abs(b(j)), floor));
    }
    return worst;
}

// Independent logistic MLE: plain loops for the likelihood pieces, full
// Newton steps solved by Gaussian elimination with partial pivoting.
inline std::vector<double> brute_force_logistic_mle(const Eigen::MatrixXd &x, const Eigen::VectorXd &y,
                                                    int iterations = 60) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto d = static_cast<std::size_t>(x.cols());
    std::vector<double> b(d, 0.0);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> g(d, 0.0);
        std::vector<std::vector<double>> h(d, std::vector<double>(d + 1, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            double eta = 0.0;
            for (std::size_t j = 0; j < d; ++j) eta += x(i, j) * b[j];
            const double p = 1.0 / (1.0 + std::exp(-eta));
            for (std::size_t j = 0; j < d; ++j) {
                g[j] += (y(i) - p) * x(i, j);
                for (std::size_t k = 0; k < d; ++k) h[j][k] += p * (1.0 - p) * x(i, j) * x(i, k);
            }
        }
        for (std::size_t j = 0; j < d; ++j) h[j][d] = g[j];
        for (std::size_t c = 0; c < d; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < d; ++r)
                if (std::abs(h[r][c]) > std::abs(h[piv][c])) piv = r;
            std::swap(h[c], h[piv]);
            for (std::size_t r = c + 1; r < d; ++r) {
                const double f = h[r][c] / h[c][c];
                for (std::size_t k = c; k <= d; ++k) h[r][k] -= f * h[c][k];
            }
        }
        std::vector<double> step(d, 0.0);
        for (std::size_t c = d; c-- > 0;) {
            double s = h[c][d];
            for (std::size_t k = c + 1; k < d; ++k) s -= h[c][k] * step[k];
            step[c] = s / h[c][c];
        }
        for (std::size_t j = 0; j < d; ++j) b[j] += step[j];
    }
    return b;
}

inline misclass::SubjectRecord record(int y, double age, int sex, int sti, int hepb, misclass::PopulationGroup g) {
    misclass::SubjectRecord r;
    r.observed_outcome = y;
    r.age = age;
    r.sex = sex;
    r.other_sti_result = sti;
    r.hepb_result = hepb;
    r.population_group = g;
    return r;
}

} // namespace testsupport
