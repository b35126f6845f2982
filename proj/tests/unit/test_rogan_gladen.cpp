#include "misclass/data_model.hpp"
#include "misclass/error.hpp"
#include "misclass/rogan_gladen.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace misclass;

TEST_CASE("Rogan-Gladen point values", "[rg]") {
    const CrudeEstimate e = rogan_gladen(0.0139, hiv_assay());
    CHECK(std::abs(e.p_adj - 0.0129 / 0.974) < 1e-12);
    CHECK_FALSE(e.truncated);
    CHECK(rogan_gladen(0.37, AssayProfile::fixed(1.0, 1.0)).p_adj == 0.37);

    const CrudeEstimate low = rogan_gladen(0.0005, hiv_assay());
    CHECK(std::abs(rogan_gladen_raw(0.0005, hiv_assay()) - (-0.0005 / 0.974)) < 1e-15);
    CHECK(low.p_adj == 0.0);
    CHECK(low.truncated);
    CHECK(rogan_gladen(0.9999, hiv_assay()).truncated);
    CHECK(rogan_gladen(0.9999, hiv_assay()).p_adj == 1.0);

    const CrudeEstimate syph = rogan_gladen(0.0567, syphilis_assay());
    CHECK(std::abs(syph.p_adj - 0.0307 / 0.938) < 1e-12);
}

TEST_CASE("Rogan-Gladen Wald interval", "[rg]") {
    const CrudeEstimate e = rogan_gladen_interval(159, 11452, hiv_assay());
    const double p = 159.0 / 11452.0;
    const double half = 1.959963984540054 * std::sqrt(p * (1 - p) / 11452.0) / 0.974;
    CHECK(std::abs(e.p_adj - (p - 0.001) / 0.974) < 1e-12);
    CHECK(std::abs((e.upper - e.lower) / 2.0 - half) < 1e-10);
    // 0.002213 is the same formula evaluated at the rounded proportion 0.0139.
    CHECK(std::abs(half - 0.002213) < 2e-5);
    CHECK(e.interval_method == CrudeIntervalMethod::WaldDelta);

    const CrudeEstimate zero = rogan_gladen_interval(0, 500, hiv_assay());
    CHECK(zero.p_adj == 0.0);
    CHECK(zero.lower == 0.0);
    CHECK(zero.truncated);
    CHECK_THROWS_AS(rogan_gladen_interval(0, 0, hiv_assay()), DomainError);
    CHECK_THROWS_AS(rogan_gladen_interval(5, 4, hiv_assay()), DomainError);
}

TEST_CASE("Rogan-Gladen bootstrap interval is seeded", "[rg]") {
    CrudeIntervalOptions opt;
    opt.method = CrudeIntervalMethod::Bootstrap;
    opt.seed = 99;
    const CrudeEstimate a = rogan_gladen_interval(40, 800, syphilis_assay(), opt);
    const CrudeEstimate b = rogan_gladen_interval(40, 800, syphilis_assay(), opt);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower <= a.p_adj);
    CHECK(a.p_adj <= a.upper);
    CHECK(a.interval_method == CrudeIntervalMethod::Bootstrap);
    opt.seed = 100;
    const CrudeEstimate c = rogan_gladen_interval(40, 800, syphilis_assay(), opt);
    CHECK((c.lower != a.lower || c.upper != a.upper));
}

TEST_CASE("Rogan-Gladen invariants", "[rg][property]") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> acc(0.55, 1.0);
    std::uniform_int_distribution<std::size_t> nn(1, 5000);
    for (int trial = 0; trial < 500; ++trial) {
        const AssayProfile a = AssayProfile::fixed(acc(rng), acc(rng));
        const std::size_t n = nn(rng);
        std::uniform_int_distribution<std::size_t> kk(0, n);
        const std::size_t k = kk(rng);
        for (auto method : {CrudeIntervalMethod::WaldDelta, CrudeIntervalMethod::Bootstrap}) {
            CrudeIntervalOptions opt;
            opt.method = method;
            opt.seed = static_cast<std::uint64_t>(trial);
            opt.bootstrap_resamples = 200;
            const CrudeEstimate e = rogan_gladen_interval(k, n, a, opt);
            CHECK(0.0 <= e.lower);
            CHECK(e.lower <= e.p_adj);
            CHECK(e.p_adj <= e.upper);
            CHECK(e.upper <= 1.0);
            const double raw = rogan_gladen_raw(static_cast<double>(k) / static_cast<double>(n), a);
            CHECK(e.truncated == (raw < 0.0 || raw > 1.0));
        }
        const double p1 = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
        CHECK(rogan_gladen_raw(p1 + 0.01, a) > rogan_gladen_raw(p1, a));
    }
}

TEST_CASE("Rogan-Gladen is unbiased under the generative model", "[rg][slow]") {
    std::mt19937_64 rng(2718);
    const AssayProfile a = syphilis_assay();
    const double p_pos = 0.964 * 0.05 + 0.026 * 0.95;
    std::binomial_distribution<std::size_t> draw(20000, p_pos);
    double sum_adj = 0.0, sum_obs = 0.0;
    for (int r = 0; r < 500; ++r) {
        const double p = static_cast<double>(draw(rng)) / 20000.0;
        sum_obs += p;
        sum_adj += rogan_gladen(p, a).p_adj;
    }
    CHECK(std::abs(sum_adj / 500.0 - 0.05) < 0.002);
    CHECK(std::abs(sum_obs / 500.0 - 0.0729) < 0.001);
}
