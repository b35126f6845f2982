#include "misclass/data_model.hpp"
#include "misclass/error.hpp"
#include "misclass/simgen.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace misclass;
using testsupport::record;

TEST_CASE("design matrix uses general population as reference", "[data]") {
    const Cohort c({record(0, 34, 1, 0, 0, PopulationGroup::GeneralPopulation)}, "HIV");
    const DesignMatrix x = build_design_matrix(c);
    Eigen::RowVectorXd expected(9);
    expected << 1, 34, 1, 0, 0, 0, 0, 0, 0;
    CHECK(x.values.row(0) == expected);
    CHECK(x.p() == 8);
    CHECK(x.column_names == std::vector<std::string>{"intercept", "age", "sex", "other_sti", "hepb", "msm", "lgtbi",
                                                     "other_pop", "sex_worker"});
}

TEST_CASE("design matrix activates a single group dummy", "[data]") {
    const Cohort c({record(0, 25, 0, 1, 0, PopulationGroup::MSM)}, "HIV");
    const DesignMatrix x = build_design_matrix(c);
    CHECK(x.values(0, 1) == 25);
    CHECK(x.values(0, 3) == 1);
    CHECK(x.values(0, 4) == 0);
    CHECK(x.values(0, 5) == 1);
    CHECK(x.values.row(0).tail(3).sum() == 0);
}

TEST_CASE("unknown population group is a schema error", "[data]") {
    CHECK_THROWS_AS(parse_population_group("Unknown"), SchemaError);
    std::istringstream in("outcome,age,sex,other_sti,hepb,group\n0,30,1,0,0,Unknown\n");
    try {
        load_cohort(in, ColumnMapping::identity(), "HIV");
        FAIL("expected a parse error");
    } catch (const ParseError &e) {
        CHECK(e.row() == 1);
        CHECK(e.column() == "group");
        CHECK(std::string(e.what()).find("Unknown") != std::string::npos);
    }
}

TEST_CASE("cohort loader reads a valid file", "[data]") {
    std::istringstream in("outcome,age,sex,other_sti,hepb,group\n"
                          "0,34,1,0,0,GeneralPopulation\n"
                          "1,25.5,0,1,0,MSM\n"
                          "0,61,1,0,1,SexWorker\n");
    const Cohort c = load_cohort(in, ColumnMapping::identity(), "HIV");
    REQUIRE(c.size() == 3);
    CHECK(c.positives() == 1);
    CHECK(c[1].age == 25.5);
    CHECK(c[2].population_group == PopulationGroup::SexWorker);
}

TEST_CASE("cohort loader reports the offending cell", "[data]") {
    auto error_at = [](const std::string &text) {
        std::istringstream in(text);
        try {
            load_cohort(in, ColumnMapping::identity(), "HIV");
        } catch (const ParseError &e) {
            return std::make_pair(e.row(), e.column());
        }
        return std::make_pair(std::size_t{0}, std::string{"<none>"});
    };
    const std::string header = "outcome,age,sex,other_sti,hepb,group\n";
    CHECK(error_at(header + "0,30,1,0,0,MSM\n0,-5,1,0,0,MSM\n") == std::make_pair(std::size_t{2}, std::string{"age"}));
    CHECK(error_at(header + "0,abc,1,0,0,MSM\n") == std::make_pair(std::size_t{1}, std::string{"age"}));
    CHECK(error_at(header + "2,30,1,0,0,MSM\n") == std::make_pair(std::size_t{1}, std::string{"outcome"}));
    CHECK(error_at(header + "0,30,1,,0,MSM\n") == std::make_pair(std::size_t{1}, std::string{"other_sti"}));
    std::istringstream missing("outcome,age,sex,hepb,group\n0,30,1,0,MSM\n");
    CHECK_THROWS_AS(load_cohort(missing, ColumnMapping::identity(), "HIV"), SchemaError);
}

TEST_CASE("column mapping renames source columns", "[data]") {
    ColumnMapping m = ColumnMapping::identity();
    m.source_of["outcome"] = "HIV result";
    m.source_of["group"] = "Population";
    m.delimiter = ';';
    std::istringstream in("Population;age;sex;HIV result;other_sti;hepb\r\nmsm;40;1;1;0;0\r\n");
    const Cohort c = load_cohort(in, m, "HIV");
    REQUIRE(c.size() == 1);
    CHECK(c[0].observed_outcome == 1);
    CHECK(c[0].population_group == PopulationGroup::MSM);
}

TEST_CASE("cohort round-trips through write and load", "[data][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> age(0.0, 90.0);
    std::uniform_int_distribution<int> bit(0, 1), grp(0, 4);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<SubjectRecord> recs;
        const int n = 1 + trial * 3;
        for (int i = 0; i < n; ++i) {
            recs.push_back(record(bit(rng), age(rng), bit(rng), bit(rng), bit(rng),
                                  static_cast<PopulationGroup>(grp(rng))));
        }
        const Cohort original(recs, "Syphilis");
        std::stringstream buf;
        write_cohort(buf, original);
        const Cohort back = load_cohort(buf, ColumnMapping::identity(), "Syphilis");
        CHECK(back == original);
    }
}

TEST_CASE("design matrix invariants hold for random cohorts", "[data][property]") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> bit(0, 1), grp(0, 4);
    std::vector<SubjectRecord> recs;
    for (int i = 0; i < 500; ++i) {
        recs.push_back(record(bit(rng), 20 + i % 50, bit(rng), bit(rng), bit(rng), static_cast<PopulationGroup>(grp(rng))));
    }
    const Cohort c(recs, "HIV");
    const DesignMatrix x = build_design_matrix(c);
    CHECK((x.values.col(0).array() == 1.0).all());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double dummies = x.values.row(i).tail(4).sum();
        CHECK((dummies == 0.0 || dummies == 1.0));
        CHECK(x.values(i, 1) == c[static_cast<std::size_t>(i)].age);
    }
    CHECK(build_design_matrix(c).values == x.values);
}

TEST_CASE("covariate subsets select and order columns", "[data]") {
    const Cohort c({record(1, 50, 1, 1, 0, PopulationGroup::LGTBI)}, "HIV");
    const std::array<Covariate, 2> subset{Covariate::LGTBI, Covariate::Age};
    const DesignMatrix x = build_design_matrix(c, subset);
    CHECK(x.column_names == std::vector<std::string>{"intercept", "lgtbi", "age"});
    CHECK(x.values(0, 1) == 1);
    CHECK(x.values(0, 2) == 50);
}

TEST_CASE("empty cohorts and invalid records are rejected", "[data]") {
    CHECK_THROWS_AS(Cohort({}, "HIV"), SchemaError);
    CHECK_THROWS_AS(Cohort({record(0, -1, 0, 0, 0, PopulationGroup::MSM)}, "HIV"), SchemaError);
    CHECK_THROWS_AS(Cohort({record(0, std::nan(""), 0, 0, 0, PopulationGroup::MSM)}, "HIV"), SchemaError);
    CHECK_THROWS_AS(Cohort({record(3, 20, 0, 0, 0, PopulationGroup::MSM)}, "HIV"), SchemaError);
}

TEST_CASE("assay profiles", "[data]") {
    const AssayProfile hiv = hiv_assay();
    CHECK(hiv.sensitivity == 0.975);
    CHECK(hiv.specificity == 0.999);
    const AssayProfile syph = syphilis_assay();
    CHECK(syph.sensitivity == 0.964);
    CHECK(syph.specificity == 0.974);
    CHECK(default_assay_for("hiv")->specificity == 0.999);
    CHECK(default_assay_for("SYPHILIS")->sensitivity == 0.964);
    CHECK_FALSE(default_assay_for("hepatitis"));

    const AssayProfile bp = AssayProfile::beta_prior(0.975, 0.999);
    CHECK(bp.mode == AssayMode::BetaPrior);
    CHECK(bp.se_prior.alpha + bp.se_prior.beta == Catch::Approx(1000.0));
    CHECK(std::abs(bp.se_prior.mean() - 0.975) < 1e-9);
    CHECK(std::abs(bp.sp_prior.mean() - 0.999) < 1e-9);
    CHECK_NOTHROW(bp.validate());

    CHECK_THROWS_AS(AssayProfile::fixed(0.5, 0.9).validate(), DomainError);
    CHECK_THROWS_AS(AssayProfile::fixed(1.01, 0.9).validate(), DomainError);
    AssayProfile off = bp;
    off.se_prior.alpha += 1.0;
    CHECK_THROWS_AS(off.validate(), DomainError);
}

TEST_CASE("synthetic Table-2 cohort has the expected marginals", "[data]") {
    const SimScenario sc = SimScenario::load(std::string(MISCLASS_DATA_DIR) + "/demo_cohort.scn");
    const Cohort c = simulate(sc).cohort;
    REQUIRE(c.size() == 11452);
    double age = 0.0, male = 0.0;
    for (const auto &r : c.records()) {
        age += r.age;
        male += r.sex;
    }
    CHECK(std::abs(age / 11452.0 - 34.0) < 0.5);
    CHECK(std::abs(male / 11452.0 - 0.50) < 0.015);
}
