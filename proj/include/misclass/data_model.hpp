#pragma once

// Cohort representation, covariate coding and diagnostic assay profiles.
//
// Design-matrix column order is fixed:
//   intercept, age, sex, other_sti, hepb, msm, lgtbi, other_pop, sex_worker
// General population is the reference level of the population group, so a
// general-population subject has all four group indicators at 0. Age enters
// as raw years (not centred or scaled).

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace misclass {

enum class PopulationGroup : std::uint8_t {
    GeneralPopulation = 0,
    MSM = 1,
    LGTBI = 2,
    OtherPopulations = 3,
    SexWorker = 4,
};

inline constexpr std::size_t kPopulationGroupCount = 5;

std::string_view to_string(PopulationGroup group);
// Case-insensitive; accepts the enumerator names and a few common aliases
// ("general", "sex_worker", ...). Throws SchemaError otherwise.
PopulationGroup parse_population_group(std::string_view text);

struct SubjectRecord {
    int observed_outcome = 0; // 1 = reactive
    double age = 0.0;         // years
    int sex = 0;              // 1 = male
    int other_sti_result = 0; // syphilis when modelling HIV, HIV when modelling syphilis
    int hepb_result = 0;
    PopulationGroup population_group = PopulationGroup::GeneralPopulation;

    friend bool operator==(const SubjectRecord &, const SubjectRecord &) = default;
};

// Throws SchemaError naming `row` (0-based record index) on any violation.
void validate_record(const SubjectRecord &record, std::size_t row);

class Cohort {
public:
    Cohort(std::vector<SubjectRecord> records, std::string outcome_label);

    const std::vector<SubjectRecord> &records() const noexcept { return records_; }
    const SubjectRecord &operator[](std::size_t i) const { return records_[i]; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::string &outcome_label() const noexcept { return outcome_label_; }

    std::size_t positives() const noexcept;
    double observed_proportion() const noexcept;

    friend bool operator==(const Cohort &, const Cohort &) = default;

private:
    std::vector<SubjectRecord> records_;
    std::string outcome_label_;
};

enum class Covariate : std::uint8_t {
    Age,
    Sex,
    OtherSti,
    HepB,
    MSM,
    LGTBI,
    OtherPopulations,
    SexWorker,
};

inline constexpr std::array<Covariate, 8> kAllCovariates{
    Covariate::Age, Covariate::Sex,   Covariate::OtherSti,         Covariate::HepB,
    Covariate::MSM, Covariate::LGTBI, Covariate::OtherPopulations, Covariate::SexWorker,
};

std::string_view column_name(Covariate c);
Covariate parse_covariate(std::string_view name);

struct DesignMatrix {
    Eigen::MatrixXd values; // n x (p+1), column 0 is the intercept
    std::vector<std::string> column_names;

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }
    // Number of covariates excluding the intercept.
    std::size_t p() const noexcept { return static_cast<std::size_t>(values.cols()) - 1; }
};

// Rows follow cohort order. `covariates` selects (and orders) the columns
// after the intercept; the default is the full eight-covariate layout.
DesignMatrix build_design_matrix(const Cohort &cohort,
                                 std::span<const Covariate> covariates = kAllCovariates);

Eigen::VectorXd outcome_vector(const Cohort &cohort);

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;
    double mean() const noexcept { return alpha / (alpha + beta); }
    double sd() const noexcept;
};

enum class AssayMode { Fixed, BetaPrior };

struct AssayProfile {
    double sensitivity = 1.0;
    double specificity = 1.0;
    AssayMode mode = AssayMode::Fixed;
    BetaParams se_prior{};
    BetaParams sp_prior{};

    static AssayProfile fixed(double se, double sp);
    // Beta priors with effective sample size n (alpha + beta = n) centred on
    // the stated sensitivity / specificity.
    static AssayProfile beta_prior(double se, double sp, double se_prior_n = 1000.0,
                                   double sp_prior_n = 1000.0);

    double youden() const noexcept { return sensitivity + specificity - 1.0; }
    // Throws DomainError when an invariant does not hold.
    void validate() const;
    AssayProfile as_fixed() const { return fixed(sensitivity, specificity); }
};

inline constexpr double kDefaultPriorSampleSize = 1000.0;

AssayProfile hiv_assay();      // Determine HIV Early Detect
AssayProfile syphilis_assay(); // Bioline Syphilis 3.0
// Known assays by outcome label (case-insensitive "hiv" / "syphilis").
std::optional<AssayProfile> default_assay_for(std::string_view outcome_label);

// Canonical field -> source column name.
struct ColumnMapping {
    std::map<std::string, std::string> source_of;
    char delimiter = ',';

    static const std::array<std::string_view, 6> &canonical_fields();
    static ColumnMapping identity();
    const std::string &source_for(std::string_view canonical) const;
};

// Parses delimiter-separated text with a header row. Errors carry the
// 1-based data row and the source column name.
Cohort load_cohort(std::istream &source, const ColumnMapping &mapping,
                   std::string outcome_label);

// Writes canonical column names; values round-trip through load_cohort.
void write_cohort(std::ostream &out, const Cohort &cohort, char delimiter = ',');

} // namespace misclass
