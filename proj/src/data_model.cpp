#include "misclass/data_model.hpp"

#include "misclass/config.hpp"
#include "misclass/error.hpp"
#include "misclass/stats_util.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace misclass {

namespace {

constexpr std::array<std::string_view, kPopulationGroupCount> kGroupNames{
    "GeneralPopulation", "MSM", "LGTBI", "OtherPopulations", "SexWorker"};

bool is_binary(int v) { return v == 0 || v == 1; }

std::vector<std::string> split_line(const std::string &line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == delimiter && !quoted) {
            fields.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trim(current));
    return fields;
}

} // namespace

std::string_view to_string(PopulationGroup group) {
    const auto idx = static_cast<std::size_t>(group);
    if (idx >= kGroupNames.size()) return "Invalid";
    return kGroupNames[idx];
}

PopulationGroup parse_population_group(std::string_view text) {
    static const std::unordered_map<std::string, PopulationGroup> table = {
        {"generalpopulation", PopulationGroup::GeneralPopulation},
        {"general", PopulationGroup::GeneralPopulation},
        {"general_population", PopulationGroup::GeneralPopulation},
        {"msm", PopulationGroup::MSM},
        {"lgtbi", PopulationGroup::LGTBI},
        {"lgtbiq", PopulationGroup::LGTBI},
        {"otherpopulations", PopulationGroup::OtherPopulations},
        {"other_populations", PopulationGroup::OtherPopulations},
        {"other", PopulationGroup::OtherPopulations},
        {"sexworker", PopulationGroup::SexWorker},
        {"sex_worker", PopulationGroup::SexWorker},
    };
    auto it = table.find(to_lower(trim(text)));
    if (it == table.end()) {
        throw SchemaError("unrecognised population group '" + std::string(text) + "'");
    }
    return it->second;
}

void validate_record(const SubjectRecord &r, std::size_t row) {
    auto fail = [row](const std::string &msg) {
        throw SchemaError("record " + std::to_string(row) + ": " + msg);
    };
    if (!is_binary(r.observed_outcome)) fail("observed_outcome must be 0 or 1");
    if (!is_binary(r.sex)) fail("sex must be 0 or 1");
    if (!is_binary(r.other_sti_result)) fail("other_sti_result must be 0 or 1");
    if (!is_binary(r.hepb_result)) fail("hepb_result must be 0 or 1");
    if (!std::isfinite(r.age) || r.age < 0.0) fail("age must be finite and non-negative");
    if (static_cast<std::size_t>(r.population_group) >= kPopulationGroupCount) {
        fail("unrecognised population group level " +
             std::to_string(static_cast<int>(r.population_group)));
    }
}

Cohort::Cohort(std::vector<SubjectRecord> records, std::string outcome_label)
    : records_(std::move(records)), outcome_label_(std::move(outcome_label)) {
    if (records_.empty()) throw SchemaError("cohort must contain at least one record");
    for (std::size_t i = 0; i < records_.size(); ++i) validate_record(records_[i], i);
}

std::size_t Cohort::positives() const noexcept {
    return static_cast<std::size_t>(std::count_if(
        records_.begin(), records_.end(), [](const SubjectRecord &r) { return r.observed_outcome == 1; }));
}

double Cohort::observed_proportion() const noexcept {
    return static_cast<double>(positives()) / static_cast<double>(records_.size());
}

std::string_view column_name(Covariate c) {
    switch (c) {
    case Covariate::Age: return "age";
    case Covariate::Sex: return "sex";
    case Covariate::OtherSti: return "other_sti";
    case Covariate::HepB: return "hepb";
    case Covariate::MSM: return "msm";
    case Covariate::LGTBI: return "lgtbi";
    case Covariate::OtherPopulations: return "other_pop";
    case Covariate::SexWorker: return "sex_worker";
    }
    return "unknown";
}

Covariate parse_covariate(std::string_view name) {
    const std::string key = to_lower(trim(name));
    for (Covariate c : kAllCovariates) {
        if (column_name(c) == key) return c;
    }
    throw InputError("unknown covariate '" + std::string(name) + "'");
}

DesignMatrix build_design_matrix(const Cohort &cohort, std::span<const Covariate> covariates) {
    const auto n = static_cast<Eigen::Index>(cohort.size());
    const auto k = static_cast<Eigen::Index>(covariates.size());
    DesignMatrix dm;
    dm.values.resize(n, k + 1);
    dm.column_names.reserve(covariates.size() + 1);
    dm.column_names.emplace_back("intercept");
    for (Covariate c : covariates) dm.column_names.emplace_back(column_name(c));

    for (Eigen::Index i = 0; i < n; ++i) {
        const SubjectRecord &r = cohort[static_cast<std::size_t>(i)];
        const auto group = static_cast<std::size_t>(r.population_group);
        if (group >= kPopulationGroupCount) {
            throw SchemaError("record " + std::to_string(i) + ": unrecognised population group level " +
                              std::to_string(group));
        }
        dm.values(i, 0) = 1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            double v = 0.0;
            switch (covariates[static_cast<std::size_t>(j)]) {
            case Covariate::Age: v = r.age; break;
            case Covariate::Sex: v = r.sex; break;
            case Covariate::OtherSti: v = r.other_sti_result; break;
            case Covariate::HepB: v = r.hepb_result; break;
            case Covariate::MSM: v = r.population_group == PopulationGroup::MSM; break;
            case Covariate::LGTBI: v = r.population_group == PopulationGroup::LGTBI; break;
            case Covariate::OtherPopulations:
                v = r.population_group == PopulationGroup::OtherPopulations;
                break;
            case Covariate::SexWorker: v = r.population_group == PopulationGroup::SexWorker; break;
            }
            dm.values(i, j + 1) = v;
        }
    }
    return dm;
}

Eigen::VectorXd outcome_vector(const Cohort &cohort) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(cohort.size()));
    for (std::size_t i = 0; i < cohort.size(); ++i) y(static_cast<Eigen::Index>(i)) = cohort[i].observed_outcome;
    return y;
}

double BetaParams::sd() const noexcept {
    const double s = alpha + beta;
    return std::sqrt(alpha * beta / (s * s * (s + 1.0)));
}

AssayProfile AssayProfile::fixed(double se, double sp) {
    AssayProfile a;
    a.sensitivity = se;
    a.specificity = sp;
    a.mode = AssayMode::Fixed;
    a.validate();
    return a;
}

AssayProfile AssayProfile::beta_prior(double se, double sp, double se_prior_n, double sp_prior_n) {
    AssayProfile a;
    a.sensitivity = se;
    a.specificity = sp;
    a.mode = AssayMode::BetaPrior;
    a.se_prior = {se * se_prior_n, (1.0 - se) * se_prior_n};
    a.sp_prior = {sp * sp_prior_n, (1.0 - sp) * sp_prior_n};
    a.validate();
    return a;
}

void AssayProfile::validate() const {
    auto in_range = [](double v) { return std::isfinite(v) && v > 0.5 && v <= 1.0; };
    if (!in_range(sensitivity)) throw DomainError("sensitivity must lie in (0.5, 1]");
    if (!in_range(specificity)) throw DomainError("specificity must lie in (0.5, 1]");
    if (!(youden() > 0.0)) throw DomainError("sensitivity + specificity must exceed 1");
    if (mode == AssayMode::BetaPrior) {
        for (const BetaParams *bp : {&se_prior, &sp_prior}) {
            if (!(bp->alpha > 0.0 && bp->beta > 0.0 && std::isfinite(bp->alpha) && std::isfinite(bp->beta))) {
                throw DomainError("Beta prior hyperparameters must be positive (a prior centred on 1 is not "
                                  "representable; use a fixed assay)");
            }
        }
        if (std::abs(se_prior.mean() - sensitivity) > 1e-9 || std::abs(sp_prior.mean() - specificity) > 1e-9) {
            throw DomainError("Beta prior means must equal the stated sensitivity and specificity");
        }
    }
}

AssayProfile hiv_assay() { return AssayProfile::fixed(0.975, 0.999); }
AssayProfile syphilis_assay() { return AssayProfile::fixed(0.964, 0.974); }

std::optional<AssayProfile> default_assay_for(std::string_view outcome_label) {
    const std::string key = to_lower(trim(outcome_label));
    if (key == "hiv") return hiv_assay();
    if (key == "syphilis") return syphilis_assay();
    return std::nullopt;
}

const std::array<std::string_view, 6> &ColumnMapping::canonical_fields() {
    static const std::array<std::string_view, 6> fields{"outcome", "age", "sex", "other_sti", "hepb", "group"};
    return fields;
}

ColumnMapping ColumnMapping::identity() {
    ColumnMapping m;
    for (auto f : canonical_fields()) m.source_of.emplace(std::string(f), std::string(f));
    return m;
}

const std::string &ColumnMapping::source_for(std::string_view canonical) const {
    auto it = source_of.find(std::string(canonical));
    if (it == source_of.end()) throw InputError("column mapping has no entry for '" + std::string(canonical) + "'");
    return it->second;
}

Cohort load_cohort(std::istream &source, const ColumnMapping &mapping, std::string outcome_label) {
    std::string line;
    if (!std::getline(source, line)) throw InputError("input is empty: a header row is required");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3); // UTF-8 BOM
    const auto header = split_line(line, mapping.delimiter);

    std::array<std::size_t, 6> index{};
    const auto &fields = ColumnMapping::canonical_fields();
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const std::string &want = mapping.source_for(fields[f]);
        auto it = std::find(header.begin(), header.end(), want);
        if (it == header.end()) {
            throw SchemaError("missing mandatory column '" + want + "' (field " + std::string(fields[f]) + ")");
        }
        index[f] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<SubjectRecord> records;
    std::size_t row = 0;
    while (std::getline(source, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_line(line, mapping.delimiter);
        auto cell = [&](std::size_t f) -> const std::string & {
            const std::size_t c = index[f];
            if (c >= cells.size()) {
                throw ParseError("row " + std::to_string(row) + ": missing value in column '" + header[c] + "'",
                                 row, header[c]);
            }
            if (cells[c].empty()) {
                throw ParseError("row " + std::to_string(row) + ", column '" + header[c] + "': missing value", row,
                                 header[c]);
            }
            return cells[c];
        };
        auto binary = [&](std::size_t f) {
            const std::string &v = cell(f);
            if (v == "0") return 0;
            if (v == "1") return 1;
            throw ParseError("row " + std::to_string(row) + ", column '" + header[index[f]] +
                                 "': expected 0 or 1, got '" + v + "'",
                             row, header[index[f]]);
        };

        SubjectRecord r;
        r.observed_outcome = binary(0);
        {
            const std::string &v = cell(1);
            double age = 0.0;
            try {
                age = parse_double_strict(v, "age");
            } catch (const InputError &) {
                throw ParseError("row " + std::to_string(row) + ", column '" + header[index[1]] +
                                     "': non-numeric age '" + v + "'",
                                 row, header[index[1]]);
            }
            if (age < 0.0) {
                throw ParseError("row " + std::to_string(row) + ", column '" + header[index[1]] +
                                     "': age must be non-negative, got '" + v + "'",
                                 row, header[index[1]]);
            }
            r.age = age;
        }
        r.sex = binary(2);
        r.other_sti_result = binary(3);
        r.hepb_result = binary(4);
        try {
            r.population_group = parse_population_group(cell(5));
        } catch (const SchemaError &) {
            throw ParseError("row " + std::to_string(row) + ", column '" + header[index[5]] +
                                 "': unrecognised population group '" + cell(5) + "'",
                             row, header[index[5]]);
        }
        records.push_back(r);
    }
    if (records.empty()) throw SchemaError("input has a header but no data rows");
    return Cohort(std::move(records), std::move(outcome_label));
}

void write_cohort(std::ostream &out, const Cohort &cohort, char d) {
    out << "outcome" << d << "age" << d << "sex" << d << "other_sti" << d << "hepb" << d << "group\n";
    for (const auto &r : cohort.records()) {
        out << r.observed_outcome << d << format_roundtrip(r.age) << d << r.sex << d << r.other_sti_result << d
            << r.hepb_result << d << to_string(r.population_group) << '\n';
    }
}

} // namespace misclass
