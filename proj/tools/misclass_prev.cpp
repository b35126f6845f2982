// misclass-prev: prevalence estimation under test misclassification.
//
//   misclass-prev fit      --model std|liu|bc|bec [options] COHORT.csv
//   misclass-prev compare  [--model std,liu,bc,bec] [options] COHORT.csv
//   misclass-prev simulate SCENARIO [--reps N] [--cohort-out PATH]
//   misclass-prev report   REPORT.csv [--format text|csv]
//
// Exit codes: 0 success, 2 input error, 3 statistical failure.

#include "misclass/bayes_models.hpp"
#include "misclass/config.hpp"
#include "misclass/data_model.hpp"
#include "misclass/error.hpp"
#include "misclass/freq_fit.hpp"
#include "misclass/parallel.hpp"
#include "misclass/prevalence_report.hpp"
#include "misclass/rogan_gladen.hpp"
#include "misclass/simgen.hpp"
#include "misclass/stats_util.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <iostream>
#include <random>
#include <sstream>

using namespace misclass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitStatistical = 3;

struct RunConfig {
    std::string input;
    std::string outcome;
    std::vector<std::string> models;
    std::optional<double> se, sp, se_prior_n, sp_prior_n;
    std::size_t chains = 4, warmup = 2000, samples = 2000;
    std::size_t bootstrap = kDefaultStdResamples;
    std::size_t liu_refits = kDefaultLiuRefits;
    std::string interval = "bootstrap";
    std::optional<std::uint64_t> seed;
    std::string format = "text";
    std::string out;
    bool allow_nonconverged = false;
    std::string mapping_config;
    std::string liu_variant = "both";
    std::vector<std::string> covariates;
    // simulate
    std::size_t reps = 0;
    std::string cohort_out;
    std::vector<std::string> estimators;
};

class ExitStatus : public std::runtime_error {
public:
    ExitStatus(int code, const std::string &msg) : std::runtime_error(msg), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

std::uint64_t resolve_seed(RunConfig &cfg) {
    if (!cfg.seed) {
        std::random_device rd;
        cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
    return *cfg.seed;
}

void print_effective(const std::string &cmd, const RunConfig &c, const std::vector<std::pair<std::string, std::string>> &extra) {
    std::cerr << "misclass-prev " << cmd << '\n';
    std::cerr << "  seed = " << *c.seed << '\n';
    for (const auto &[k, v] : extra) std::cerr << "  " << k << " = " << v << '\n';
    std::cerr << "  threads = " << worker_limit() << '\n';
}

// Column mapping (`column.<field> = <source>`, `delimiter`) plus assay keys
// `se`, `sp`, `se_prior_n`, `sp_prior_n`, optionally prefixed with the
// lower-case outcome label (`hiv.se`). Prefixed keys win.
struct InputConfig {
    ColumnMapping mapping = ColumnMapping::identity();
    std::optional<double> se, sp, se_prior_n, sp_prior_n;
};

InputConfig input_config_from(const std::string &path, const std::string &outcome) {
    InputConfig ic;
    if (path.empty()) return ic;
    const KeyValueConfig cfg = KeyValueConfig::load(path);
    const std::string own_prefix = to_lower(outcome) + ".";
    std::map<std::string, std::optional<double> *> assay_keys{
        {"se", &ic.se}, {"sp", &ic.sp}, {"se_prior_n", &ic.se_prior_n}, {"sp_prior_n", &ic.sp_prior_n}};
    for (const auto &[key, value] : cfg.entries()) {
        if (key == "delimiter") {
            if (value == "tab" || value == "\\t") ic.mapping.delimiter = '\t';
            else if (value.size() == 1) ic.mapping.delimiter = value[0];
            else throw SchemaError("delimiter must be a single character or 'tab'");
            continue;
        }
        const std::string column_prefix = "column.";
        if (key.rfind(column_prefix, 0) == 0) {
            const std::string field = key.substr(column_prefix.size());
            const auto &fields = ColumnMapping::canonical_fields();
            if (std::find(fields.begin(), fields.end(), field) == fields.end()) {
                throw SchemaError("unknown canonical field '" + field + "'");
            }
            ic.mapping.source_of[field] = value;
            continue;
        }
        if (assay_keys.count(key)) {
            if (!cfg.has(own_prefix + key)) *assay_keys[key] = parse_double_strict(value, key);
            continue;
        }
        const auto dot = key.find('.');
        if (dot != std::string::npos && assay_keys.count(key.substr(dot + 1))) {
            if (key.rfind(own_prefix, 0) == 0) *assay_keys[key.substr(dot + 1)] = parse_double_strict(value, key);
            continue;
        }
        throw SchemaError("unknown config key '" + key + "'");
    }
    return ic;
}

Cohort read_input(const RunConfig &c) {
    std::ifstream in(c.input);
    if (!in) throw InputError("cannot open input '" + c.input + "'");
    return load_cohort(in, input_config_from(c.mapping_config, c.outcome).mapping, c.outcome);
}

// Precedence: command-line flags, then the config file, then the known
// assay for the outcome label.
AssayProfile resolve_assay(RunConfig c) {
    const InputConfig ic = input_config_from(c.mapping_config, c.outcome);
    if (!c.se) c.se = ic.se;
    if (!c.sp) c.sp = ic.sp;
    if (!c.se_prior_n) c.se_prior_n = ic.se_prior_n;
    if (!c.sp_prior_n) c.sp_prior_n = ic.sp_prior_n;
    const auto known = default_assay_for(c.outcome);
    if (!known && (!c.se || !c.sp)) {
        throw InputError("no default assay for outcome '" + c.outcome + "'; pass --se and --sp");
    }
    const double se = c.se.value_or(known ? known->sensitivity : 0.0);
    const double sp = c.sp.value_or(known ? known->specificity : 0.0);
    AssayProfile a = (c.se_prior_n || c.sp_prior_n)
                         ? AssayProfile::beta_prior(se, sp, c.se_prior_n.value_or(kDefaultPriorSampleSize),
                                                    c.sp_prior_n.value_or(kDefaultPriorSampleSize))
                         : AssayProfile::fixed(se, sp);
    try {
        a.validate();
    } catch (const DomainError &e) {
        throw InputError(std::string("invalid assay: ") + e.what());
    }
    return a;
}

std::vector<Covariate> resolve_covariates(const RunConfig &c) {
    if (c.covariates.empty()) return {kAllCovariates.begin(), kAllCovariates.end()};
    std::vector<Covariate> out;
    for (const auto &name : c.covariates) out.push_back(parse_covariate(name));
    return out;
}

SamplerConfig sampler_from(const RunConfig &c, std::uint64_t seed) {
    SamplerConfig s;
    s.chains = c.chains;
    s.warmup = c.warmup;
    s.samples = c.samples;
    s.seed = seed;
    try {
        s.validate();
    } catch (const DomainError &e) {
        throw InputError(e.what());
    }
    return s;
}

IntervalMethod resolve_interval(const RunConfig &c) {
    const IntervalMethod m = parse_interval_method(c.interval);
    if (m == IntervalMethod::PosteriorQuantile) throw InputError("--interval is delta or bootstrap");
    return m;
}

std::string assay_text(const AssayProfile &a) {
    std::ostringstream s;
    s << "Se=" << format_roundtrip(a.sensitivity) << " Sp=" << format_roundtrip(a.specificity);
    if (a.mode == AssayMode::BetaPrior) {
        s << " (Beta priors: Se~Beta(" << format_roundtrip(a.se_prior.alpha) << "," << format_roundtrip(a.se_prior.beta)
          << "), Sp~Beta(" << format_roundtrip(a.sp_prior.alpha) << "," << format_roundtrip(a.sp_prior.beta) << "))";
    }
    return s.str();
}

std::string join(const std::vector<std::string> &v) {
    std::string s;
    for (const auto &x : v) s += (s.empty() ? "" : ",") + x;
    return s;
}

// Writes to --out (or stdout) only after the whole artifact is rendered.
void emit(const RunConfig &c, const std::string &text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(c.out, std::ios::binary);
    if (!out) throw InputError("cannot write '" + c.out + "'");
    out << text;
}

struct ModelRun {
    ModelOutcome outcome;
    bool converged = false;
};

ModelRun run_model(ModelTag tag, const Eigen::VectorXd &y, const DesignMatrix &x, const AssayProfile &assay,
                   const RunConfig &c, std::uint64_t seed, bool allow_nonconverged) {
    ModelRun run;
    PrevalenceOptions popt;
    popt.method = resolve_interval(c);
    popt.seed = seed;
    try {
        switch (tag) {
        case ModelTag::STD: {
            FitResult fit = fit_std(y, x);
            run.converged = fit.converged;
            run.outcome.fit = fit;
            if (!fit.converged) break;
            popt.resamples = c.bootstrap;
            run.outcome.prevalence = marginal_prevalence_std(fit, y, x, assay, popt);
            break;
        }
        case ModelTag::LIU: {
            FitResult fit = fit_liu(y, x, parse_liu_variant(c.liu_variant));
            run.converged = fit.converged;
            run.outcome.fit = fit;
            if (!fit.converged) break;
            popt.resamples = c.liu_refits;
            run.outcome.prevalence = marginal_prevalence_liu(fit, x, popt);
            break;
        }
        case ModelTag::BC:
        case ModelTag::BEC: {
            const SamplerConfig sc = sampler_from(c, seed);
            BayesFit bf = tag == ModelTag::BC ? fit_bc(y, x, sc) : fit_bec(y, x, assay, sc);
            run.converged = bf.fit.converged;
            run.outcome.fit = bf.fit;
            if (!bf.fit.converged) break;
            run.outcome.prevalence = marginal_prevalence_bayes(
                bf.draws, x, assay, tag == ModelTag::BC ? Correction::External : Correction::None);
            break;
        }
        }
        if (!run.converged) {
            run.outcome.failure = std::string(to_string(tag)) + " did not converge" +
                                  (run.outcome.fit && run.outcome.fit->condition_warning
                                       ? ": " + *run.outcome.fit->condition_warning
                                       : std::string{});
            if (!allow_nonconverged) run.outcome.fit.reset();
        }
    } catch (const InputError &) {
        throw;
    } catch (const Error &e) {
        run.converged = false;
        run.outcome.prevalence.reset();
        run.outcome.failure = std::string(to_string(tag)) + ": " + e.what();
    }
    return run;
}

int cmd_fit(RunConfig &c) {
    if (c.models.size() != 1) throw InputError("fit takes exactly one --model");
    const ModelTag tag = parse_model_tag(c.models.front());
    const std::uint64_t seed = resolve_seed(c);
    const AssayProfile assay = resolve_assay(c);
    print_effective("fit", c,
                    {{"input", c.input}, {"outcome", c.outcome}, {"model", std::string(to_string(tag))}, {"assay", assay_text(assay)},
                     {"liu_variant", c.liu_variant}, {"interval", c.interval}, {"bootstrap", std::to_string(c.bootstrap)},
                     {"liu_refits", std::to_string(c.liu_refits)}, {"chains", std::to_string(c.chains)},
                     {"warmup", std::to_string(c.warmup)}, {"samples", std::to_string(c.samples)},
                     {"format", c.format}, {"out", c.out.empty() ? "<stdout>" : c.out}});
    const Cohort cohort = read_input(c);
    const std::vector<Covariate> covs = resolve_covariates(c);
    const DesignMatrix x = build_design_matrix(cohort, covs);
    check_full_rank(x);
    const Eigen::VectorXd y = outcome_vector(cohort);

    ModelRun run = run_model(tag, y, x, assay, c, derive_seed(seed, 0), true);
    if (!run.outcome.fit) throw ExitStatus(kExitStatistical, run.outcome.failure.value_or("fit failed"));
    if (!run.converged && !c.allow_nonconverged) {
        throw ExitStatus(kExitStatistical, run.outcome.failure.value_or("fit did not converge"));
    }

    std::ostringstream out;
    const FitResult &fit = *run.outcome.fit;
    if (c.format == "csv") {
        write_fit_csv(out, fit);
        if (run.outcome.prevalence) {
            const auto &p = *run.outcome.prevalence;
            out << "#prevalence\nmodel,point,lower,upper,interval_method,ci_width\n"
                << std::string(to_string(tag)) << ',' << format_roundtrip(p.point) << ',' << format_roundtrip(p.lower) << ','
                << format_roundtrip(p.upper) << ',' << to_string(p.interval_method) << ','
                << format_roundtrip(p.ci_width) << '\n';
        }
    } else {
        out << "Outcome: " << cohort.outcome_label() << "   n = " << cohort.size()
            << "   positives = " << cohort.positives() << '\n';
        write_fit_text(out, fit);
        if (run.outcome.prevalence) {
            const auto &p = *run.outcome.prevalence;
            out << std::fixed << std::setprecision(5) << "Adjusted prevalence: " << p.point << "  [" << p.lower
                << ", " << p.upper << "]  (" << to_string(p.interval_method) << ")\n";
        } else if (run.outcome.failure) {
            out << "Adjusted prevalence: not available (" << *run.outcome.failure << ")\n";
        }
    }
    emit(c, out.str());
    if (!run.converged) {
        std::cerr << "warning: " << run.outcome.failure.value_or("fit did not converge") << '\n';
    }
    return kExitOk;
}

int cmd_compare(RunConfig &c) {
    if (c.models.empty()) c.models = {"std", "liu", "bc", "bec"};
    std::vector<ModelTag> tags;
    for (const auto &m : c.models) {
        const ModelTag t = parse_model_tag(m);
        if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
    }
    if (tags.size() < 2) throw InputError("compare needs at least two distinct models");
    const std::uint64_t seed = resolve_seed(c);
    const AssayProfile assay = resolve_assay(c);
    std::vector<std::string> names;
    for (auto t : tags) names.emplace_back(to_string(t));
    print_effective("compare", c,
                    {{"input", c.input}, {"outcome", c.outcome}, {"models", join(names)}, {"assay", assay_text(assay)},
                     {"liu_variant", c.liu_variant}, {"interval", c.interval}, {"bootstrap", std::to_string(c.bootstrap)},
                     {"liu_refits", std::to_string(c.liu_refits)}, {"chains", std::to_string(c.chains)},
                     {"warmup", std::to_string(c.warmup)}, {"samples", std::to_string(c.samples)},
                     {"format", c.format}, {"out", c.out.empty() ? "<stdout>" : c.out}});
    const Cohort cohort = read_input(c);
    const DesignMatrix x = build_design_matrix(cohort, resolve_covariates(c));
    check_full_rank(x);
    const Eigen::VectorXd y = outcome_vector(cohort);

    std::array<ModelOutcome, 4> outcomes;
    for (std::size_t k = 0; k < kReportModels.size(); ++k) {
        const ModelTag tag = kReportModels[k];
        if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
            outcomes[k].failure = "not selected";
            continue;
        }
        std::cerr << "  fitting " << std::string(to_string(tag)) << "...\n";
        outcomes[k] = run_model(tag, y, x, assay, c, derive_seed(seed, k), c.allow_nonconverged).outcome;
    }
    const CrudeEstimate crude = observed_proportion_interval(cohort.positives(), cohort.size());
    const ComparisonReport report = build_comparison_report(cohort.outcome_label(), crude, outcomes);

    std::ostringstream out;
    if (c.format == "csv") write_report_csv(out, report);
    else write_report_text(out, report);
    emit(c, out.str());

    bool failed = false;
    for (std::size_t k = 0; k < 4; ++k) {
        if (std::find(tags.begin(), tags.end(), kReportModels[k]) == tags.end()) continue;
        if (!outcomes[k].prevalence) {
            failed = true;
            std::cerr << "warning: " << outcomes[k].failure.value_or("model unavailable") << '\n';
        }
    }
    return failed && !c.allow_nonconverged ? kExitStatistical : kExitOk;
}

int cmd_simulate(RunConfig &c) {
    SimScenario sc = SimScenario::load(c.input);
    if (c.seed) sc.seed = *c.seed;
    c.seed = sc.seed;
    std::vector<std::pair<std::string, std::string>> extra{
        {"scenario", c.input},
        {"n", std::to_string(sc.n)},
        {"outcome", sc.outcome_label},
        {"assay_true", assay_text(sc.assay_true)},
        {"reps", std::to_string(c.reps)}};
    std::vector<std::string> beta;
    for (Eigen::Index j = 0; j < sc.beta_true.size(); ++j) beta.push_back(format_roundtrip(sc.beta_true(j)));
    extra.emplace_back("beta_true", join(beta));

    StudyOptions opt;
    if (!c.estimators.empty()) {
        opt.estimators.clear();
        for (const auto &e : c.estimators) opt.estimators.push_back(parse_estimator_kind(e));
    }
    opt.frequentist_interval = resolve_interval(c);
    opt.bootstrap_resamples = c.bootstrap;
    opt.liu_variant = parse_liu_variant(c.liu_variant);
    opt.sampler = sampler_from(c, sc.seed);
    if (c.se || c.sp || c.se_prior_n || c.sp_prior_n) {
        RunConfig tmp = c;
        tmp.outcome = sc.outcome_label;
        if (!tmp.se) tmp.se = sc.assay_true.sensitivity;
        if (!tmp.sp) tmp.sp = sc.assay_true.specificity;
        opt.analysis_assay = resolve_assay(tmp);
        extra.emplace_back("assay_analysis", assay_text(*opt.analysis_assay));
    }
    std::vector<std::string> est_names;
    for (auto e : opt.estimators) est_names.push_back(to_string(e));
    extra.emplace_back("estimators", join(est_names));
    extra.emplace_back("interval", c.interval);
    extra.emplace_back("format", c.format);
    extra.emplace_back("out", c.out.empty() ? "<stdout>" : c.out);
    if (!c.cohort_out.empty()) extra.emplace_back("cohort_out", c.cohort_out);
    print_effective("simulate", c, extra);

    if (!c.cohort_out.empty()) {
        const SimOutput sim = simulate(sc);
        std::ofstream f(c.cohort_out, std::ios::binary);
        if (!f) throw InputError("cannot write '" + c.cohort_out + "'");
        write_cohort(f, sim.cohort);
        std::cerr << "  wrote " << sim.cohort.size() << " rows (draw " << sim.attempts << "); true prevalence "
                  << format_roundtrip(brute_force_prevalence(sim.truth)) << ", observed "
                  << format_roundtrip(sim.cohort.observed_proportion()) << '\n';
    }
    if (c.reps == 0) {
        if (c.cohort_out.empty()) throw InputError("simulate needs --reps or --cohort-out");
        return kExitOk;
    }
    if (c.reps < 2) throw InputError("--reps must be at least 2");
    const StudyResult res = replicate_study(sc, opt, c.reps);
    std::ostringstream out;
    if (c.format == "csv") write_study_csv(out, res);
    else write_study_text(out, res);
    emit(c, out.str());
    return kExitOk;
}

int cmd_report(RunConfig &c) {
    std::ifstream in(c.input);
    if (!in) throw InputError("cannot open report '" + c.input + "'");
    const ComparisonReport report = read_report_csv(in);
    std::ostringstream out;
    if (c.format == "csv") write_report_csv(out, report);
    else write_report_text(out, report);
    emit(c, out.str());
    return kExitOk;
}

void add_common(CLI::App *sub, RunConfig &c) {
    sub->add_option("--seed", c.seed, "Random seed (generated and printed when omitted)");
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "csv"}));
    sub->add_option("--out", c.out, "Output file (default stdout)");
}

void add_model_options(CLI::App *sub, RunConfig &c) {
    sub->add_option("--outcome", c.outcome, "Outcome label, e.g. HIV or Syphilis")->required();
    sub->add_option("--se", c.se, "Assay sensitivity");
    sub->add_option("--sp", c.sp, "Assay specificity");
    sub->add_option("--config", c.mapping_config, "Input config: column.<field> = <source>, delimiter, [<outcome>.]se/sp/se_prior_n/sp_prior_n");
    sub->add_option("--covariates", c.covariates, "Covariate subset (default: all eight)")->delimiter(',');
}

void add_estimation_options(CLI::App *sub, RunConfig &c) {
    sub->add_option("--se-prior-n", c.se_prior_n, "Beta prior sample size for Se (BEC samples Se)");
    sub->add_option("--sp-prior-n", c.sp_prior_n, "Beta prior sample size for Sp (BEC samples Sp)");
    sub->add_option("--chains", c.chains, "MCMC chains");
    sub->add_option("--warmup", c.warmup, "MCMC warmup iterations per chain");
    sub->add_option("--samples", c.samples, "MCMC retained draws per chain");
    sub->add_option("--bootstrap", c.bootstrap, "STD bootstrap resamples");
    sub->add_option("--liu-refits", c.liu_refits, "Liu parametric bootstrap refits");
    sub->add_option("--interval", c.interval, "STD/Liu interval method")->check(CLI::IsMember({"bootstrap", "delta"}));
    sub->add_option("--liu-variant", c.liu_variant, "Liu error-rate variant")
        ->check(CLI::IsMember({"both", "fp-only", "fn-only", "equal"}));
    sub->add_flag("--allow-nonconverged", c.allow_nonconverged, "Report non-converged fits instead of failing");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Prevalence estimation under diagnostic test misclassification"};
    app.require_subcommand(1);
    RunConfig c;

    auto *fit = app.add_subcommand("fit", "Fit one model and write coefficients and adjusted prevalence");
    fit->add_option("--model", c.models, "std, liu, bc or bec")->required()->delimiter(',');
    add_model_options(fit, c);
    add_estimation_options(fit, c);
    add_common(fit, c);
    fit->add_option("input", c.input, "Cohort file")->required();

    auto *compare = app.add_subcommand("compare", "Fit several models and write the comparison report");
    compare->add_option("--model", c.models, "Models to compare (default std,liu,bc,bec)")->delimiter(',');
    add_model_options(compare, c);
    add_estimation_options(compare, c);
    add_common(compare, c);
    compare->add_option("input", c.input, "Cohort file")->required();

    auto *simulate_cmd = app.add_subcommand("simulate", "Run a simulation study from a scenario file");
    simulate_cmd->add_option("--reps", c.reps, "Replicates");
    simulate_cmd->add_option("--estimators", c.estimators, "observed, std, liu, bc, bec")->delimiter(',');
    simulate_cmd->add_option("--cohort-out", c.cohort_out, "Write one simulated cohort (scenario seed) to this file");
    simulate_cmd->add_option("--se", c.se, "Analysis sensitivity (default: the scenario's)");
    simulate_cmd->add_option("--sp", c.sp, "Analysis specificity (default: the scenario's)");
    add_estimation_options(simulate_cmd, c);
    add_common(simulate_cmd, c);
    simulate_cmd->add_option("scenario", c.input, "Scenario file")->required();

    auto *report = app.add_subcommand("report", "Re-render a CSV comparison report");
    report->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "csv"}));
    report->add_option("--out", c.out, "Output file (default stdout)");
    report->add_option("input", c.input, "Report CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*fit) return cmd_fit(c);
        if (*compare) return cmd_compare(c);
        if (*simulate_cmd) return cmd_simulate(c);
        if (*report) return cmd_report(c);
    } catch (const ExitStatus &e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code();
    } catch (const ParseError &e) {
        std::cerr << "error: " << e.what() << " (row " << e.row() << ", column '" << e.column() << "')\n";
        return kExitInput;
    } catch (const InputError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DimensionError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const StatisticalError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStatistical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitStatistical;
    }
    return kExitInput;
}
