// qmsa_main.cpp — Command-line front end: analyze / evolve / crosscheck /
// fixtures. Exit codes: 0 ok, 1 failed theorem check, 2 model validation,
// 3 numerical degeneracy, 4 usage.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qms/fixtures.hpp"
#include "qms/report.hpp"

namespace {

using qms::AnalysisConfig;
using qms::AnalysisContext;
using qms::GkslModel;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDegeneracy = 3;
constexpr int kExitUsage = 4;

struct CommonOptions {
    double tol_rank = 1e-9;
    double tol_eq = 1e-8;
    double tol_spec = 1e-9;
    double tol_pos = 1e-10;
    std::uint64_t seed = 0;
    std::vector<double> t_samples = {0.1, 1.0, 10.0};
    bool allow_negative_times = false;
    bool no_bases = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt)
{
    cmd->add_option("--tol-rank", opt.tol_rank, "relative rank/nullspace threshold")
        ->envname("QMSA_TOL_RANK");
    cmd->add_option("--tol-eq", opt.tol_eq, "equality assertion tolerance")
        ->envname("QMSA_TOL_EQ");
    cmd->add_option("--tol-spec", opt.tol_spec, "peripheral classification threshold (relative)")
        ->envname("QMSA_TOL_SPEC");
    cmd->add_option("--tol-pos", opt.tol_pos, "positivity cutoff for faithfulness")
        ->envname("QMSA_TOL_POS");
    cmd->add_option("--seed", opt.seed, "seed for randomized decompositions")
        ->envname("QMSA_SEED");
    cmd->add_option("--t-samples", opt.t_samples, "time samples for dynamical checks")
        ->delimiter(',')
        ->envname("QMSA_T_SAMPLES");
    cmd->add_flag("--allow-negative-times", opt.allow_negative_times,
                  "permit t < 0 (group extension; flagged in reports)")
        ->envname("QMSA_ALLOW_NEGATIVE_TIMES");
    cmd->add_flag("--no-bases", opt.no_bases, "omit operator bases from the JSON report")
        ->envname("QMSA_NO_BASES");
}

AnalysisConfig to_config(const CommonOptions& opt, const std::set<std::string>& modes)
{
    AnalysisConfig cfg;
    cfg.tol.rank = opt.tol_rank;
    cfg.tol.eq = opt.tol_eq;
    cfg.tol.spec = opt.tol_spec;
    cfg.tol.pos = opt.tol_pos;
    cfg.seed = opt.seed;
    cfg.t_samples = opt.t_samples;
    if (!modes.empty()) cfg.modes = modes;
    cfg.allow_negative_times = opt.allow_negative_times;
    cfg.include_bases = !opt.no_bases;
    return cfg;
}

GkslModel load_model_or_fixture(const std::string& path)
{
    for (const auto& f : qms::fixtures::all())
        if (f.name == path) return f.model;
    return qms::io::load_model(path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qmsa — structure analyzer for uniformly continuous quantum Markov semigroups"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "full structure analysis of a model");
    std::string analyze_model;
    std::vector<std::string> analyze_modes;
    std::string analyze_out;
    bool analyze_json_stdout = false;
    CommonOptions analyze_opt;
    analyze->add_option("model", analyze_model, "model JSON file or fixture name")->required();
    analyze->add_option("--modes", analyze_modes,
                        "subset of nt,ft,blocks,spectrum,states,eid,crosscheck")
        ->delimiter(',');
    analyze->add_option("--out", analyze_out, "write the JSON report to this file");
    analyze->add_flag("--json", analyze_json_stdout, "print JSON instead of text");
    add_common(analyze, analyze_opt);

    // evolve
    auto* evolve = app.add_subcommand("evolve",
                                      "distance of an evolved state from its reversible part");
    std::string evolve_model, evolve_state, evolve_out;
    std::vector<double> evolve_times;
    CommonOptions evolve_opt;
    evolve->add_option("model", evolve_model, "model JSON file or fixture name")->required();
    evolve->add_option("state", evolve_state, "density JSON file")->required();
    evolve->add_option("--times", evolve_times, "comma separated times")
        ->delimiter(',')
        ->required();
    evolve->add_option("--out", evolve_out, "write the CSV to this file");
    add_common(evolve, evolve_opt);

    // crosscheck
    auto* crosscheck = app.add_subcommand("crosscheck", "pass/fail matrix of theorem checks");
    std::string crosscheck_model;
    CommonOptions crosscheck_opt;
    crosscheck->add_option("model", crosscheck_model, "model JSON file or fixture name")
        ->required();
    add_common(crosscheck, crosscheck_opt);

    // fixtures
    auto* fixtures = app.add_subcommand("fixtures", "list or dump the bundled models");
    std::string fixtures_action;
    std::string fixtures_name;
    fixtures->add_option("action", fixtures_action, "list | dump")->required();
    fixtures->add_option("name", fixtures_name, "fixture name (for dump)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*analyze) {
            AnalysisConfig cfg = to_config(
                analyze_opt, std::set<std::string>(analyze_modes.begin(), analyze_modes.end()));
            AnalysisContext ctx(load_model_or_fixture(analyze_model), cfg);
            qms::io::Json report = qms::run_analyze(ctx, analyze_model);
            if (!analyze_out.empty()) {
                std::ofstream out(analyze_out);
                if (!out) throw qms::ValidationError("cannot write " + analyze_out);
                out << report.dump(2) << "\n";
            }
            if (analyze_json_stdout)
                std::cout << report.dump(2) << "\n";
            else
                std::cout << qms::render_text(report);
            return kExitOk;
        }
        if (*evolve) {
            AnalysisConfig cfg = to_config(evolve_opt, {});
            AnalysisContext ctx(load_model_or_fixture(evolve_model), cfg);
            qms::Matrix state = qms::io::load_state(evolve_state);
            std::ostringstream csv;
            csv << "t,distance\n";
            for (const auto& row : qms::run_evolve(ctx, state, evolve_times))
                csv << row.t << "," << row.distance << "\n";
            if (!evolve_out.empty()) {
                std::ofstream out(evolve_out);
                if (!out) throw qms::ValidationError("cannot write " + evolve_out);
                out << csv.str();
            } else {
                std::cout << csv.str();
            }
            return kExitOk;
        }
        if (*crosscheck) {
            AnalysisConfig cfg = to_config(crosscheck_opt, {});
            AnalysisContext ctx(load_model_or_fixture(crosscheck_model), cfg);
            bool any_failed = false;
            for (const auto& row : qms::run_crosscheck(ctx)) {
                std::cout << "[" << row.verdict << "] " << row.name << " residual "
                          << row.residual << " (tol " << row.tolerance << ") " << row.note
                          << "\n";
                if (row.verdict == "FAIL") any_failed = true;
            }
            return any_failed ? kExitCheckFailed : kExitOk;
        }
        if (*fixtures) {
            if (fixtures_action == "list") {
                for (const auto& f : qms::fixtures::all())
                    std::cout << f.name << ": " << f.note << "\n";
                return kExitOk;
            }
            if (fixtures_action == "dump") {
                if (fixtures_name.empty()) {
                    std::cerr << "fixtures dump requires a name\n";
                    return kExitUsage;
                }
                try {
                    const auto& f = qms::fixtures::get(fixtures_name);
                    qms::io::Json model_json = qms::io::model_to_json(f.model);
                    qms::io::Json j;
                    j["comment"] = f.note;
                    for (auto& [key, value] : model_json.items()) j[key] = value;
                    std::cout << j.dump(2) << "\n";
                    return kExitOk;
                } catch (const qms::ValidationError& e) {
                    std::cerr << e.what() << "\n";
                    return kExitUsage;
                }
            }
            std::cerr << "unknown fixtures action: " << fixtures_action << "\n";
            return kExitUsage;
        }
    } catch (const qms::io::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const qms::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const qms::ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const qms::DegeneracyError& e) {
        std::cerr << "numerical degeneracy: " << e.what() << "\n";
        return kExitDegeneracy;
    } catch (const qms::StructureError& e) {
        std::cerr << "structure mismatch: " << e.what() << "\n";
        return kExitDegeneracy;
    }
    return kExitUsage;
}
