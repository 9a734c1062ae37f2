#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "syncsub/commands.hpp"

namespace {

struct Flags {
    std::string scenario;
    std::string out;
    double tol_abs = 0.0;
    double tol_rel = 0.0;
    bool quiet = false;
    CLI::Option* tol_abs_opt = nullptr;
    CLI::Option* tol_rel_opt = nullptr;

    syncsub::RunOptions options() const {
        syncsub::RunOptions o;
        if (tol_abs_opt->count() > 0) o.tol_abs = tol_abs;
        if (tol_rel_opt->count() > 0) o.tol_rel = tol_rel;
        return o;
    }
};

void add_flags(CLI::App* sub, Flags& f, const std::string& scenario_help, const std::string& out_help) {
    sub->add_option("--scenario", f.scenario, scenario_help)->required();
    sub->add_option("--out", f.out, out_help)->required();
    f.tol_abs_opt = sub->add_option("--tol-abs", f.tol_abs, "Override the absolute tolerance")->check(CLI::NonNegativeNumber);
    f.tol_rel_opt = sub->add_option("--tol-rel", f.tol_rel, "Override the relative tolerance")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", f.quiet, "Only report errors");
}

void print_report(const syncsub::RunReport& report) {
    for (const auto& c : report.checks) {
        std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.check_id << "  measured=" << c.measured
                  << "  threshold=" << c.threshold << "\n";
    }
    std::cout << report.scenario << " (" << report.command << "): " << (report.passed() ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verify synchronization-subspace dynamics and symmetry structure from scenario files"};
    app.require_subcommand(1, 1);

    Flags f;
    auto* drift = app.add_subcommand("verify-drift", "Evolve a state and check the drift and fidelity bounds");
    add_flags(drift, f, "Scenario file", "CSV output path (report goes next to it)");
    auto* decompose = app.add_subcommand("decompose", "Compare ker K with the diagonal isotypic subspace");
    add_flags(decompose, f, "Scenario file", "Report output path");
    auto* commutant = app.add_subcommand("commutant", "Compute the synchronization-preserving algebra");
    add_flags(commutant, f, "Scenario file", "Report output path");
    auto* run = app.add_subcommand("run", "Run a scenario's declared command");
    add_flags(run, f, "Scenario file", "Output path stem");
    auto* suite = app.add_subcommand("suite", "Run every *.scenario.json in a directory");
    add_flags(suite, f, "Scenario directory", "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const syncsub::RunOptions options = f.options();
        if (suite->parsed()) {
            const syncsub::SuiteSummary summary = syncsub::cmd_suite(f.scenario, f.out, options);
            for (const auto& e : summary.entries) {
                if (!f.quiet || e.exit_code != 0) {
                    std::cout << e.name << " (" << e.command << "): " << e.status;
                    if (!e.error.empty()) std::cout << "  " << e.error;
                    for (const auto& id : e.failed_checks) std::cout << "  failed:" << id;
                    std::cout << "\n";
                }
            }
            if (!f.quiet) std::cout << summary.entries.size() << " scenario(s), exit " << summary.exit_code() << "\n";
            return summary.exit_code();
        }

        syncsub::RunReport report;
        if (drift->parsed()) report = syncsub::cmd_verify_drift(f.scenario, f.out, options);
        else if (decompose->parsed()) report = syncsub::cmd_decompose(f.scenario, f.out, options);
        else if (commutant->parsed()) report = syncsub::cmd_commutant(f.scenario, f.out, options);
        else report = syncsub::run_scenario(syncsub::parse_scenario(f.scenario), f.out, options);

        if (!f.quiet || !report.passed()) print_report(report);
        return syncsub::exit_code(report);
    } catch (const syncsub::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return syncsub::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
