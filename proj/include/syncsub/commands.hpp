#pragma once

// Command implementations behind the syncsub executable. Every command writes
// its outputs, returns a RunReport, and leaves exit-code mapping to the caller.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 ParseError,
// 3 dimension or precondition error, 4 Internal.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "syncsub/scenario.hpp"

namespace syncsub {

struct CheckRecord {
    std::string check_id;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
};

struct RunReport {
    std::string scenario;
    std::string command;
    std::optional<std::uint64_t> seed;
    std::vector<CheckRecord> checks;
    std::vector<std::string> outputs;  // file names, relative to the output directory
    nlohmann::ordered_json details = nlohmann::ordered_json::object();

    bool passed() const;
    /// Adds a record that passes iff measured <= threshold.
    void check(std::string id, double measured, double threshold);
    nlohmann::ordered_json to_json() const;
};

struct RunOptions {
    std::optional<double> tol_abs;
    std::optional<double> tol_rel;
};

int exit_code(ErrorKind kind);
int exit_code(const RunReport& report);

/// Writes the CSV to out_csv and the report next to it as <stem>.report.json.
RunReport cmd_verify_drift(const std::filesystem::path& scenario_path, const std::filesystem::path& out_csv,
                           const RunOptions& options = {});
RunReport cmd_decompose(const std::filesystem::path& scenario_path, const std::filesystem::path& out_report,
                        const RunOptions& options = {});
RunReport cmd_commutant(const std::filesystem::path& scenario_path, const std::filesystem::path& out_report,
                        const RunOptions& options = {});

RunReport run_verify_drift(Scenario scenario, const std::filesystem::path& out_csv, const RunOptions& options = {});
RunReport run_decompose(Scenario scenario, const std::filesystem::path& out_report, const RunOptions& options = {});
RunReport run_commutant(Scenario scenario, const std::filesystem::path& out_report, const RunOptions& options = {});

/// Runs the scenario's declared command. `out_stem` gets ".csv" and/or ".report.json".
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_stem, const RunOptions& options = {});

std::string trajectory_csv(const DriftTrajectory& trajectory);
std::filesystem::path report_path_for(const std::filesystem::path& csv_path);

struct SuiteEntry {
    std::string name;
    std::string file;
    std::string command;
    std::string status;  // pass | fail | error
    int exit_code = 0;
    std::size_t checks = 0;
    std::vector<std::string> failed_checks;
    std::string error;
};

struct SuiteSummary {
    std::string suite;
    std::vector<SuiteEntry> entries;

    /// 0 iff every scenario passed, else the first nonzero code in name order.
    int exit_code() const;
    nlohmann::ordered_json to_json() const;
};

/// Runs every *.scenario.json in suite_dir (sorted by scenario name) and writes
/// per-scenario outputs plus summary.json into out_dir.
SuiteSummary cmd_suite(const std::filesystem::path& suite_dir, const std::filesystem::path& out_dir,
                       const RunOptions& options = {});

}  // namespace syncsub
