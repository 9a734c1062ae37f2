#include "syncsub/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

namespace syncsub {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr double kBoundSlack = 1e-9;
constexpr double kClosedFormTolerance = 1e-10;
constexpr double kEquivarianceTolerance = 1e-10;
constexpr double kKernelDistanceTolerance = 1e-10;
constexpr double kAlgebraTolerance = 1e-9;
constexpr double kIsotypicTolerance = 1e-10;
constexpr double kTraceTolerance = 1e-8;

json number_or_string(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json matrix_json(const ComplexDense& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::InvalidArgument, "failed writing " + path.string());
}

void write_report(const RunReport& report, const fs::path& path) { write_text(path, report.to_json().dump(2) + "\n"); }

void apply_options(Scenario& s, const RunOptions& options) {
    if (options.tol_abs) s.tol_abs = *options.tol_abs;
    if (options.tol_rel) s.tol_rel = *options.tol_rel;
    s.tolerance().validate();
}

RunReport start_report(const Scenario& s, Command command) {
    RunReport report;
    report.scenario = s.name;
    report.command = std::string(to_string(command));
    report.seed = s.seed;
    if (s.hamiltonian && s.hamiltonian->kind == HamiltonianSpec::Kind::RandomCompatible) {
        report.seed = s.hamiltonian->seed;
    }
    return report;
}

void append(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.append(buf, res.ptr);
}

std::string group_label(const Scenario& s) { return s.group->builtin.empty() ? s.group->file : s.group->builtin; }

}  // namespace

bool RunReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

void RunReport::check(std::string id, double measured, double threshold) {
    checks.push_back({std::move(id), measured <= threshold, measured, threshold});
}

json RunReport::to_json() const {
    json j = json::object();
    j["scenario"] = scenario;
    j["command"] = command;
    if (seed) j["seed"] = *seed;
    j["status"] = passed() ? "pass" : "fail";
    json records = json::array();
    for (const auto& c : checks) {
        records.push_back(json{{"check_id", c.check_id},
                               {"status", c.pass ? "pass" : "fail"},
                               {"measured", number_or_string(c.measured)},
                               {"threshold", number_or_string(c.threshold)}});
    }
    j["checks"] = records;
    j["outputs"] = outputs;
    j["details"] = details;
    return j;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return 2;
        case ErrorKind::Internal: return 4;
        default: return 3;
    }
}

int exit_code(const RunReport& report) { return report.passed() ? 0 : 1; }

std::string trajectory_csv(const DriftTrajectory& trajectory) {
    std::string out = "t,drift,bound,fidelity_sq,fidelity_floor\n";
    for (const auto& row : trajectory.rows) {
        for (double v : {row.t, row.drift, row.bound, row.fidelity_sq}) {
            append(out, v);
            out += ',';
        }
        append(out, row.fidelity_floor);
        out += '\n';
    }
    return out;
}

fs::path report_path_for(const fs::path& csv_path) {
    fs::path p = csv_path;
    return p.replace_extension(".report.json");
}

RunReport run_verify_drift(Scenario s, const fs::path& out_csv, const RunOptions& options) {
    apply_options(s, options);
    if (!s.hamiltonian) throw Error(ErrorKind::ParseError, "hamiltonian: verify_drift needs a hamiltonian");
    if (!s.times) throw Error(ErrorKind::ParseError, "times: verify_drift needs times");
    const Tolerance tol = s.tolerance();

    const ResolvedScenario r = resolve_scenario(s);
    const ComplexDense h = resolve_hamiltonian(s, r);
    const StateVector psi0 = resolve_initial_state(s, r);
    const CompatPair pair = epsilon_of(h, r.k, tol);
    const DriftTrajectory traj = drift_trajectory(r.k, pair, EvolutionSpec{h, psi0, s.times->expand()}, tol);

    RunReport report = start_report(s, Command::VerifyDrift);
    report.check("drift_bound", traj.max_bound_violation(), kBoundSlack);
    report.check("fidelity_floor", traj.max_fidelity_violation(), kBoundSlack);

    double max_drift = 0.0;
    for (const auto& row : traj.rows) max_drift = std::max(max_drift, row.drift);
    if (s.hamiltonian->kind == HamiltonianSpec::Kind::Sharpness) {
        const double eps = s.hamiltonian->epsilon;
        double worst = 0.0;
        for (const auto& row : traj.rows) {
            worst = std::max(worst, std::abs(row.drift - 2.0 * std::abs(std::sin(eps * row.t / 2.0))));
        }
        report.check("closed_form_drift", worst, kClosedFormTolerance);
    }
    if (s.expect.max_drift) report.check("max_drift", max_drift, *s.expect.max_drift);
    if (s.expect.epsilon_max) report.check("epsilon_max", pair.epsilon, *s.expect.epsilon_max);

    const std::string csv_name = out_csv.filename().string();
    const fs::path report_path = report_path_for(out_csv);
    report.outputs = {csv_name, report_path.filename().string()};
    report.details["epsilon"] = pair.epsilon;
    report.details["spectral_gap"] = number_or_string(r.k.spectral_gap);
    report.details["kernel_dim"] = r.k.kernel_dim();
    report.details["kernel_threshold"] = r.k.kernel_threshold;
    report.details["dims"] = json::array({r.k.dim_a, r.k.dim_b});
    report.details["rows"] = traj.rows.size();
    report.details["max_drift"] = max_drift;
    report.details["tolerances"] = json{{"abs", tol.abs}, {"rel", tol.rel}};

    write_text(out_csv, trajectory_csv(traj));
    write_report(report, report_path);
    return report;
}

RunReport run_decompose(Scenario s, const fs::path& out_report, const RunOptions& options) {
    apply_options(s, options);
    if (!s.group) throw Error(ErrorKind::ParseError, "group: decompose needs a group section");
    const Tolerance tol = s.tolerance();
    const ResolvedScenario r = resolve_scenario(s);
    const ResolvedGroup& g = *r.group;
    const ClassificationReport cls = verify_classification(r.t_a, r.t_b, g.rep_a, g.rep_b, g.table, tol);

    RunReport report = start_report(s, Command::Decompose);
    report.check("equivariance", cls.equivariance_residual, kEquivarianceTolerance);
    report.check("containment", cls.containment_residual, 1e-9 * (1.0 + operator_norm(r.k.k_matrix)));
    report.check("kernel_equals_diagonal", cls.kernel_distance, kKernelDistanceTolerance);

    std::vector<int> mult_a;
    std::vector<int> mult_b;
    json labels = json::array();
    for (const auto& l : cls.labels) {
        mult_a.push_back(l.multiplicity_a);
        mult_b.push_back(l.multiplicity_b);
        json entry{{"label", l.label}, {"multiplicity_a", l.multiplicity_a}, {"multiplicity_b", l.multiplicity_b}};
        entry["alpha"] = l.alpha ? json(*l.alpha) : json(nullptr);
        entry["beta"] = l.beta ? json(*l.beta) : json(nullptr);
        entry["scalar_a"] = l.scalar_a;
        entry["scalar_b"] = l.scalar_b;
        entry["equal"] = l.equal;
        labels.push_back(std::move(entry));
    }
    const auto list_distance = [](const std::vector<int>& got, const std::vector<int>& want) {
        if (got.size() != want.size()) return std::numeric_limits<double>::max();
        double d = 0.0;
        for (std::size_t i = 0; i < got.size(); ++i) d += std::abs(got[i] - want[i]);
        return d;
    };
    if (s.expect.kernel_dim) {
        report.check("kernel_dim", std::abs(static_cast<double>(cls.kernel_dim - *s.expect.kernel_dim)), 0.0);
    }
    if (s.expect.diagonal_trace) {
        report.check("diagonal_trace", std::abs(cls.diagonal_trace - *s.expect.diagonal_trace), kTraceTolerance);
    }
    if (s.expect.multiplicities_a) report.check("multiplicities_a", list_distance(mult_a, *s.expect.multiplicities_a), 0.0);
    if (s.expect.multiplicities_b) report.check("multiplicities_b", list_distance(mult_b, *s.expect.multiplicities_b), 0.0);
    if (s.expect.strict_containment) {
        report.check("strict_containment", cls.strict_containment == *s.expect.strict_containment ? 0.0 : 1.0, 0.0);
    }

    report.outputs = {out_report.filename().string()};
    report.details["group"] = group_label(s);
    report.details["order"] = g.group.order();
    report.details["labels"] = labels;
    report.details["kernel_dim"] = cls.kernel_dim;
    report.details["diagonal_trace"] = cls.diagonal_trace;
    report.details["equivariance_residual"] = cls.equivariance_residual;
    report.details["containment_residual"] = cls.containment_residual;
    report.details["kernel_distance"] = cls.kernel_distance;
    report.details["scalars_match"] = cls.scalars_match;
    report.details["central_separating"] = cls.central_separating;
    report.details["strict_containment"] = cls.strict_containment;
    report.details["tolerances"] = json{{"abs", tol.abs}, {"rel", tol.rel}};

    write_report(report, out_report);
    return report;
}

RunReport run_commutant(Scenario s, const fs::path& out_report, const RunOptions& options) {
    apply_options(s, options);
    if (!s.group) throw Error(ErrorKind::ParseError, "group: commutant needs a group section");
    const Tolerance tol = s.tolerance();
    const ResolvedScenario r = resolve_scenario(s);
    const ResolvedGroup& g = *r.group;
    const UnitaryRep joint = joint_rep(g.rep_a, g.rep_b);

    std::optional<ComplexDense> pi_g;
    if (isotypic_projectors(g.rep_a, g.table).multiplicity_free() &&
        isotypic_projectors(g.rep_b, g.table).multiplicity_free()) {
        pi_g = diagonal_isotypic(g.rep_a, g.rep_b, g.table);
    }
    const SyncAlgebra alg = sync_preserving_algebra(joint, r.k, tol, pi_g);

    double star = 0.0;
    for (const auto& x : alg.algebra.basis) star = std::max(star, span_residual(alg.algebra, x.adjoint()));
    const double unit = span_residual(alg.algebra, identity(r.k.dim()));
    const auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };

    RunReport report = start_report(s, Command::Commutant);
    report.check("kernel_preservation", max_of(alg.kernel_residuals), kAlgebraTolerance);
    report.check("star_closed", star, kAlgebraTolerance);
    report.check("contains_identity", unit, kAlgebraTolerance);
    if (pi_g) report.check("isotypic_preservation", max_of(alg.isotypic_residuals), kIsotypicTolerance);
    if (s.expect.dimension) {
        report.check("dimension", std::abs(static_cast<double>(alg.algebra.dimension() - *s.expect.dimension)), 0.0);
    }

    json basis = json::array();
    for (const auto& x : alg.algebra.basis) basis.push_back(matrix_json(x));
    report.outputs = {out_report.filename().string()};
    report.details["group"] = group_label(s);
    report.details["order"] = g.group.order();
    report.details["space_dim"] = r.k.dim();
    report.details["dimension"] = alg.algebra.dimension();
    report.details["constraints"] = alg.algebra.constraint_set_description;
    report.details["kernel_residuals"] = alg.kernel_residuals;
    report.details["isotypic_residuals"] = alg.isotypic_residuals;
    report.details["star_closure_residual"] = star;
    report.details["identity_residual"] = unit;
    report.details["basis"] = basis;
    report.details["tolerances"] = json{{"abs", tol.abs}, {"rel", tol.rel}};

    write_report(report, out_report);
    return report;
}

RunReport cmd_verify_drift(const fs::path& scenario_path, const fs::path& out_csv, const RunOptions& options) {
    return run_verify_drift(parse_scenario(scenario_path), out_csv, options);
}

RunReport cmd_decompose(const fs::path& scenario_path, const fs::path& out_report, const RunOptions& options) {
    return run_decompose(parse_scenario(scenario_path), out_report, options);
}

RunReport cmd_commutant(const fs::path& scenario_path, const fs::path& out_report, const RunOptions& options) {
    return run_commutant(parse_scenario(scenario_path), out_report, options);
}

RunReport run_scenario(const Scenario& s, const fs::path& out_stem, const RunOptions& options) {
    fs::path stem = out_stem;
    switch (s.command) {
        case Command::VerifyDrift: return run_verify_drift(s, stem.concat(".csv"), options);
        case Command::Decompose: return run_decompose(s, stem.concat(".report.json"), options);
        case Command::Commutant: return run_commutant(s, stem.concat(".report.json"), options);
    }
    throw Error(ErrorKind::Internal, "unhandled command");
}

int SuiteSummary::exit_code() const {
    for (const auto& e : entries) {
        if (e.exit_code != 0) return e.exit_code;
    }
    return 0;
}

json SuiteSummary::to_json() const {
    std::size_t total = 0;
    std::size_t failed = 0;
    json list = json::array();
    for (const auto& e : entries) {
        total += e.checks;
        failed += e.failed_checks.size();
        json entry{{"name", e.name}, {"file", e.file}, {"command", e.command}, {"status", e.status},
                   {"exit_code", e.exit_code}, {"checks", e.checks}, {"failed_checks", e.failed_checks}};
        if (!e.error.empty()) entry["error"] = e.error;
        list.push_back(std::move(entry));
    }
    json j = json::object();
    j["suite"] = suite;
    j["status"] = exit_code() == 0 ? "pass" : "fail";
    j["exit_code"] = exit_code();
    j["scenario_count"] = entries.size();
    j["total_checks"] = total;
    j["failed_checks"] = failed;
    j["scenarios"] = list;
    return j;
}

SuiteSummary cmd_suite(const fs::path& suite_dir, const fs::path& out_dir, const RunOptions& options) {
    if (!fs::is_directory(suite_dir)) throw Error(ErrorKind::InvalidArgument, suite_dir.string() + " is not a directory");
    constexpr std::string_view suffix = ".scenario.json";

    struct Pending {
        SuiteEntry entry;
        std::optional<Scenario> scenario;
        fs::path stem;
    };
    std::vector<Pending> pending;
    for (const auto& item : fs::directory_iterator(suite_dir)) {
        const std::string file = item.path().filename().string();
        if (!item.is_regular_file() || !file.ends_with(suffix)) continue;
        Pending p;
        p.entry.file = file;
        p.entry.name = file.substr(0, file.size() - suffix.size());
        p.stem = out_dir / p.entry.name;
        try {
            p.scenario = parse_scenario(item.path());
            p.entry.name = p.scenario->name;
            p.entry.command = std::string(to_string(p.scenario->command));
        } catch (const Error& e) {
            p.entry.status = "error";
            p.entry.exit_code = exit_code(e.kind());
            p.entry.error = e.what();
        }
        pending.push_back(std::move(p));
    }
    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
        return std::tie(a.entry.name, a.entry.file) < std::tie(b.entry.name, b.entry.file);
    });

    fs::create_directories(out_dir);
    SuiteSummary summary;
    summary.suite = suite_dir.filename().empty() ? suite_dir.parent_path().filename().string()
                                                 : suite_dir.filename().string();
    for (auto& p : pending) {
        if (p.scenario) {
            try {
                const RunReport report = run_scenario(*p.scenario, p.stem, options);
                p.entry.checks = report.checks.size();
                for (const auto& c : report.checks) {
                    if (!c.pass) p.entry.failed_checks.push_back(c.check_id);
                }
                p.entry.exit_code = exit_code(report);
                p.entry.status = report.passed() ? "pass" : "fail";
            } catch (const Error& e) {
                p.entry.status = "error";
                p.entry.exit_code = exit_code(e.kind());
                p.entry.error = e.what();
            } catch (const std::exception& e) {
                p.entry.status = "error";
                p.entry.exit_code = 4;
                p.entry.error = e.what();
            }
        }
        summary.entries.push_back(std::move(p.entry));
    }
    write_text(out_dir / "summary.json", summary.to_json().dump(2) + "\n");
    return summary;
}

}  // namespace syncsub
