#pragma once

// Scenario files: one JSON document per run. Specs are kept in parsed but
// unresolved form so a scenario can be re-serialized and compared; resolution
// into matrices, representations and states happens in resolve_*.
//
// Schema (keys in brackets are optional):
//
//   name          string
//   command       "verify_drift" | "decompose" | "commutant"
//   observables   {name: operator}
//   [sync_pair]   [name, name]                     default ["A", "B"]
//   [matrices]    {name: operator}                 extra terms for sum(...)
//   [hamiltonian] "sharpness(eps)" | "sum(HA, HB)" | "random_compatible(eps, seed)" | matrix
//   [initial_state] "kernel(j)" | "basis(i)" | "random_kernel" | [[re, im], ...]
//   [times]       [t0, t1, ...] | {"start": a, "stop": b, "count": n}
//   [tolerances]  {"abs": x, "rel": y}
//   [seed]        integer
//   [group]       {"builtin": "cyclic(n)" | "s3"} or {"file": path}, plus "rep_a", "rep_b"
//   [expect]      extra checks, see Expectations
//
// An operator is "pauli_x" | "pauli_y" | "pauli_z" | "diag(v0, v1, ...)" |
// "identity(n)" | "zero(n)" | matrix | {"central": {label: alpha}}.
// A matrix is an array of rows, each row an array of [re, im] pairs.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "syncsub/dynamics.hpp"
#include "syncsub/group_rep.hpp"

namespace syncsub {

using RawMatrix = std::vector<std::vector<Complex>>;

struct OperatorSpec {
    enum class Kind { PauliX, PauliY, PauliZ, Diag, Identity, Zero, Inline, Central };
    Kind kind = Kind::PauliZ;
    std::vector<double> values;             // Diag
    int size = 0;                           // Identity, Zero
    RawMatrix matrix;                       // Inline
    std::map<std::string, double> alphas;   // Central

    bool operator==(const OperatorSpec&) const = default;
};

struct HamiltonianSpec {
    enum class Kind { Sharpness, Sum, RandomCompatible, Inline };
    Kind kind = Kind::Sharpness;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    std::string term_a;
    std::string term_b;
    RawMatrix matrix;

    bool operator==(const HamiltonianSpec&) const = default;
};

struct InitialStateSpec {
    enum class Kind { Kernel, Basis, RandomKernel, Inline };
    Kind kind = Kind::Kernel;
    Index index = 0;
    std::vector<Complex> amplitudes;

    bool operator==(const InitialStateSpec&) const = default;
};

struct TimeSpec {
    bool is_range = false;
    std::vector<double> values;
    double start = 0.0;
    double stop = 0.0;
    int count = 0;

    std::vector<double> expand() const;
    bool operator==(const TimeSpec&) const = default;
};

struct GroupSpec {
    std::string builtin;
    std::string file;
    std::string rep_a;
    std::string rep_b;

    bool operator==(const GroupSpec&) const = default;
};

struct Expectations {
    std::optional<double> max_drift;
    std::optional<double> epsilon_max;
    std::optional<int> kernel_dim;
    std::optional<double> diagonal_trace;
    std::optional<std::vector<int>> multiplicities_a;
    std::optional<std::vector<int>> multiplicities_b;
    std::optional<bool> strict_containment;
    std::optional<int> dimension;

    bool operator==(const Expectations&) const = default;
};

enum class Command { VerifyDrift, Decompose, Commutant };

std::string_view to_string(Command c);

struct Scenario {
    std::string name;
    Command command = Command::VerifyDrift;
    std::map<std::string, OperatorSpec> observables;
    std::array<std::string, 2> sync_pair{"A", "B"};
    std::map<std::string, OperatorSpec> matrices;
    std::optional<HamiltonianSpec> hamiltonian;
    InitialStateSpec initial_state;
    std::optional<TimeSpec> times;
    double tol_abs = Tolerance{}.abs;
    double tol_rel = Tolerance{}.rel;
    std::optional<std::uint64_t> seed;
    std::optional<GroupSpec> group;
    Expectations expect;
    std::filesystem::path base_dir;  // group files resolve relative to this

    Tolerance tolerance() const { return {tol_abs, tol_rel}; }
    bool operator==(const Scenario&) const = default;
};

/// ParseError naming the line (for syntax errors) or the field path.
Scenario parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir = ".");
Scenario parse_scenario(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const Scenario& scenario);
std::string serialize_scenario(const Scenario& scenario);

// Group files: {"label", "order", "mul_table", "irreps": [{"label", "dim",
// "characters": [[re, im], ...]}], "reps": {name: {"matrices": [matrix, ...]}}}.
struct GroupFile {
    std::string label;
    std::vector<int> mul_table;
    IrrepTable table;
    std::map<std::string, std::vector<ComplexDense>> reps;
};

GroupFile parse_group_file(const std::filesystem::path& path);

struct ResolvedGroup {
    FiniteGroup group;
    IrrepTable table;
    UnitaryRep rep_a;
    UnitaryRep rep_b;
};

struct ResolvedScenario {
    ClockObservable t_a;
    ClockObservable t_b;
    SyncOperator k;
    std::optional<ResolvedGroup> group;
};

/// Builds the sync pair (and group data when present). Representation specs are
/// "regular", "permutation" (s3), an irrep label (builtin groups), a rep name
/// from the group file, or "direct_sum(x, y, ...)" of those.
ResolvedScenario resolve_scenario(const Scenario& scenario);

ComplexDense resolve_operator(const OperatorSpec& spec, std::string_view field);

/// Hamiltonian on the sync pair's product space.
ComplexDense resolve_hamiltonian(const Scenario& scenario, const ResolvedScenario& resolved);

StateVector resolve_initial_state(const Scenario& scenario, const ResolvedScenario& resolved);

}  // namespace syncsub
