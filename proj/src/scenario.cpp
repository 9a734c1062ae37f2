#include "syncsub/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace syncsub {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(std::string_view field, const std::string& msg) {
    throw Error(ErrorKind::ParseError, std::string(field) + ": " + msg);
}

std::string join(std::string_view a, std::string_view b) {
    if (a.empty()) return std::string(b);
    return std::string(a) + "." + std::string(b);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

struct Call {
    std::string name;
    std::vector<std::string> args;
    bool has_parens = false;
};

/// "name(a, b(c, d), e)" -> name + top-level args. A bare word has no parens.
Call parse_call(std::string_view text, std::string_view field) {
    text = trim(text);
    Call call;
    const auto open = text.find('(');
    if (open == std::string_view::npos) {
        if (text.empty()) parse_fail(field, "empty expression");
        call.name = std::string(text);
        return call;
    }
    if (text.back() != ')') parse_fail(field, "expected ')' at end of '" + std::string(text) + "'");
    call.name = std::string(trim(text.substr(0, open)));
    call.has_parens = true;
    const std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    int depth = 0;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
        const char c = i < inner.size() ? inner[i] : ',';
        if (c == '(') ++depth;
        if (c == ')' && --depth < 0) parse_fail(field, "unbalanced parentheses");
        if (c == ',' && depth == 0) {
            const std::string_view arg = trim(inner.substr(begin, i - begin));
            if (arg.empty()) {
                if (i == inner.size() && call.args.empty() && trim(inner).empty()) break;
                parse_fail(field, "empty argument in '" + std::string(text) + "'");
            }
            call.args.emplace_back(arg);
            begin = i + 1;
        }
    }
    if (depth != 0) parse_fail(field, "unbalanced parentheses");
    return call;
}

double parse_double(std::string_view text, std::string_view field) {
    text = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        parse_fail(field, "expected a finite number, got '" + std::string(text) + "'");
    }
    return value;
}

template <class Int>
Int parse_integer(std::string_view text, std::string_view field) {
    text = trim(text);
    Int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        parse_fail(field, "expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void require_args(const Call& call, std::size_t n, std::string_view field) {
    if (!call.has_parens || call.args.size() != n) {
        parse_fail(field, "'" + call.name + "' takes " + std::to_string(n) + " argument(s)");
    }
}

void require_keys(const json& obj, std::string_view field, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) parse_fail(field, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            parse_fail(join(field, key), "unknown key");
        }
    }
}

const json& member(const json& obj, std::string_view key, std::string_view field) {
    const auto it = obj.find(key);
    if (it == obj.end()) parse_fail(join(field, key), "missing required key");
    return *it;
}

std::string get_string(const json& j, std::string_view field) {
    if (!j.is_string()) parse_fail(field, "expected a string");
    return j.get<std::string>();
}

double get_number(const json& j, std::string_view field) {
    if (!j.is_number()) parse_fail(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) parse_fail(field, "expected a finite number");
    return v;
}

std::int64_t get_int(const json& j, std::string_view field) {
    if (!j.is_number_integer()) parse_fail(field, "expected an integer");
    return j.get<std::int64_t>();
}

Complex parse_complex(const json& j, std::string_view field) {
    if (j.is_number()) return {get_number(j, field), 0.0};
    if (!j.is_array() || j.size() != 2) parse_fail(field, "expected [re, im]");
    return {get_number(j[0], field), get_number(j[1], field)};
}

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

std::vector<Complex> parse_complex_vector(const json& j, std::string_view field) {
    if (!j.is_array() || j.empty()) parse_fail(field, "expected a non-empty array of [re, im] pairs");
    std::vector<Complex> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_complex(j[i], std::string(field) + "[" + std::to_string(i) + "]"));
    return out;
}

RawMatrix parse_raw_matrix(const json& j, std::string_view field) {
    if (!j.is_array() || j.empty()) parse_fail(field, "expected a non-empty array of rows");
    RawMatrix m;
    for (std::size_t r = 0; r < j.size(); ++r) {
        m.push_back(parse_complex_vector(j[r], std::string(field) + "[" + std::to_string(r) + "]"));
        if (m.back().size() != m.front().size()) parse_fail(field, "rows have different lengths");
    }
    return m;
}

json raw_matrix_to_json(const RawMatrix& m) {
    json rows = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (Complex c : row) r.push_back(complex_to_json(c));
        rows.push_back(std::move(r));
    }
    return rows;
}

ComplexDense to_dense(const RawMatrix& m) {
    ComplexDense out(static_cast<Index>(m.size()), static_cast<Index>(m.front().size()));
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (std::size_t c = 0; c < m[r].size(); ++c) out(static_cast<Index>(r), static_cast<Index>(c)) = m[r][c];
    }
    return out;
}

ComplexDense parse_dense(const json& j, std::string_view field) { return to_dense(parse_raw_matrix(j, field)); }

OperatorSpec parse_operator(const json& j, std::string_view field) {
    OperatorSpec spec;
    if (j.is_array()) {
        spec.kind = OperatorSpec::Kind::Inline;
        spec.matrix = parse_raw_matrix(j, field);
        if (spec.matrix.size() != spec.matrix.front().size()) parse_fail(field, "matrix must be square");
        return spec;
    }
    if (j.is_object()) {
        require_keys(j, field, {"central"});
        const json& alphas = member(j, "central", field);
        if (!alphas.is_object() || alphas.empty()) parse_fail(join(field, "central"), "expected {label: alpha}");
        spec.kind = OperatorSpec::Kind::Central;
        for (const auto& [label, value] : alphas.items()) {
            spec.alphas[label] = get_number(value, join(join(field, "central"), label));
        }
        return spec;
    }
    const Call call = parse_call(get_string(j, field), field);
    if (!call.has_parens) {
        if (call.name == "pauli_x") spec.kind = OperatorSpec::Kind::PauliX;
        else if (call.name == "pauli_y") spec.kind = OperatorSpec::Kind::PauliY;
        else if (call.name == "pauli_z") spec.kind = OperatorSpec::Kind::PauliZ;
        else parse_fail(field, "unknown operator '" + call.name + "'");
        return spec;
    }
    if (call.name == "diag") {
        if (call.args.empty()) parse_fail(field, "diag needs at least one value");
        spec.kind = OperatorSpec::Kind::Diag;
        for (const auto& a : call.args) spec.values.push_back(parse_double(a, field));
    } else if (call.name == "identity" || call.name == "zero") {
        require_args(call, 1, field);
        spec.kind = call.name == "identity" ? OperatorSpec::Kind::Identity : OperatorSpec::Kind::Zero;
        spec.size = parse_integer<int>(call.args[0], field);
        if (spec.size < 1) parse_fail(field, "size must be at least 1");
    } else {
        parse_fail(field, "unknown operator '" + call.name + "'");
    }
    return spec;
}

json operator_to_json(const OperatorSpec& spec) {
    switch (spec.kind) {
        case OperatorSpec::Kind::PauliX: return "pauli_x";
        case OperatorSpec::Kind::PauliY: return "pauli_y";
        case OperatorSpec::Kind::PauliZ: return "pauli_z";
        case OperatorSpec::Kind::Diag: {
            std::string s = "diag(";
            for (std::size_t i = 0; i < spec.values.size(); ++i) s += (i ? ", " : "") + format_double(spec.values[i]);
            return s + ")";
        }
        case OperatorSpec::Kind::Identity: return "identity(" + std::to_string(spec.size) + ")";
        case OperatorSpec::Kind::Zero: return "zero(" + std::to_string(spec.size) + ")";
        case OperatorSpec::Kind::Inline: return raw_matrix_to_json(spec.matrix);
        case OperatorSpec::Kind::Central: {
            json alphas = json::object();
            for (const auto& [label, value] : spec.alphas) alphas[label] = value;
            return json{{"central", alphas}};
        }
    }
    throw Error(ErrorKind::Internal, "unhandled operator kind");
}

HamiltonianSpec parse_hamiltonian(const json& j, std::string_view field) {
    HamiltonianSpec spec;
    if (j.is_array()) {
        spec.kind = HamiltonianSpec::Kind::Inline;
        spec.matrix = parse_raw_matrix(j, field);
        if (spec.matrix.size() != spec.matrix.front().size()) parse_fail(field, "matrix must be square");
        return spec;
    }
    const Call call = parse_call(get_string(j, field), field);
    if (call.name == "sharpness") {
        require_args(call, 1, field);
        spec.kind = HamiltonianSpec::Kind::Sharpness;
        spec.epsilon = parse_double(call.args[0], field);
        if (spec.epsilon <= 0.0) parse_fail(field, "sharpness epsilon must be positive");
    } else if (call.name == "sum") {
        require_args(call, 2, field);
        spec.kind = HamiltonianSpec::Kind::Sum;
        spec.term_a = call.args[0];
        spec.term_b = call.args[1];
    } else if (call.name == "random_compatible") {
        require_args(call, 2, field);
        spec.kind = HamiltonianSpec::Kind::RandomCompatible;
        spec.epsilon = parse_double(call.args[0], field);
        if (spec.epsilon < 0.0) parse_fail(field, "epsilon must be non-negative");
        std::string_view seed = call.args[1];
        if (seed.starts_with("seed=")) seed.remove_prefix(5);
        spec.seed = parse_integer<std::uint64_t>(seed, field);
    } else {
        parse_fail(field, "unknown hamiltonian '" + call.name + "'");
    }
    return spec;
}

json hamiltonian_to_json(const HamiltonianSpec& spec) {
    switch (spec.kind) {
        case HamiltonianSpec::Kind::Sharpness: return "sharpness(" + format_double(spec.epsilon) + ")";
        case HamiltonianSpec::Kind::Sum: return "sum(" + spec.term_a + ", " + spec.term_b + ")";
        case HamiltonianSpec::Kind::RandomCompatible:
            return "random_compatible(" + format_double(spec.epsilon) + ", " + std::to_string(spec.seed) + ")";
        case HamiltonianSpec::Kind::Inline: return raw_matrix_to_json(spec.matrix);
    }
    throw Error(ErrorKind::Internal, "unhandled hamiltonian kind");
}

InitialStateSpec parse_initial_state(const json& j, std::string_view field) {
    InitialStateSpec spec;
    if (j.is_array()) {
        spec.kind = InitialStateSpec::Kind::Inline;
        spec.amplitudes = parse_complex_vector(j, field);
        return spec;
    }
    const Call call = parse_call(get_string(j, field), field);
    if (call.name == "random_kernel" && !call.has_parens) {
        spec.kind = InitialStateSpec::Kind::RandomKernel;
    } else if (call.name == "kernel" || call.name == "basis") {
        require_args(call, 1, field);
        spec.kind = call.name == "kernel" ? InitialStateSpec::Kind::Kernel : InitialStateSpec::Kind::Basis;
        spec.index = parse_integer<Index>(call.args[0], field);
        if (spec.index < 0) parse_fail(field, "index must be non-negative");
    } else {
        parse_fail(field, "unknown initial state '" + call.name + "'");
    }
    return spec;
}

json initial_state_to_json(const InitialStateSpec& spec) {
    switch (spec.kind) {
        case InitialStateSpec::Kind::Kernel: return "kernel(" + std::to_string(spec.index) + ")";
        case InitialStateSpec::Kind::Basis: return "basis(" + std::to_string(spec.index) + ")";
        case InitialStateSpec::Kind::RandomKernel: return "random_kernel";
        case InitialStateSpec::Kind::Inline: {
            json a = json::array();
            for (Complex c : spec.amplitudes) a.push_back(complex_to_json(c));
            return a;
        }
    }
    throw Error(ErrorKind::Internal, "unhandled initial state kind");
}

TimeSpec parse_times(const json& j, std::string_view field) {
    TimeSpec spec;
    if (j.is_array()) {
        if (j.empty()) parse_fail(field, "expected at least one time");
        for (std::size_t i = 0; i < j.size(); ++i) spec.values.push_back(get_number(j[i], std::string(field) + "[" + std::to_string(i) + "]"));
        for (std::size_t i = 1; i < spec.values.size(); ++i) {
            if (!(spec.values[i] > spec.values[i - 1])) parse_fail(field, "times must be strictly increasing");
        }
        return spec;
    }
    require_keys(j, field, {"start", "stop", "count"});
    spec.is_range = true;
    spec.start = get_number(member(j, "start", field), join(field, "start"));
    spec.stop = get_number(member(j, "stop", field), join(field, "stop"));
    const std::int64_t count = get_int(member(j, "count", field), join(field, "count"));
    if (count < 1 || count > 10'000'000) parse_fail(join(field, "count"), "count must be in [1, 1e7]");
    spec.count = static_cast<int>(count);
    if (spec.count > 1 && !(spec.stop > spec.start)) parse_fail(field, "stop must exceed start");
    return spec;
}

json times_to_json(const TimeSpec& spec) {
    if (!spec.is_range) return spec.values;
    return json{{"start", spec.start}, {"stop", spec.stop}, {"count", spec.count}};
}

void validate_builtin_name(const std::string& name, std::string_view field) {
    const Call call = parse_call(name, field);
    if (call.name == "s3" && !call.has_parens) return;
    if (call.name == "cyclic") {
        require_args(call, 1, field);
        if (parse_integer<int>(call.args[0], field) >= 1) return;
        parse_fail(field, "cyclic order must be at least 1");
    }
    parse_fail(field, "unknown builtin group '" + name + "'");
}

GroupSpec parse_group(const json& j, std::string_view field) {
    require_keys(j, field, {"builtin", "file", "rep_a", "rep_b"});
    GroupSpec spec;
    const bool has_builtin = j.contains("builtin");
    const bool has_file = j.contains("file");
    if (has_builtin == has_file) parse_fail(field, "exactly one of 'builtin' or 'file' is required");
    if (has_builtin) {
        spec.builtin = get_string(j["builtin"], join(field, "builtin"));
        validate_builtin_name(spec.builtin, join(field, "builtin"));
    } else {
        spec.file = get_string(j["file"], join(field, "file"));
    }
    spec.rep_a = get_string(member(j, "rep_a", field), join(field, "rep_a"));
    spec.rep_b = get_string(member(j, "rep_b", field), join(field, "rep_b"));
    parse_call(spec.rep_a, join(field, "rep_a"));
    parse_call(spec.rep_b, join(field, "rep_b"));
    return spec;
}

json group_to_json(const GroupSpec& spec) {
    json j = json::object();
    if (!spec.builtin.empty()) j["builtin"] = spec.builtin;
    else j["file"] = spec.file;
    j["rep_a"] = spec.rep_a;
    j["rep_b"] = spec.rep_b;
    return j;
}

std::vector<int> parse_int_list(const json& j, std::string_view field) {
    if (!j.is_array()) parse_fail(field, "expected an array of integers");
    std::vector<int> out;
    for (const auto& v : j) out.push_back(static_cast<int>(get_int(v, field)));
    return out;
}

Expectations parse_expect(const json& j, std::string_view field) {
    require_keys(j, field, {"max_drift", "epsilon_max", "kernel_dim", "diagonal_trace", "multiplicities_a",
                            "multiplicities_b", "strict_containment", "dimension"});
    Expectations e;
    if (j.contains("max_drift")) e.max_drift = get_number(j["max_drift"], join(field, "max_drift"));
    if (j.contains("epsilon_max")) e.epsilon_max = get_number(j["epsilon_max"], join(field, "epsilon_max"));
    if (j.contains("kernel_dim")) e.kernel_dim = static_cast<int>(get_int(j["kernel_dim"], join(field, "kernel_dim")));
    if (j.contains("diagonal_trace")) e.diagonal_trace = get_number(j["diagonal_trace"], join(field, "diagonal_trace"));
    if (j.contains("multiplicities_a")) e.multiplicities_a = parse_int_list(j["multiplicities_a"], join(field, "multiplicities_a"));
    if (j.contains("multiplicities_b")) e.multiplicities_b = parse_int_list(j["multiplicities_b"], join(field, "multiplicities_b"));
    if (j.contains("strict_containment")) {
        if (!j["strict_containment"].is_boolean()) parse_fail(join(field, "strict_containment"), "expected a boolean");
        e.strict_containment = j["strict_containment"].get<bool>();
    }
    if (j.contains("dimension")) e.dimension = static_cast<int>(get_int(j["dimension"], join(field, "dimension")));
    return e;
}

json expect_to_json(const Expectations& e) {
    json j = json::object();
    if (e.max_drift) j["max_drift"] = *e.max_drift;
    if (e.epsilon_max) j["epsilon_max"] = *e.epsilon_max;
    if (e.kernel_dim) j["kernel_dim"] = *e.kernel_dim;
    if (e.diagonal_trace) j["diagonal_trace"] = *e.diagonal_trace;
    if (e.multiplicities_a) j["multiplicities_a"] = *e.multiplicities_a;
    if (e.multiplicities_b) j["multiplicities_b"] = *e.multiplicities_b;
    if (e.strict_containment) j["strict_containment"] = *e.strict_containment;
    if (e.dimension) j["dimension"] = *e.dimension;
    return j;
}

Command parse_command(const json& j, std::string_view field) {
    const std::string s = get_string(j, field);
    if (s == "verify_drift") return Command::VerifyDrift;
    if (s == "decompose") return Command::Decompose;
    if (s == "commutant") return Command::Commutant;
    parse_fail(field, "unknown command '" + s + "'");
}

json parse_json_text(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
        const std::string_view before = text.substr(0, byte);
        const auto line = 1 + std::count(before.begin(), before.end(), '\n');
        const auto last_nl = before.rfind('\n');
        const auto column = last_nl == std::string_view::npos ? byte : byte - last_nl - 1;
        std::ostringstream msg;
        msg << "line " << line << ", column " << column << ": malformed JSON";
        throw Error(ErrorKind::ParseError, msg.str());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void check_references(const Scenario& s) {
    for (std::size_t i = 0; i < 2; ++i) {
        const std::string field = "sync_pair[" + std::to_string(i) + "]";
        const auto it = s.observables.find(s.sync_pair[i]);
        if (it == s.observables.end()) parse_fail(field, "unknown observable '" + s.sync_pair[i] + "'");
        if (it->second.kind == OperatorSpec::Kind::Central && !s.group) {
            parse_fail("observables." + s.sync_pair[i], "central observables need a group section");
        }
    }
    if (s.hamiltonian && s.hamiltonian->kind == HamiltonianSpec::Kind::Sum) {
        for (const auto& term : {s.hamiltonian->term_a, s.hamiltonian->term_b}) {
            if (!s.matrices.contains(term) && !s.observables.contains(term)) {
                parse_fail("hamiltonian", "unknown term '" + term + "'");
            }
        }
    }
    if (s.initial_state.kind == InitialStateSpec::Kind::RandomKernel && !s.seed) {
        parse_fail("initial_state", "random_kernel needs a top-level seed");
    }
    switch (s.command) {
        case Command::VerifyDrift:
            if (!s.hamiltonian) parse_fail("hamiltonian", "verify_drift needs a hamiltonian");
            if (!s.times) parse_fail("times", "verify_drift needs times");
            break;
        case Command::Decompose:
        case Command::Commutant:
            if (!s.group) parse_fail("group", std::string(to_string(s.command)) + " needs a group section");
            break;
    }
}

}  // namespace

std::string_view to_string(Command c) {
    switch (c) {
        case Command::VerifyDrift: return "verify_drift";
        case Command::Decompose: return "decompose";
        case Command::Commutant: return "commutant";
    }
    return "unknown";
}

std::vector<double> TimeSpec::expand() const {
    if (!is_range) return values;
    if (count == 1) return {start};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
    out.back() = stop;
    return out;
}

Scenario parse_scenario_text(std::string_view text, const std::filesystem::path& base_dir) {
    const json root = parse_json_text(text);
    require_keys(root, "", {"name", "command", "observables", "sync_pair", "matrices", "hamiltonian", "initial_state",
                            "times", "tolerances", "seed", "group", "expect"});

    Scenario s;
    s.base_dir = base_dir;
    s.name = get_string(member(root, "name", ""), "name");
    if (s.name.empty()) parse_fail("name", "must not be empty");
    s.command = parse_command(member(root, "command", ""), "command");

    const json& observables = member(root, "observables", "");
    if (!observables.is_object() || observables.empty()) parse_fail("observables", "expected a non-empty object");
    for (const auto& [name, spec] : observables.items()) s.observables[name] = parse_operator(spec, "observables." + name);

    if (root.contains("sync_pair")) {
        const json& pair = root["sync_pair"];
        if (!pair.is_array() || pair.size() != 2) parse_fail("sync_pair", "expected two observable names");
        s.sync_pair = {get_string(pair[0], "sync_pair[0]"), get_string(pair[1], "sync_pair[1]")};
    }
    if (root.contains("matrices")) {
        const json& matrices = root["matrices"];
        if (!matrices.is_object()) parse_fail("matrices", "expected an object");
        for (const auto& [name, spec] : matrices.items()) {
            s.matrices[name] = parse_operator(spec, "matrices." + name);
            if (s.matrices[name].kind == OperatorSpec::Kind::Central) parse_fail("matrices." + name, "central is only valid for observables");
        }
    }
    if (root.contains("hamiltonian")) s.hamiltonian = parse_hamiltonian(root["hamiltonian"], "hamiltonian");
    if (root.contains("initial_state")) s.initial_state = parse_initial_state(root["initial_state"], "initial_state");
    if (root.contains("times")) s.times = parse_times(root["times"], "times");
    if (root.contains("tolerances")) {
        const json& tol = root["tolerances"];
        require_keys(tol, "tolerances", {"abs", "rel"});
        if (tol.contains("abs")) s.tol_abs = get_number(tol["abs"], "tolerances.abs");
        if (tol.contains("rel")) s.tol_rel = get_number(tol["rel"], "tolerances.rel");
        if (s.tol_abs < 0.0 || s.tol_rel < 0.0) parse_fail("tolerances", "tolerances must be non-negative");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) parse_fail("seed", "expected a non-negative integer");
        s.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("group")) s.group = parse_group(root["group"], "group");
    if (root.contains("expect")) s.expect = parse_expect(root["expect"], "expect");

    check_references(s);
    return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return parse_scenario_text(text, path.parent_path());
    } catch (const Error& e) {
        throw Error(e.kind(), path.filename().string() + ": " + e.detail());
    }
}

json to_json(const Scenario& s) {
    json j = json::object();
    j["name"] = s.name;
    j["command"] = std::string(to_string(s.command));
    json observables = json::object();
    for (const auto& [name, spec] : s.observables) observables[name] = operator_to_json(spec);
    j["observables"] = observables;
    j["sync_pair"] = json::array({s.sync_pair[0], s.sync_pair[1]});
    if (!s.matrices.empty()) {
        json matrices = json::object();
        for (const auto& [name, spec] : s.matrices) matrices[name] = operator_to_json(spec);
        j["matrices"] = matrices;
    }
    if (s.hamiltonian) j["hamiltonian"] = hamiltonian_to_json(*s.hamiltonian);
    j["initial_state"] = initial_state_to_json(s.initial_state);
    if (s.times) j["times"] = times_to_json(*s.times);
    j["tolerances"] = json{{"abs", s.tol_abs}, {"rel", s.tol_rel}};
    if (s.seed) j["seed"] = *s.seed;
    if (s.group) j["group"] = group_to_json(*s.group);
    const json expect = expect_to_json(s.expect);
    if (!expect.empty()) j["expect"] = expect;
    return j;
}

std::string serialize_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

GroupFile parse_group_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json root;
    try {
        root = parse_json_text(text);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, path.filename().string() + ": " + e.detail());
    }
    const std::string file = path.filename().string();
    require_keys(root, file, {"label", "order", "mul_table", "irreps", "reps"});

    GroupFile g;
    g.label = root.contains("label") ? get_string(root["label"], file + ".label") : path.stem().string();
    const std::int64_t order = get_int(member(root, "order", file), file + ".order");
    if (order < 1 || order > 1000) parse_fail(file + ".order", "order must be in [1, 1000]");
    g.mul_table = parse_int_list(member(root, "mul_table", file), file + ".mul_table");
    if (static_cast<std::int64_t>(g.mul_table.size()) != order * order) {
        parse_fail(file + ".mul_table", "expected order^2 entries");
    }

    const json& irreps = member(root, "irreps", file);
    if (!irreps.is_array() || irreps.empty()) parse_fail(file + ".irreps", "expected a non-empty array");
    for (std::size_t i = 0; i < irreps.size(); ++i) {
        const std::string field = file + ".irreps[" + std::to_string(i) + "]";
        require_keys(irreps[i], field, {"label", "dim", "characters"});
        g.table.labels.push_back(get_string(member(irreps[i], "label", field), field + ".label"));
        g.table.dims.push_back(static_cast<int>(get_int(member(irreps[i], "dim", field), field + ".dim")));
        g.table.characters.push_back(parse_complex_vector(member(irreps[i], "characters", field), field + ".characters"));
        if (static_cast<std::int64_t>(g.table.characters.back().size()) != order) {
            parse_fail(field + ".characters", "expected one character per element");
        }
    }

    if (root.contains("reps")) {
        const json& reps = root["reps"];
        if (!reps.is_object()) parse_fail(file + ".reps", "expected an object");
        for (const auto& [name, rep] : reps.items()) {
            const std::string field = file + ".reps." + name;
            require_keys(rep, field, {"matrices"});
            const json& mats = member(rep, "matrices", field);
            if (!mats.is_array() || static_cast<std::int64_t>(mats.size()) != order) {
                parse_fail(field + ".matrices", "expected one matrix per element");
            }
            std::vector<ComplexDense> out;
            for (std::size_t e = 0; e < mats.size(); ++e) out.push_back(parse_dense(mats[e], field + ".matrices[" + std::to_string(e) + "]"));
            g.reps[name] = std::move(out);
        }
    }
    return g;
}

ComplexDense resolve_operator(const OperatorSpec& spec, std::string_view field) {
    ComplexDense m;
    switch (spec.kind) {
        case OperatorSpec::Kind::PauliX:
            m = ComplexDense::Zero(2, 2);
            m(0, 1) = m(1, 0) = 1.0;
            return m;
        case OperatorSpec::Kind::PauliY:
            m = ComplexDense::Zero(2, 2);
            m(0, 1) = Complex(0, -1);
            m(1, 0) = Complex(0, 1);
            return m;
        case OperatorSpec::Kind::PauliZ: return pauli_z().matrix;
        case OperatorSpec::Kind::Diag: return diagonal_observable(spec.values).matrix;
        case OperatorSpec::Kind::Identity: return identity(spec.size);
        case OperatorSpec::Kind::Zero: return ComplexDense::Zero(spec.size, spec.size);
        case OperatorSpec::Kind::Inline: return to_dense(spec.matrix);
        case OperatorSpec::Kind::Central: break;
    }
    throw Error(ErrorKind::InvalidArgument, std::string(field) + ": central observables resolve against a representation");
}

namespace {

UnitaryRep resolve_rep(const std::string& text, std::string_view field, const FiniteGroup& group,
                       const IrrepTable& table, const std::vector<UnitaryRep>& irreps, bool is_s3,
                       const std::map<std::string, std::vector<ComplexDense>>& file_reps) {
    const Call call = parse_call(text, field);
    if (call.name == "direct_sum" && call.has_parens) {
        if (call.args.empty()) parse_fail(field, "direct_sum needs at least one part");
        std::vector<UnitaryRep> parts;
        for (const auto& arg : call.args) parts.push_back(resolve_rep(arg, field, group, table, irreps, is_s3, file_reps));
        return direct_sum(parts);
    }
    if (call.has_parens) parse_fail(field, "unknown representation '" + text + "'");
    if (call.name == "regular") return regular_rep(group);
    if (call.name == "permutation") {
        if (!is_s3) parse_fail(field, "'permutation' is only defined for s3");
        return s3_permutation_rep();
    }
    if (const auto it = file_reps.find(call.name); it != file_reps.end()) return UnitaryRep::make(group, it->second);
    if (const auto idx = table.index_of(call.name); idx && *idx < irreps.size()) return irreps[*idx];
    parse_fail(field, "unknown representation '" + call.name + "'");
}

ResolvedGroup resolve_group(const Scenario& s) {
    const GroupSpec& spec = *s.group;
    const Tolerance tol = s.tolerance();
    std::optional<FiniteGroup> group;
    IrrepTable table;
    std::vector<UnitaryRep> irreps;
    std::map<std::string, std::vector<ComplexDense>> file_reps;
    bool is_s3 = false;
    if (!spec.builtin.empty()) {
        BuiltinGroup b = builtin_group(spec.builtin);
        group = b.group;
        table = std::move(b.table);
        irreps = std::move(b.irreps);
        is_s3 = spec.builtin == "s3";
    } else {
        GroupFile file = parse_group_file(s.base_dir / spec.file);
        group = FiniteGroup::from_table(file.mul_table, file.label);
        table = std::move(file.table);
        table.validate(*group);
        file_reps = std::move(file.reps);
    }
    UnitaryRep rep_a = resolve_rep(spec.rep_a, "group.rep_a", *group, table, irreps, is_s3, file_reps);
    UnitaryRep rep_b = resolve_rep(spec.rep_b, "group.rep_b", *group, table, irreps, is_s3, file_reps);
    validate_rep(rep_a, tol);
    validate_rep(rep_b, tol);
    return ResolvedGroup{*group, std::move(table), std::move(rep_a), std::move(rep_b)};
}

ComplexDense resolve_named(const Scenario& s, const std::string& name, std::string_view field) {
    if (const auto it = s.matrices.find(name); it != s.matrices.end()) return resolve_operator(it->second, field);
    return resolve_operator(s.observables.at(name), field);
}

}  // namespace

ResolvedScenario resolve_scenario(const Scenario& s) {
    const Tolerance tol = s.tolerance();
    tol.validate();
    std::optional<ResolvedGroup> group;
    if (s.group) group = resolve_group(s);

    std::vector<ClockObservable> pair;
    for (std::size_t slot = 0; slot < 2; ++slot) {
        const std::string& name = s.sync_pair[slot];
        const OperatorSpec& spec = s.observables.at(name);
        const std::string field = "observables." + name;
        if (spec.kind == OperatorSpec::Kind::Central) {
            const UnitaryRep& rep = slot == 0 ? group->rep_a : group->rep_b;
            ClockObservable t = central_observable(rep, isotypic_projectors(rep, group->table), spec.alphas);
            t.label = name;
            pair.push_back(std::move(t));
        } else {
            pair.push_back(ClockObservable::make(resolve_operator(spec, field), name, tol));
        }
    }
    if (group) {
        if (group->rep_a.dim() != pair[0].dim() || group->rep_b.dim() != pair[1].dim()) {
            throw Error(ErrorKind::DimMismatch, "representation dimensions do not match the sync pair");
        }
    }
    SyncOperator k = build_sync_operator(pair[0], pair[1], tol);
    return ResolvedScenario{std::move(pair[0]), std::move(pair[1]), std::move(k), std::move(group)};
}

ComplexDense resolve_hamiltonian(const Scenario& s, const ResolvedScenario& r) {
    if (!s.hamiltonian) throw Error(ErrorKind::InvalidArgument, "scenario has no hamiltonian");
    const HamiltonianSpec& spec = *s.hamiltonian;
    const Tolerance tol = s.tolerance();
    switch (spec.kind) {
        case HamiltonianSpec::Kind::Sharpness:
            if (r.k.dim_a != 2 || r.k.dim_b != 2) {
                throw Error(ErrorKind::DimMismatch, "sharpness(eps) needs two-level observables");
            }
            return sharpness_instance(spec.epsilon, tol).pair.hamiltonian;
        case HamiltonianSpec::Kind::Sum: {
            const ComplexDense h_a = resolve_named(s, spec.term_a, "hamiltonian");
            const ComplexDense h_b = resolve_named(s, spec.term_b, "hamiltonian");
            if (h_a.rows() != r.k.dim_a || h_b.rows() != r.k.dim_b) {
                throw Error(ErrorKind::DimMismatch, "sum(" + spec.term_a + ", " + spec.term_b +
                                                        ") does not match the sync pair dimensions");
            }
            return sum_hamiltonian(h_a, h_b, tol);
        }
        case HamiltonianSpec::Kind::RandomCompatible: {
            Rng rng(spec.seed);
            return random_compatible_hamiltonian(r.t_a, r.t_b, r.k, spec.epsilon, rng, tol);
        }
        case HamiltonianSpec::Kind::Inline: {
            const ComplexDense h = to_dense(spec.matrix);
            if (h.rows() != r.k.dim()) {
                throw Error(ErrorKind::DimMismatch, "hamiltonian is " + std::to_string(h.rows()) + "x" +
                                                        std::to_string(h.rows()) + " but K is " +
                                                        std::to_string(r.k.dim()) + "x" + std::to_string(r.k.dim()));
            }
            require_hermitian(h, tol, "hamiltonian");
            return h;
        }
    }
    throw Error(ErrorKind::Internal, "unhandled hamiltonian kind");
}

StateVector resolve_initial_state(const Scenario& s, const ResolvedScenario& r) {
    const InitialStateSpec& spec = s.initial_state;
    switch (spec.kind) {
        case InitialStateSpec::Kind::Kernel:
            if (r.k.kernel_dim() == 0) throw Error(ErrorKind::NotInKernel, "ker K is trivial");
            if (spec.index >= r.k.kernel_dim()) {
                throw Error(ErrorKind::InvalidArgument, "kernel(" + std::to_string(spec.index) + ") but ker K has dimension " +
                                                            std::to_string(r.k.kernel_dim()));
            }
            return r.k.kernel_basis[static_cast<std::size_t>(spec.index)];
        case InitialStateSpec::Kind::Basis:
            if (spec.index >= r.k.dim()) {
                throw Error(ErrorKind::DimMismatch, "basis(" + std::to_string(spec.index) + ") outside dimension " +
                                                        std::to_string(r.k.dim()));
            }
            return StateVector::basis(r.k.dim(), spec.index);
        case InitialStateSpec::Kind::RandomKernel: {
            Rng rng(*s.seed);
            return random_kernel_state(r.k, rng);
        }
        case InitialStateSpec::Kind::Inline: {
            if (static_cast<Index>(spec.amplitudes.size()) != r.k.dim()) {
                throw Error(ErrorKind::DimMismatch, "initial_state has " + std::to_string(spec.amplitudes.size()) +
                                                        " amplitudes but K acts on dimension " + std::to_string(r.k.dim()));
            }
            ComplexVector v(r.k.dim());
            for (Index i = 0; i < v.size(); ++i) v(i) = spec.amplitudes[static_cast<std::size_t>(i)];
            return StateVector::normalized(v);
        }
    }
    throw Error(ErrorKind::Internal, "unhandled initial state kind");
}

}  // namespace syncsub
