#include "syncsub/group_rep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace syncsub {

namespace {

// e^{2 pi i m / n}, exact at multiples of a quarter turn.
Complex root_of_unity(long m, long n) {
    m %= n;
    if (m < 0) m += n;
    if ((4 * m) % n == 0) {
        static constexpr std::array<Complex, 4> quarter = {Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
        return quarter[static_cast<std::size_t>(4 * m / n)];
    }
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
}

void require_same_group(const FiniteGroup& a, const FiniteGroup& b) {
    if (!a.same_structure(b)) {
        throw Error(ErrorKind::GroupMismatch, "representations are defined over different groups ('" + a.label() +
                                                  "' vs '" + b.label() + "')");
    }
}

void require_table_matches(const UnitaryRep& rep, const IrrepTable& table) {
    for (std::size_t l = 0; l < table.size(); ++l) {
        if (table.characters[l].size() != static_cast<std::size_t>(rep.group.order())) {
            throw Error(ErrorKind::GroupMismatch, "character table row '" + table.labels[l] +
                                                      "' does not match the group order");
        }
    }
}

std::optional<double> scalar_on(const ComplexDense& projector, const ComplexDense& t, bool& is_scalar) {
    const double trace = projector.trace().real();
    if (trace < 0.5) {
        is_scalar = false;
        return std::nullopt;
    }
    const double alpha = (projector * t).trace().real() / trace;
    is_scalar = operator_norm(projector * t * projector - alpha * projector) <= kScalarityTolerance;
    return alpha;
}

void require_equivariant(const ClockObservable& t, const UnitaryRep& rep, const Tolerance& tol) {
    if (t.dim() != rep.dim()) {
        throw Error(ErrorKind::DimMismatch, "observable '" + t.label + "' and its representation differ in dimension");
    }
    const double threshold = tol.abs * (1.0 + operator_norm(t.matrix));
    for (std::size_t g = 0; g < rep.matrices.size(); ++g) {
        const double defect = operator_norm(commutator(rep.matrices[g], t.matrix));
        if (defect > threshold) {
            std::ostringstream msg;
            msg << "observable '" << t.label << "' does not commute with rho(" << g << "): " << defect << " > "
                << threshold;
            throw Error(ErrorKind::NotEquivariant, msg.str());
        }
    }
}

}  // namespace

FiniteGroup FiniteGroup::from_table(std::vector<int> mul_table, std::string label) {
    const auto n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mul_table.size()))));
    if (n <= 0 || static_cast<std::size_t>(n * n) != mul_table.size()) {
        throw Error(ErrorKind::InvalidArgument, "multiplication table of '" + label + "' is not square");
    }
    for (const int v : mul_table) {
        if (v < 0 || v >= n) throw Error(ErrorKind::InvalidArgument, "multiplication table entry out of range");
    }
    FiniteGroup g;
    g.order_ = n;
    g.table_ = std::move(mul_table);
    g.label_ = std::move(label);

    for (int a = 0; a < n; ++a) {
        std::vector<bool> row(static_cast<std::size_t>(n)), col(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b) {
            row[static_cast<std::size_t>(g.mul(a, b))] = true;
            col[static_cast<std::size_t>(g.mul(b, a))] = true;
        }
        if (std::count(row.begin(), row.end(), true) != n || std::count(col.begin(), col.end(), true) != n) {
            throw Error(ErrorKind::InvalidArgument, "multiplication table is not a Latin square");
        }
    }
    int identity = -1;
    for (int e = 0; e < n && identity < 0; ++e) {
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) ok = g.mul(e, a) == a && g.mul(a, e) == a;
        if (ok) identity = e;
    }
    if (identity < 0) throw Error(ErrorKind::InvalidArgument, "multiplication table has no identity");
    g.identity_ = identity;

    g.inverse_.assign(static_cast<std::size_t>(n), -1);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (g.mul(a, b) == identity && g.mul(b, a) == identity) g.inverse_[static_cast<std::size_t>(a)] = b;
        }
        if (g.inverse_[static_cast<std::size_t>(a)] < 0) {
            throw Error(ErrorKind::InvalidArgument, "element without two-sided inverse");
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) {
                    throw Error(ErrorKind::InvalidArgument, "multiplication table is not associative");
                }
            }
        }
    }
    return g;
}

std::optional<std::size_t> IrrepTable::index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    return std::nullopt;
}

void IrrepTable::validate(const FiniteGroup& group) const {
    if (labels.size() != dims.size() || labels.size() != characters.size() || labels.empty()) {
        throw Error(ErrorKind::InvalidArgument, "irrep table fields have inconsistent lengths");
    }
    const auto order = static_cast<std::size_t>(group.order());
    int dim_sq = 0;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        if (characters[l].size() != order) {
            throw Error(ErrorKind::GroupMismatch, "character row '" + labels[l] + "' does not match the group order");
        }
        if (dims[l] <= 0) throw Error(ErrorKind::InvalidArgument, "irrep dimensions must be positive");
        if (std::abs(characters[l][static_cast<std::size_t>(group.identity())] - Complex(dims[l], 0)) > 1e-10) {
            throw Error(ErrorKind::InvalidArgument, "character of '" + labels[l] + "' at the identity is not its dimension");
        }
        dim_sq += dims[l] * dims[l];
    }
    if (dim_sq != group.order()) {
        throw Error(ErrorKind::InvalidArgument, "irrep dimensions do not satisfy sum d^2 = |G|");
    }
    for (std::size_t l = 0; l < labels.size(); ++l) {
        for (std::size_t m = 0; m < labels.size(); ++m) {
            Complex inner = 0.0;
            for (std::size_t g = 0; g < order; ++g) inner += characters[l][g] * std::conj(characters[m][g]);
            inner /= static_cast<double>(order);
            if (std::abs(inner - Complex(l == m ? 1.0 : 0.0, 0.0)) > 1e-10) {
                throw Error(ErrorKind::InvalidArgument, "characters '" + labels[l] + "' and '" + labels[m] +
                                                            "' are not orthonormal");
            }
        }
    }
}

UnitaryRep UnitaryRep::make(FiniteGroup group, std::vector<ComplexDense> matrices) {
    if (matrices.size() != static_cast<std::size_t>(group.order())) {
        throw Error(ErrorKind::InvalidRep, "representation needs exactly one matrix per group element");
    }
    const Index d = matrices.front().rows();
    for (const auto& m : matrices) {
        if (d == 0 || m.rows() != d || m.cols() != d) {
            throw Error(ErrorKind::InvalidRep, "representation matrices must be square of one common size");
        }
        require_finite(m, "representation matrix");
    }
    return {std::move(group), std::move(matrices)};
}

RepReport validate_rep(const UnitaryRep& rep, const Tolerance& tol) {
    tol.validate();
    const int n = rep.group.order();
    const ComplexDense id = identity(rep.dim());
    RepReport report;
    int worst_unitary = 0;
    for (int g = 0; g < n; ++g) {
        const auto& m = rep.matrices[static_cast<std::size_t>(g)];
        const double u = operator_norm(m.adjoint() * m - id);
        if (u > report.max_unitarity_violation) {
            report.max_unitarity_violation = u;
            worst_unitary = g;
        }
        for (int h = 0; h < n; ++h) {
            const double v = operator_norm(m * rep.matrices[static_cast<std::size_t>(h)] -
                                           rep.matrices[static_cast<std::size_t>(rep.group.mul(g, h))]);
            if (v > report.max_homomorphism_violation) {
                report.max_homomorphism_violation = v;
                report.worst_g = g;
                report.worst_h = h;
            }
        }
    }
    report.identity_violation = operator_norm(rep.matrices[static_cast<std::size_t>(rep.group.identity())] - id);

    std::ostringstream msg;
    if (report.max_unitarity_violation > tol.abs) {
        msg << "rho(" << worst_unitary << ") is not unitary: violation " << report.max_unitarity_violation;
    } else if (report.max_homomorphism_violation > tol.abs) {
        msg << "rho(" << report.worst_g << ") rho(" << report.worst_h << ") != rho(" << report.worst_g << "*"
            << report.worst_h << "): violation " << report.max_homomorphism_violation;
    } else if (report.identity_violation > tol.abs) {
        msg << "rho(identity) != I: violation " << report.identity_violation;
    } else {
        return report;
    }
    throw Error(ErrorKind::InvalidRep, msg.str());
}

BuiltinGroup cyclic_group(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "cyclic(n) needs n >= 1");
    std::vector<int> table(static_cast<std::size_t>(n * n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) table[static_cast<std::size_t>(a * n + b)] = (a + b) % n;
    }
    BuiltinGroup out{FiniteGroup::from_table(std::move(table), "cyclic(" + std::to_string(n) + ")"), {}, {}};
    for (int k = 0; k < n; ++k) {
        std::vector<Complex> chi(static_cast<std::size_t>(n));
        std::vector<ComplexDense> mats;
        for (int j = 0; j < n; ++j) {
            chi[static_cast<std::size_t>(j)] = root_of_unity(static_cast<long>(k) * j, n);
            mats.push_back(ComplexDense::Constant(1, 1, chi[static_cast<std::size_t>(j)]));
        }
        out.table.labels.push_back("chi" + std::to_string(k));
        out.table.dims.push_back(1);
        out.table.characters.push_back(chi);
        out.irreps.push_back(UnitaryRep::make(out.group, std::move(mats)));
    }
    return out;
}

namespace {

using Perm = std::array<int, 3>;

std::vector<Perm> s3_elements() {
    Perm p = {0, 1, 2};
    std::vector<Perm> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

ComplexDense permutation_matrix(const Perm& p) {
    ComplexDense m = ComplexDense::Zero(3, 3);
    for (int x = 0; x < 3; ++x) m(p[static_cast<std::size_t>(x)], x) = 1.0;
    return m;
}

int parity(const Perm& p) {
    int inversions = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) inversions += p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(j)];
    }
    return inversions % 2 == 0 ? 1 : -1;
}

}  // namespace

BuiltinGroup symmetric_group_s3() {
    const auto elems = s3_elements();
    const int n = static_cast<int>(elems.size());
    std::vector<int> table(static_cast<std::size_t>(n * n));
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            Perm composed{};
            for (int x = 0; x < 3; ++x) {
                composed[static_cast<std::size_t>(x)] =
                    elems[static_cast<std::size_t>(a)][static_cast<std::size_t>(elems[static_cast<std::size_t>(b)][static_cast<std::size_t>(x)])];
            }
            table[static_cast<std::size_t>(a * n + b)] =
                static_cast<int>(std::find(elems.begin(), elems.end(), composed) - elems.begin());
        }
    }
    BuiltinGroup out{FiniteGroup::from_table(std::move(table), "s3"), {}, {}};

    // Orthonormal basis of the complement of (1,1,1).
    ComplexDense basis(3, 2);
    basis << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(6.0),
             -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(6.0),
             0.0, -2.0 / std::sqrt(6.0);

    std::vector<Complex> trivial, sign, standard;
    std::vector<ComplexDense> trivial_m, sign_m, standard_m;
    for (const auto& p : elems) {
        int fixed = 0;
        for (int x = 0; x < 3; ++x) fixed += p[static_cast<std::size_t>(x)] == x;
        trivial.emplace_back(1.0, 0.0);
        sign.emplace_back(parity(p), 0.0);
        standard.emplace_back(fixed - 1, 0.0);
        trivial_m.push_back(ComplexDense::Identity(1, 1));
        sign_m.push_back(ComplexDense::Constant(1, 1, Complex(parity(p), 0.0)));
        standard_m.push_back(basis.adjoint() * permutation_matrix(p) * basis);
    }
    out.table.labels = {"trivial", "sign", "standard"};
    out.table.dims = {1, 1, 2};
    out.table.characters = {trivial, sign, standard};
    out.irreps.push_back(UnitaryRep::make(out.group, std::move(trivial_m)));
    out.irreps.push_back(UnitaryRep::make(out.group, std::move(sign_m)));
    out.irreps.push_back(UnitaryRep::make(out.group, std::move(standard_m)));
    return out;
}

BuiltinGroup builtin_group(std::string_view name) {
    if (name == "s3") return symmetric_group_s3();
    constexpr std::string_view prefix = "cyclic(";
    if (name.substr(0, prefix.size()) == prefix && name.size() > prefix.size() + 1 && name.back() == ')') {
        const std::string_view digits = name.substr(prefix.size(), name.size() - prefix.size() - 1);
        int n = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec == std::errc() && ptr == digits.data() + digits.size()) return cyclic_group(n);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown builtin group '" + std::string(name) + "'");
}

UnitaryRep regular_rep(const FiniteGroup& group) {
    const int n = group.order();
    std::vector<ComplexDense> mats;
    for (int g = 0; g < n; ++g) {
        ComplexDense m = ComplexDense::Zero(n, n);
        for (int h = 0; h < n; ++h) m(group.mul(g, h), h) = 1.0;
        mats.push_back(std::move(m));
    }
    return UnitaryRep::make(group, std::move(mats));
}

UnitaryRep s3_permutation_rep() {
    const BuiltinGroup s3 = symmetric_group_s3();
    std::vector<ComplexDense> mats;
    for (const auto& p : s3_elements()) mats.push_back(permutation_matrix(p));
    return UnitaryRep::make(s3.group, std::move(mats));
}

UnitaryRep direct_sum(const std::vector<UnitaryRep>& parts) {
    if (parts.empty()) throw Error(ErrorKind::InvalidArgument, "direct sum of no representations");
    Index total = 0;
    for (const auto& p : parts) {
        require_same_group(parts.front().group, p.group);
        total += p.dim();
    }
    std::vector<ComplexDense> mats;
    for (int g = 0; g < parts.front().group.order(); ++g) {
        ComplexDense m = ComplexDense::Zero(total, total);
        Index offset = 0;
        for (const auto& p : parts) {
            m.block(offset, offset, p.dim(), p.dim()) = p.matrices[static_cast<std::size_t>(g)];
            offset += p.dim();
        }
        mats.push_back(std::move(m));
    }
    return UnitaryRep::make(parts.front().group, std::move(mats));
}

UnitaryRep conjugated(const UnitaryRep& rep, const ComplexDense& unitary) {
    if (unitary.rows() != rep.dim() || unitary.cols() != rep.dim()) {
        throw Error(ErrorKind::DimMismatch, "conjugating unitary has the wrong size");
    }
    std::vector<ComplexDense> mats;
    for (const auto& m : rep.matrices) mats.push_back(unitary * m * unitary.adjoint());
    return UnitaryRep::make(rep.group, std::move(mats));
}

UnitaryRep random_rep(const BuiltinGroup& builtin, const std::vector<int>& multiplicities, Rng& rng) {
    if (multiplicities.size() != builtin.irreps.size()) {
        throw Error(ErrorKind::LabelMismatch, "one multiplicity per irrep is required");
    }
    std::vector<UnitaryRep> parts;
    for (std::size_t l = 0; l < multiplicities.size(); ++l) {
        for (int c = 0; c < multiplicities[l]; ++c) parts.push_back(builtin.irreps[l]);
    }
    const UnitaryRep sum = direct_sum(parts);
    return conjugated(sum, random_unitary(sum.dim(), rng));
}

bool IsotypicDecomposition::multiplicity_free() const {
    return std::all_of(multiplicities.begin(), multiplicities.end(), [](int m) { return m <= 1; });
}

IsotypicDecomposition isotypic_projectors(const UnitaryRep& rep, const IrrepTable& table) {
    require_table_matches(rep, table);
    const double order = rep.group.order();
    IsotypicDecomposition out;
    for (std::size_t l = 0; l < table.size(); ++l) {
        ComplexDense p = ComplexDense::Zero(rep.dim(), rep.dim());
        for (std::size_t g = 0; g < rep.matrices.size(); ++g) {
            p += std::conj(table.characters[l][g]) * rep.matrices[g];
        }
        p *= static_cast<double>(table.dims[l]) / order;

        const Complex trace = p.trace();
        const double raw = trace.real() / table.dims[l];
        const double rounded = std::round(raw);
        if (std::abs(raw - rounded) > 1e-6 || std::abs(trace.imag()) > 1e-6 || rounded < 0.0) {
            std::ostringstream msg;
            msg << "multiplicity of '" << table.labels[l] << "' is " << raw << " (trace " << trace
                << "); the character table does not match the representation";
            throw Error(ErrorKind::NonIntegerMultiplicity, msg.str());
        }
        out.labels.push_back(table.labels[l]);
        out.projectors.push_back(std::move(p));
        out.multiplicities.push_back(static_cast<int>(rounded));
        out.irrep_dims.push_back(table.dims[l]);
        out.scalars.emplace_back();
    }
    return out;
}

UnitaryRep joint_rep(const UnitaryRep& rep_a, const UnitaryRep& rep_b) {
    require_same_group(rep_a.group, rep_b.group);
    std::vector<ComplexDense> mats;
    for (std::size_t g = 0; g < rep_a.matrices.size(); ++g) mats.push_back(kron(rep_a.matrices[g], rep_b.matrices[g]));
    return UnitaryRep::make(rep_a.group, std::move(mats));
}

ClockObservable central_observable(const UnitaryRep& rep, const IsotypicDecomposition& decomp,
                                   const std::vector<double>& alphas) {
    if (alphas.size() != decomp.labels.size()) {
        throw Error(ErrorKind::LabelMismatch, "need exactly one alpha per irrep label");
    }
    ComplexDense t = ComplexDense::Zero(rep.dim(), rep.dim());
    for (std::size_t l = 0; l < alphas.size(); ++l) {
        if (!std::isfinite(alphas[l])) throw Error(ErrorKind::InvalidArgument, "alpha values must be finite");
        if (decomp.projectors[l].rows() != rep.dim()) {
            throw Error(ErrorKind::DimMismatch, "decomposition does not belong to this representation");
        }
        t += alphas[l] * decomp.projectors[l];
    }
    return {0.5 * (t + t.adjoint()), "central"};
}

ClockObservable central_observable(const UnitaryRep& rep, const IsotypicDecomposition& decomp,
                                   const std::map<std::string, double>& alphas) {
    for (const auto& [label, value] : alphas) {
        if (std::find(decomp.labels.begin(), decomp.labels.end(), label) == decomp.labels.end()) {
            throw Error(ErrorKind::LabelMismatch, "alpha given for unknown irrep label '" + label + "'");
        }
    }
    std::vector<double> ordered;
    for (std::size_t l = 0; l < decomp.labels.size(); ++l) {
        const auto it = alphas.find(decomp.labels[l]);
        if (it == alphas.end()) {
            if (decomp.multiplicities[l] > 0) {
                throw Error(ErrorKind::LabelMismatch, "missing alpha for irrep '" + decomp.labels[l] +
                                                          "' which occurs in the representation");
            }
            ordered.push_back(0.0);
        } else {
            ordered.push_back(it->second);
        }
    }
    return central_observable(rep, decomp, ordered);
}

ComplexDense diagonal_isotypic(const UnitaryRep& rep_a, const UnitaryRep& rep_b, const IrrepTable& table) {
    require_same_group(rep_a.group, rep_b.group);
    const IsotypicDecomposition da = isotypic_projectors(rep_a, table);
    const IsotypicDecomposition db = isotypic_projectors(rep_b, table);
    if (!da.multiplicity_free() || !db.multiplicity_free()) {
        throw Error(ErrorKind::MultiplicityNotFree,
                    "diagonal isotypic component is only defined for multiplicity-free representations");
    }
    ComplexDense pi = ComplexDense::Zero(rep_a.dim() * rep_b.dim(), rep_a.dim() * rep_b.dim());
    for (std::size_t l = 0; l < table.size(); ++l) {
        if (da.multiplicities[l] == 1 && db.multiplicities[l] == 1) pi += kron(da.projectors[l], db.projectors[l]);
    }
    return pi;
}

ClassificationReport verify_classification(const ClockObservable& t_a, const ClockObservable& t_b, const UnitaryRep& rep_a,
                         const UnitaryRep& rep_b, const IrrepTable& table, const Tolerance& tol) {
    tol.validate();
    require_same_group(rep_a.group, rep_b.group);
    require_equivariant(t_a, rep_a, tol);
    require_equivariant(t_b, rep_b, tol);

    const SyncOperator k = build_sync_operator(t_a, t_b, tol);
    const UnitaryRep joint = joint_rep(rep_a, rep_b);
    const ComplexDense pi_g = diagonal_isotypic(rep_a, rep_b, table);
    const IsotypicDecomposition da = isotypic_projectors(rep_a, table);
    const IsotypicDecomposition db = isotypic_projectors(rep_b, table);

    ClassificationReport report;
    for (const auto& m : joint.matrices) {
        report.equivariance_residual = std::max(report.equivariance_residual, operator_norm(commutator(m, k.k_matrix)));
    }
    report.containment_residual = operator_norm(k.k_matrix * pi_g);
    report.kernel_distance = frobenius_distance(k.kernel_projector, pi_g);
    report.kernel_dim = k.kernel_dim();
    report.diagonal_trace = pi_g.trace().real();

    bool central_a = true;
    bool central_b = true;
    bool match = true;
    for (std::size_t l = 0; l < table.size(); ++l) {
        LabelScalars s;
        s.label = table.labels[l];
        s.multiplicity_a = da.multiplicities[l];
        s.multiplicity_b = db.multiplicities[l];
        s.alpha = scalar_on(da.projectors[l], t_a.matrix, s.scalar_a);
        s.beta = scalar_on(db.projectors[l], t_b.matrix, s.scalar_b);
        if (s.multiplicity_a > 0 && !s.scalar_a) central_a = false;
        if (s.multiplicity_b > 0 && !s.scalar_b) central_b = false;
        if (s.multiplicity_a > 0 && s.multiplicity_b > 0) {
            s.equal = s.scalar_a && s.scalar_b && std::abs(*s.alpha - *s.beta) <= kScalarityTolerance;
            match = match && s.equal;
        }
        report.labels.push_back(std::move(s));
    }
    report.scalars_match = match;

    bool separating = central_a && central_b && match;
    for (const auto& la : report.labels) {
        for (const auto& lb : report.labels) {
            if (la.label == lb.label || la.multiplicity_a == 0 || lb.multiplicity_b == 0) continue;
            if (la.alpha && lb.beta && std::abs(*la.alpha - *lb.beta) <= kScalarityTolerance) separating = false;
        }
    }
    report.central_separating = separating;

    const double containment_threshold = 1e-9 * (1.0 + operator_norm(k.k_matrix));
    report.strict_containment = report.containment_residual <= containment_threshold &&
                                static_cast<double>(report.kernel_dim) > std::round(report.diagonal_trace);
    return report;
}

CommutantBasis commutant(const std::vector<ComplexDense>& constraints, const Tolerance& tol, Index dimension_cap) {
    tol.validate();
    if (constraints.empty()) throw Error(ErrorKind::InvalidArgument, "commutant needs at least one constraint");
    const Index n = constraints.front().rows();
    for (const auto& m : constraints) {
        if (m.rows() != n || m.cols() != n) {
            throw Error(ErrorKind::DimMismatch, "commutant constraints must be square of one common size");
        }
    }
    if (n > dimension_cap) {
        std::ostringstream msg;
        msg << "commutant dimension " << n << " exceeds cap " << dimension_cap;
        throw Error(ErrorKind::DimensionCap, msg.str());
    }

    const ComplexDense id = identity(n);
    std::vector<ComplexDense> blocks;
    blocks.reserve(constraints.size());
    for (const auto& m : constraints) blocks.push_back(kron(m.transpose(), id) - kron(id, m));
    const NullSpace ns = stacked_null_space(blocks, tol);

    CommutantBasis out;
    std::ostringstream desc;
    desc << "commutant of " << constraints.size() << " matrices of size " << n;
    out.constraint_set_description = desc.str();
    for (Index c = 0; c < ns.basis.cols(); ++c) {
        out.basis.push_back(Eigen::Map<const ComplexDense>(ns.basis.col(c).data(), n, n));
    }
    return out;
}

double span_residual(const CommutantBasis& algebra, const ComplexDense& m) {
    ComplexDense rest = m;
    for (const auto& b : algebra.basis) {
        if (b.rows() != m.rows() || b.cols() != m.cols()) throw Error(ErrorKind::DimMismatch, "span_residual shape");
        const Complex coeff = b.conjugate().cwiseProduct(rest).sum();
        rest -= coeff * b;
    }
    return rest.norm();
}

SyncAlgebra sync_preserving_algebra(const UnitaryRep& rep, const SyncOperator& k, const Tolerance& tol,
                                    const std::optional<ComplexDense>& diagonal_projector) {
    if (rep.dim() != k.dim()) throw Error(ErrorKind::DimMismatch, "representation and K act on different spaces");
    if (diagonal_projector && (diagonal_projector->rows() != k.dim() || diagonal_projector->cols() != k.dim())) {
        throw Error(ErrorKind::DimMismatch, "diagonal projector has the wrong size");
    }
    std::vector<ComplexDense> constraints = rep.matrices;
    constraints.push_back(k.k_matrix);

    SyncAlgebra out{commutant(constraints, tol), {}, {}};
    out.algebra.constraint_set_description = "rho(G) of '" + rep.group.label() + "' together with K";

    const ComplexDense& pi = k.kernel_projector;
    const ComplexDense complement = identity(k.dim()) - pi;
    const double limit = 1e-9 * (1.0 + operator_norm(k.k_matrix));
    for (const auto& x : out.algebra.basis) {
        const double residual = operator_norm(complement * x * pi);
        if (residual > limit) {
            std::ostringstream msg;
            msg << "commutant element leaks out of ker K: " << residual;
            throw Error(ErrorKind::Internal, msg.str());
        }
        out.kernel_residuals.push_back(residual);
        if (diagonal_projector) out.isotypic_residuals.push_back(operator_norm(commutator(x, *diagonal_projector)));
    }
    return out;
}

}  // namespace syncsub
