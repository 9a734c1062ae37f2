#pragma once

// Finite groups, their unitary representations, and the synchronization
// structure they induce on a tensor product:
//
//   P_lambda   = (d_lambda / |G|) sum_g conj(chi_lambda(g)) rho(g)
//   K_G        = sum over labels with m_lambda = n_lambda = 1 of P^A_lambda (x) P^B_lambda
//   H_sync     = commutant(rho(G) u {K})
//
// Commutants are solved by vectorization: X M - M X = 0 becomes
// (M^T (x) I - I (x) M) vec(X) = 0 with column-major vec.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "syncsub/linalg.hpp"
#include "syncsub/random.hpp"
#include "syncsub/sync_ops.hpp"

namespace syncsub {

class FiniteGroup {
public:
    /// Builds a group from a row-major multiplication table (entry a*order+b is
    /// the index of ab). Identity and inverses are derived; closure, Latin-square
    /// structure and associativity are checked (InvalidArgument otherwise).
    static FiniteGroup from_table(std::vector<int> mul_table, std::string label);

    int order() const { return order_; }
    int mul(int a, int b) const { return table_[static_cast<std::size_t>(a * order_ + b)]; }
    int inverse(int a) const { return inverse_[static_cast<std::size_t>(a)]; }
    int identity() const { return identity_; }
    const std::string& label() const { return label_; }
    const std::vector<int>& mul_table() const { return table_; }

    bool same_structure(const FiniteGroup& other) const { return table_ == other.table_; }

private:
    int order_ = 0;
    std::vector<int> table_;
    std::vector<int> inverse_;
    int identity_ = 0;
    std::string label_;
};

struct IrrepTable {
    std::vector<std::string> labels;
    std::vector<int> dims;
    std::vector<std::vector<Complex>> characters;  // characters[label][element]

    std::size_t size() const { return labels.size(); }
    std::optional<std::size_t> index_of(std::string_view label) const;

    /// Sum of squared dims equals |G|, chi(e) = d, rows orthonormal within 1e-10.
    void validate(const FiniteGroup& group) const;
};

struct UnitaryRep {
    FiniteGroup group;
    std::vector<ComplexDense> matrices;  // one per element, indexed like the group

    /// Checks matrix count and uniform square shape (not unitarity).
    static UnitaryRep make(FiniteGroup group, std::vector<ComplexDense> matrices);

    Index dim() const { return matrices.front().rows(); }
};

struct RepReport {
    double max_unitarity_violation = 0.0;      // max_g ||rho(g)^dagger rho(g) - I||
    double max_homomorphism_violation = 0.0;   // max_{g,h} ||rho(g) rho(h) - rho(gh)||
    double identity_violation = 0.0;           // ||rho(e) - I||
    int worst_g = 0;
    int worst_h = 0;
};

/// InvalidRep, naming the offending element pair, if any violation exceeds tol.abs.
RepReport validate_rep(const UnitaryRep& rep, const Tolerance& tol = {});

struct BuiltinGroup {
    FiniteGroup group;
    IrrepTable table;
    std::vector<UnitaryRep> irreps;  // aligned with table.labels
};

/// "cyclic(n)" (labels chi0..chi{n-1}) or "s3" (labels trivial, sign, standard).
BuiltinGroup builtin_group(std::string_view name);
BuiltinGroup cyclic_group(int n);
BuiltinGroup symmetric_group_s3();

UnitaryRep regular_rep(const FiniteGroup& group);
/// S3 acting on C^3 by permuting basis vectors.
UnitaryRep s3_permutation_rep();
UnitaryRep direct_sum(const std::vector<UnitaryRep>& parts);
UnitaryRep conjugated(const UnitaryRep& rep, const ComplexDense& unitary);

/// U (sum_lambda irrep_lambda^{(+) m_lambda}) U^dagger with a Haar U.
UnitaryRep random_rep(const BuiltinGroup& builtin, const std::vector<int>& multiplicities, Rng& rng);

struct IsotypicDecomposition {
    std::vector<std::string> labels;
    std::vector<ComplexDense> projectors;
    std::vector<int> multiplicities;
    std::vector<int> irrep_dims;
    std::vector<std::optional<double>> scalars;

    bool multiplicity_free() const;
};

IsotypicDecomposition isotypic_projectors(const UnitaryRep& rep, const IrrepTable& table);

UnitaryRep joint_rep(const UnitaryRep& rep_a, const UnitaryRep& rep_b);

ClockObservable central_observable(const UnitaryRep& rep, const IsotypicDecomposition& decomp,
                                   const std::vector<double>& alphas);
ClockObservable central_observable(const UnitaryRep& rep, const IsotypicDecomposition& decomp,
                                   const std::map<std::string, double>& alphas);

/// Projector onto K_G. MultiplicityNotFree if any multiplicity exceeds 1.
ComplexDense diagonal_isotypic(const UnitaryRep& rep_a, const UnitaryRep& rep_b, const IrrepTable& table);

struct LabelScalars {
    std::string label;
    int multiplicity_a = 0;
    int multiplicity_b = 0;
    std::optional<double> alpha;  // tr(P T_A) / tr(P) when the label occurs in rep_a
    std::optional<double> beta;
    bool scalar_a = false;        // ||P T P - alpha P|| <= 1e-8
    bool scalar_b = false;
    bool equal = false;           // shared label with matching scalars
};

struct ClassificationReport {
    double equivariance_residual = 0.0;  // max_g ||[rho(g), K]||
    double containment_residual = 0.0;   // ||K Pi_G||
    double kernel_distance = 0.0;        // ||Pi_ker(K) - Pi_G||_F
    Index kernel_dim = 0;
    double diagonal_trace = 0.0;
    bool scalars_match = false;          // hypothesis for containment
    bool central_separating = false;     // hypothesis for equality
    bool strict_containment = false;     // ker K strictly contains K_G
    std::vector<LabelScalars> labels;
};

inline constexpr double kScalarityTolerance = 1e-8;

/// NotEquivariant if T_A or T_B fails to commute with its representation.
ClassificationReport verify_classification(const ClockObservable& t_a, const ClockObservable& t_b, const UnitaryRep& rep_a,
                         const UnitaryRep& rep_b, const IrrepTable& table, const Tolerance& tol = {});

struct CommutantBasis {
    std::vector<ComplexDense> basis;  // Frobenius-orthonormal
    std::string constraint_set_description;

    Index dimension() const { return static_cast<Index>(basis.size()); }
};

inline constexpr Index kDefaultCommutantCap = 64;

/// DimMismatch unless all constraints are square of one size; DimensionCap if
/// that size exceeds `dimension_cap`.
CommutantBasis commutant(const std::vector<ComplexDense>& constraints, const Tolerance& tol = {},
                         Index dimension_cap = kDefaultCommutantCap);

/// ||m - proj_span(m)||_F under the Frobenius inner product.
double span_residual(const CommutantBasis& algebra, const ComplexDense& m);

struct SyncAlgebra {
    CommutantBasis algebra;
    std::vector<double> kernel_residuals;     // ||(I - Pi_K) X Pi_K|| per basis element
    std::vector<double> isotypic_residuals;   // ||[X, Pi_G]|| when Pi_G is supplied
};

/// commutant(rho(G) u {K}) with the kernel-preservation postcondition checked
/// (Internal if violated beyond 1e-9 (1 + ||K||)).
SyncAlgebra sync_preserving_algebra(const UnitaryRep& rep, const SyncOperator& k, const Tolerance& tol = {},
                                    const std::optional<ComplexDense>& diagonal_projector = std::nullopt);

}  // namespace syncsub
