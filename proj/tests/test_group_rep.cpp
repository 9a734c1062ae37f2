#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "syncsub/group_rep.hpp"

using namespace syncsub;

namespace {

ComplexDense diag(std::initializer_list<double> values) {
    ComplexDense d = ComplexDense::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
    Index i = 0;
    for (double v : values) d(i, i) = v, ++i;
    return d;
}

UnitaryRep z2_sigma_z() {
    const BuiltinGroup z2 = cyclic_group(2);
    return UnitaryRep::make(z2.group, {identity(2), diag({1, -1})});
}

ErrorKind kind_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Internal;
}

/// Group average of x: the orthogonal projection of x onto the commutant of rep.
ComplexDense twirl(const UnitaryRep& rep, const ComplexDense& x) {
    ComplexDense out = ComplexDense::Zero(x.rows(), x.cols());
    for (const auto& m : rep.matrices) out += m * x * m.adjoint();
    return out / static_cast<double>(rep.matrices.size());
}

}  // namespace

TEST_CASE("builtin groups carry consistent character tables") {
    const BuiltinGroup z2 = builtin_group("cyclic(2)");
    CHECK(z2.group.order() == 2);
    CHECK(z2.table.labels == std::vector<std::string>{"chi0", "chi1"});
    CHECK(std::abs(z2.table.characters[1][1] - Complex(-1, 0)) == 0.0);
    CHECK(std::abs(z2.table.characters[0][1] - Complex(1, 0)) == 0.0);

    const BuiltinGroup s3 = builtin_group("s3");
    CHECK(s3.group.order() == 6);
    CHECK(s3.table.dims == std::vector<int>{1, 1, 2});
    for (const auto& irrep : s3.irreps) CHECK(validate_rep(irrep).max_homomorphism_violation <= 1e-12);

    const BuiltinGroup trivial = builtin_group("cyclic(1)");
    CHECK(trivial.group.order() == 1);
    CHECK(trivial.table.size() == 1);

    for (int n = 1; n <= 7; ++n) CHECK_NOTHROW(cyclic_group(n).table.validate(cyclic_group(n).group));
    CHECK(kind_of([] { builtin_group("dihedral(4)"); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { builtin_group("cyclic(0)"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("group tables are validated") {
    CHECK_NOTHROW(FiniteGroup::from_table({0, 1, 1, 0}, "z2"));
    CHECK(kind_of([] { FiniteGroup::from_table({0, 1, 1, 1}, "bad"); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { FiniteGroup::from_table({0, 1, 2}, "bad"); }) == ErrorKind::InvalidArgument);
    // A Latin square without associativity (a loop of order 5).
    const std::vector<int> loop = {0, 1, 2, 3, 4, 1, 0, 3, 4, 2, 2, 4, 0, 1, 3, 3, 2, 4, 0, 1, 4, 3, 1, 2, 0};
    CHECK(kind_of([&] { FiniteGroup::from_table(loop, "loop"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("validate_rep accepts representations and names the offending pair") {
    const RepReport ok = validate_rep(z2_sigma_z());
    CHECK(ok.max_unitarity_violation <= 1e-15);
    CHECK(ok.max_homomorphism_violation <= 1e-15);

    const BuiltinGroup z3 = cyclic_group(3);
    const UnitaryRep bad = UnitaryRep::make(z3.group, {identity(2), diag({1, -1}), diag({1, -1})});
    try {
        validate_rep(bad);
        FAIL("expected InvalidRep");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidRep);
        CHECK(std::string(e.what()).find("rho(1) rho(1)") != std::string::npos);
    }
    CHECK(kind_of([&] { UnitaryRep::make(z3.group, {identity(2)}); }) == ErrorKind::InvalidRep);
}

TEST_CASE("isotypic projectors of small representations") {
    const BuiltinGroup z2 = cyclic_group(2);
    const IsotypicDecomposition d = isotypic_projectors(z2_sigma_z(), z2.table);
    CHECK((d.projectors[0] - diag({1, 0})).norm() <= 1e-15);
    CHECK((d.projectors[1] - diag({0, 1})).norm() <= 1e-15);
    CHECK(d.multiplicities == std::vector<int>{1, 1});

    const BuiltinGroup s3 = symmetric_group_s3();
    const IsotypicDecomposition p = isotypic_projectors(s3_permutation_rep(), s3.table);
    CHECK(p.multiplicities == std::vector<int>{1, 0, 1});
    CHECK((p.projectors[0] - ComplexDense::Constant(3, 3, 1.0 / 3.0)).norm() <= 1e-14);
    CHECK(p.projectors[1].norm() <= 1e-14);
    CHECK((p.projectors[2] - (identity(3) - ComplexDense::Constant(3, 3, 1.0 / 3.0))).norm() <= 1e-14);
    CHECK(p.multiplicity_free());

    const BuiltinGroup z3 = cyclic_group(3);
    const IsotypicDecomposition r = isotypic_projectors(regular_rep(z3.group), z3.table);
    CHECK(r.multiplicities == std::vector<int>{1, 1, 1});

    const IsotypicDecomposition reg6 = isotypic_projectors(regular_rep(s3.group), s3.table);
    CHECK(reg6.multiplicities == std::vector<int>{1, 1, 2});
    CHECK_FALSE(reg6.multiplicity_free());
}

TEST_CASE("isotypic projectors are complete orthogonal idempotents on random representations") {
    Rng rng(41);
    const BuiltinGroup s3 = symmetric_group_s3();
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<int> mult = {trial % 3, (trial / 3) % 2, 1 + trial % 2};
        const UnitaryRep rep = random_rep(s3, mult, rng);
        const IsotypicDecomposition d = isotypic_projectors(rep, s3.table);
        CHECK(d.multiplicities == mult);

        ComplexDense sum = ComplexDense::Zero(rep.dim(), rep.dim());
        for (std::size_t a = 0; a < d.projectors.size(); ++a) {
            const ComplexDense& pa = d.projectors[a];
            sum += pa;
            CHECK((pa * pa - pa).norm() <= 1e-10);
            CHECK((pa.adjoint() - pa).norm() <= 1e-10);
            for (std::size_t b = a + 1; b < d.projectors.size(); ++b) CHECK((pa * d.projectors[b]).norm() <= 1e-10);
            for (const auto& g : rep.matrices) CHECK((g * pa - pa * g).norm() <= 1e-10);
        }
        CHECK((sum - identity(rep.dim())).norm() <= 1e-10);
    }
}

TEST_CASE("joint representation and group mismatch") {
    const UnitaryRep a = z2_sigma_z();
    const UnitaryRep j = joint_rep(a, a);
    CHECK(j.dim() == 4);
    CHECK((j.matrices[1] - diag({1, -1, -1, 1})).norm() == 0.0);
    CHECK(validate_rep(j).max_homomorphism_violation <= 1e-15);

    const UnitaryRep z3 = regular_rep(cyclic_group(3).group);
    CHECK(kind_of([&] { joint_rep(a, z3); }) == ErrorKind::GroupMismatch);
}

TEST_CASE("central observables") {
    const BuiltinGroup z2 = cyclic_group(2);
    const UnitaryRep rep = z2_sigma_z();
    const IsotypicDecomposition d = isotypic_projectors(rep, z2.table);
    const ClockObservable t = central_observable(rep, d, std::vector<double>{1.0, -1.0});
    CHECK((t.matrix - diag({1, -1})).norm() <= 1e-15);

    const BuiltinGroup s3 = symmetric_group_s3();
    const UnitaryRep perm = s3_permutation_rep();
    const IsotypicDecomposition p = isotypic_projectors(perm, s3.table);
    const ClockObservable c = central_observable(perm, p, std::map<std::string, double>{{"trivial", 3}, {"standard", 0}});
    CHECK((c.matrix - ComplexDense::Constant(3, 3, 1.0)).norm() <= 1e-14);
    for (const auto& g : perm.matrices) CHECK((g * c.matrix - c.matrix * g).norm() <= 1e-14);

    CHECK(kind_of([&] { central_observable(perm, p, std::map<std::string, double>{{"trivial", 1}}); }) ==
          ErrorKind::LabelMismatch);
    CHECK(kind_of([&] {
              central_observable(perm, p, std::map<std::string, double>{{"trivial", 1}, {"standard", 2}, {"bogus", 0}});
          }) == ErrorKind::LabelMismatch);
}

TEST_CASE("diagonal isotypic projector") {
    const BuiltinGroup z2 = cyclic_group(2);
    const ComplexDense pi = diagonal_isotypic(z2_sigma_z(), z2_sigma_z(), z2.table);
    CHECK((pi - diag({1, 0, 0, 1})).norm() <= 1e-15);
    CHECK(pi.trace().real() == doctest::Approx(2.0));

    const BuiltinGroup s3 = symmetric_group_s3();
    const ComplexDense pi3 = diagonal_isotypic(s3_permutation_rep(), s3_permutation_rep(), s3.table);
    CHECK(pi3.trace().real() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK((pi3 * pi3 - pi3).norm() <= 1e-12);

    const UnitaryRep reg = regular_rep(s3.group);
    CHECK(kind_of([&] { diagonal_isotypic(reg, reg, s3.table); }) == ErrorKind::MultiplicityNotFree);
}

TEST_CASE("kernel equals the diagonal isotypic subspace for Z2 and S3") {
    const BuiltinGroup z2 = cyclic_group(2);
    const ClassificationReport r2 = verify_classification(pauli_z(), pauli_z(), z2_sigma_z(), z2_sigma_z(), z2.table);
    CHECK(r2.equivariance_residual <= 1e-15);
    CHECK(r2.containment_residual <= 1e-12);
    CHECK(r2.kernel_distance <= 1e-9);
    CHECK(r2.kernel_dim == 2);
    CHECK(r2.scalars_match);
    CHECK(r2.central_separating);
    CHECK_FALSE(r2.strict_containment);

    const BuiltinGroup s3 = symmetric_group_s3();
    const UnitaryRep perm = s3_permutation_rep();
    const IsotypicDecomposition p = isotypic_projectors(perm, s3.table);
    const ClockObservable t = central_observable(perm, p, std::map<std::string, double>{{"trivial", 1}, {"standard", -0.5}});
    const ClassificationReport r3 = verify_classification(t, t, perm, perm, s3.table);
    CHECK(r3.equivariance_residual <= 1e-12);
    CHECK(r3.kernel_dim == 5);
    CHECK(r3.diagonal_trace == doctest::Approx(5.0));
    CHECK(r3.kernel_distance <= 1e-9);
    CHECK(r3.central_separating);
}

TEST_CASE("non-separating scalars give strict containment") {
    const BuiltinGroup s3 = symmetric_group_s3();
    const UnitaryRep perm = s3_permutation_rep();
    const IsotypicDecomposition p = isotypic_projectors(perm, s3.table);
    const ClockObservable t = central_observable(perm, p, std::map<std::string, double>{{"trivial", 2}, {"standard", 2}});
    const ClassificationReport r = verify_classification(t, t, perm, perm, s3.table);
    CHECK(r.scalars_match);
    CHECK_FALSE(r.central_separating);
    CHECK(r.containment_residual <= 1e-12);
    CHECK(r.kernel_dim == 9);
    CHECK(r.strict_containment);
    CHECK(r.kernel_distance >= 1.0);
}

TEST_CASE("verify_classification rejects non-equivariant observables") {
    const BuiltinGroup z2 = cyclic_group(2);
    ComplexDense x = ComplexDense::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    const ClockObservable sx = ClockObservable::make(x, "sigma_x");
    CHECK(kind_of([&] { verify_classification(sx, pauli_z(), z2_sigma_z(), z2_sigma_z(), z2.table); }) ==
          ErrorKind::NotEquivariant);
}

TEST_CASE("equivariant observables with matching scalars keep the diagonal subspace in the kernel") {
    Rng rng(4242);
    const BuiltinGroup s3 = symmetric_group_s3();
    const BuiltinGroup z4 = cyclic_group(4);
    for (int trial = 0; trial < 40; ++trial) {
        const BuiltinGroup& g = trial % 2 ? s3 : z4;
        std::vector<int> mult_a(g.table.size()), mult_b(g.table.size());
        for (std::size_t l = 0; l < mult_a.size(); ++l) {
            mult_a[l] = static_cast<int>((trial + l) % 2);
            mult_b[l] = static_cast<int>((trial / 2 + l) % 2);
        }
        mult_a[0] = mult_b[0] = 1;
        const UnitaryRep rep_a = random_rep(g, mult_a, rng);
        const UnitaryRep rep_b = random_rep(g, mult_b, rng);

        // A random element of the commutant of rep_a, then T_B built from its scalars.
        const ComplexDense h = random_hermitian(rep_a.dim(), rng);
        const ClockObservable t_a = ClockObservable::make(twirl(rep_a, h), "twirled");
        const IsotypicDecomposition da = isotypic_projectors(rep_a, g.table);
        const IsotypicDecomposition db = isotypic_projectors(rep_b, g.table);
        std::map<std::string, double> alphas;
        for (std::size_t l = 0; l < g.table.size(); ++l) {
            if (db.multiplicities[l] == 0) continue;
            alphas[g.table.labels[l]] =
                da.multiplicities[l] > 0
                    ? (da.projectors[l] * t_a.matrix).trace().real() / da.projectors[l].trace().real()
                    : uniform(-2, 2, rng);
        }
        const ClockObservable t_b = central_observable(rep_b, db, alphas);

        const ClassificationReport r = verify_classification(t_a, t_b, rep_a, rep_b, g.table);
        CHECK(r.scalars_match);
        CHECK(r.equivariance_residual <= 1e-9);
        CHECK(r.containment_residual <= 1e-9);
        CHECK(static_cast<double>(r.kernel_dim) >= std::round(r.diagonal_trace));
        if (r.central_separating) CHECK(r.kernel_distance <= 1e-8);
    }
}

TEST_CASE("commutant dimensions") {
    const BuiltinGroup s3 = symmetric_group_s3();
    CHECK(commutant(s3.irreps[2].matrices).dimension() == 1);  // Schur
    CHECK(commutant(s3_permutation_rep().matrices).dimension() == 2);

    const ComplexDense zz = kron(diag({1, -1}), diag({1, -1}));
    const ComplexDense k = diag({0, 2, -2, 0});
    CHECK(commutant({zz}).dimension() == oracle::diagonal_family_commutant_dim({zz}));
    CHECK(commutant({zz}).dimension() == 8);
    CHECK(commutant({zz, k}).dimension() == oracle::diagonal_family_commutant_dim({zz, k}));

    const CommutantBasis c = commutant(s3_permutation_rep().matrices);
    for (std::size_t a = 0; a < c.basis.size(); ++a) {
        for (std::size_t b = 0; b < c.basis.size(); ++b) {
            const Complex ip = c.basis[a].cwiseProduct(c.basis[b].conjugate()).sum();
            CHECK(std::abs(ip - Complex(a == b ? 1.0 : 0.0)) <= 1e-12);
        }
    }
    CHECK(kind_of([] { commutant({identity(2), identity(3)}); }) == ErrorKind::DimMismatch);
    CHECK(kind_of([] { commutant({identity(65)}); }) == ErrorKind::DimensionCap);
}

TEST_CASE("commutant dimension equals the character norm on random representations") {
    Rng rng(99);
    const BuiltinGroup s3 = symmetric_group_s3();
    const BuiltinGroup z3 = cyclic_group(3);
    for (int trial = 0; trial < 50; ++trial) {
        const BuiltinGroup& g = trial % 2 ? s3 : z3;
        std::vector<int> mult(g.table.size());
        for (std::size_t l = 0; l < mult.size(); ++l) mult[l] = static_cast<int>((trial + 2 * l) % 3);
        if (std::all_of(mult.begin(), mult.end(), [](int m) { return m == 0; })) mult[0] = 1;
        const UnitaryRep rep = random_rep(g, mult, rng);
        const double expected = oracle::character_norm_sq(rep.matrices);
        CHECK(static_cast<double>(commutant(rep.matrices).dimension()) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("synchronization-preserving algebra for Z2 clocks") {
    const UnitaryRep rep = joint_rep(z2_sigma_z(), z2_sigma_z());
    const SyncOperator k = build_sync_operator(pauli_z(), pauli_z());
    const BuiltinGroup z2 = cyclic_group(2);
    const ComplexDense pi = diagonal_isotypic(z2_sigma_z(), z2_sigma_z(), z2.table);
    const SyncAlgebra s = sync_preserving_algebra(rep, k, {}, pi);

    std::vector<ComplexDense> constraints = rep.matrices;
    constraints.push_back(k.k_matrix);
    CHECK(s.algebra.dimension() == oracle::diagonal_family_commutant_dim(constraints));
    CHECK(s.algebra.dimension() == 6);

    CHECK(span_residual(s.algebra, identity(4)) <= 1e-10);
    for (const auto& x : s.algebra.basis) {
        CHECK(span_residual(s.algebra, x.adjoint()) <= 1e-10);
        for (const auto& y : s.algebra.basis) CHECK(span_residual(s.algebra, x * y) <= 1e-10);
    }
    for (double r : s.kernel_residuals) CHECK(r <= 1e-9);
    for (double r : s.isotypic_residuals) CHECK(r <= 1e-9);

    // Swapping |00> and |11> stays inside; coupling |00> to |01> does not.
    ComplexDense swap = ComplexDense::Zero(4, 4);
    swap(0, 3) = swap(3, 0) = 1.0;
    swap(1, 1) = swap(2, 2) = 1.0;
    CHECK(span_residual(s.algebra, swap) <= 1e-10);
    ComplexDense leak = ComplexDense::Zero(4, 4);
    leak(0, 1) = leak(1, 0) = 1.0;
    CHECK(span_residual(s.algebra, leak) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("synchronization-preserving algebra on random equivariant pairs") {
    Rng rng(5150);
    const BuiltinGroup z3 = cyclic_group(3);
    for (int trial = 0; trial < 10; ++trial) {
        const UnitaryRep rep_a = random_rep(z3, {1, 1, trial % 2}, rng);
        const UnitaryRep rep_b = random_rep(z3, {1, trial % 2, 1}, rng);
        const ClockObservable t_a = ClockObservable::make(twirl(rep_a, random_hermitian(rep_a.dim(), rng)), "a");
        const ClockObservable t_b = ClockObservable::make(twirl(rep_b, random_hermitian(rep_b.dim(), rng)), "b");
        const SyncOperator k = build_sync_operator(t_a, t_b);
        const SyncAlgebra s = sync_preserving_algebra(joint_rep(rep_a, rep_b), k);
        CHECK(s.algebra.dimension() >= 1);
        for (double r : s.kernel_residuals) CHECK(r <= 1e-9);
        CHECK(span_residual(s.algebra, identity(k.dim())) <= 1e-9);
        for (const auto& x : s.algebra.basis) CHECK(span_residual(s.algebra, x.adjoint()) <= 1e-9);
    }
}
