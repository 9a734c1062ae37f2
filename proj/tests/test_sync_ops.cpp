#include "doctest.h"

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "syncsub/random.hpp"
#include "syncsub/sync_ops.hpp"

using namespace syncsub;

namespace {

ClockObservable rotated_observable(const std::vector<double>& spectrum, Rng& rng) {
    const auto n = static_cast<Index>(spectrum.size());
    const ComplexDense u = random_unitary(n, rng);
    const RealVector d = Eigen::Map<const RealVector>(spectrum.data(), n);
    const ComplexDense m = u * d.cast<Complex>().asDiagonal() * u.adjoint();
    return ClockObservable::make(0.5 * (m + m.adjoint()), "rotated");
}

std::vector<double> random_spectrum(Index n, Rng& rng) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = uniform(-3.0, 3.0, rng);
    return out;
}

void check_kernel_invariants(const SyncOperator& k) {
    const ComplexDense& p = k.kernel_projector;
    CHECK((p - p.adjoint()).norm() <= 1e-12);
    CHECK((p * p - p).norm() <= 1e-11);
    CHECK(std::abs(p.trace().real() - static_cast<double>(k.kernel_dim())) <= 1e-9);
    CHECK(operator_norm(k.k_matrix * p) <= k.kernel_threshold);
    CHECK(operator_norm(p * k.k_matrix) <= k.kernel_threshold);
    CHECK((k.k_matrix - k.k_matrix.adjoint()).norm() <= 1e-12);
    if (k.k_matrix.norm() > 0.0) CHECK(k.spectral_gap > 0.0);
}

}  // namespace

TEST_CASE("sync operator of two sigma_z clocks") {
    const SyncOperator k = build_sync_operator(pauli_z(), pauli_z());
    ComplexDense expected = ComplexDense::Zero(4, 4);
    expected(1, 1) = 2.0;
    expected(2, 2) = -2.0;
    CHECK((k.k_matrix - expected).norm() == 0.0);
    REQUIRE(k.kernel_dim() == 2);
    CHECK((k.kernel_basis[0].amplitudes() - StateVector::basis(4, 0).amplitudes()).norm() <= 1e-15);
    CHECK((k.kernel_basis[1].amplitudes() - StateVector::basis(4, 3).amplitudes()).norm() <= 1e-15);
    CHECK(k.spectral_gap == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(k.dim_a == 2);
    CHECK(k.dim_b == 2);
    check_kernel_invariants(k);
}

TEST_CASE("identical nondegenerate clocks synchronize on |j>|j>") {
    for (int d = 2; d <= 5; ++d) {
        std::vector<double> ticks;
        for (int j = 0; j < d; ++j) ticks.push_back(0.5 * j * j - 1.0);
        const ClockObservable t = diagonal_observable(ticks);
        const SyncOperator k = build_sync_operator(t, t);
        REQUIRE(k.kernel_dim() == d);
        for (int j = 0; j < d; ++j) {
            const auto expected = StateVector::basis(d * d, j * d + j);
            CHECK((k.kernel_basis[static_cast<std::size_t>(j)].amplitudes() - expected.amplitudes()).norm() <= 1e-15);
        }
        check_kernel_invariants(k);
    }

    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Index d = 2 + trial % 3;
        const ClockObservable t = rotated_observable(random_spectrum(d, rng), rng);
        const SyncOperator k = build_sync_operator(t, t);
        CHECK(k.kernel_dim() == d);
        check_kernel_invariants(k);
    }
}

TEST_CASE("disjoint spectra give a trivial kernel and the pairwise gap") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const Index da = 2 + trial % 3;
        const Index db = 2 + (trial / 3) % 3;
        std::vector<double> a = random_spectrum(da, rng);
        std::vector<double> b = random_spectrum(db, rng);
        const SyncOperator k = build_sync_operator(rotated_observable(a, rng), rotated_observable(b, rng));
        CHECK(k.kernel_dim() == 0);
        CHECK(std::abs(k.spectral_gap - oracle::pair_gap(a, b, 1e-9)) <= 1e-9);
        check_kernel_invariants(k);
    }
}

TEST_CASE("degenerate spectra are supported") {
    const ClockObservable ta = diagonal_observable({1, 1, 2});
    const ClockObservable tb = diagonal_observable({1, 2, 2, 3});
    const SyncOperator k = build_sync_operator(ta, tb);
    CHECK(k.kernel_dim() == oracle::matching_pairs({1, 1, 2}, {1, 2, 2, 3}, 1e-12));
    CHECK(k.kernel_dim() == 4);
    CHECK(k.spectral_gap == doctest::Approx(1.0));
    check_kernel_invariants(k);
}

TEST_CASE("spectrum of K consists of eigenvalue differences") {
    Rng rng(1001);
    for (int trial = 0; trial < 40; ++trial) {
        const Index da = 2 + trial % 3;
        const Index db = 2 + (trial / 2) % 3;
        std::vector<double> a = random_spectrum(da, rng);
        std::vector<double> b = random_spectrum(db, rng);
        if (trial % 2 == 0) b[0] = a[static_cast<std::size_t>(trial) % a.size()];
        const SyncOperator k = build_sync_operator(rotated_observable(a, rng), rotated_observable(b, rng));
        const HermitianEigen eig = herm_eig(k.k_matrix);
        for (Index i = 0; i < eig.values.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (double x : a) {
                for (double y : b) nearest = std::min(nearest, std::abs(eig.values(i) - (x - y)));
            }
            CHECK(nearest <= 1e-9);
        }
        CHECK(k.kernel_dim() == oracle::matching_pairs(a, b, 1e-9));
        check_kernel_invariants(k);
    }
}

TEST_CASE("K = 0 has an infinite spectral gap") {
    const ClockObservable c = ClockObservable::make(2.5 * identity(2), "constant");
    const SyncOperator k = build_sync_operator(c, c);
    CHECK(k.kernel_dim() == 4);
    CHECK(std::isinf(k.spectral_gap));
}

TEST_CASE("build_sync_operator rejects non-Hermitian clocks") {
    ComplexDense bad = ComplexDense::Zero(2, 2);
    bad(0, 1) = 1.0;
    const ClockObservable t{bad, "raising"};
    CHECK_THROWS_AS(build_sync_operator(t, pauli_z()), Error);
    try {
        build_sync_operator(pauli_z(), t);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotHermitian);
    }
    CHECK_THROWS_AS(ClockObservable::make(bad, "raising"), Error);
}

TEST_CASE("commutator") {
    Rng rng(9);
    const ComplexDense a = random_gaussian(3, 3, rng);
    CHECK(commutator(a, a).norm() <= 1e-14);

    const ClockObservable da = diagonal_observable({1, 2, 3});
    const ClockObservable db = diagonal_observable({-4, 0.5, 9});
    CHECK(commutator(da.matrix, db.matrix).norm() == 0.0);

    const double eps = 0.1;
    ComplexDense h = ComplexDense::Zero(4, 4);
    h(0, 1) = h(1, 0) = eps / 2;
    const SyncOperator k = build_sync_operator(pauli_z(), pauli_z());
    ComplexDense expected = ComplexDense::Zero(4, 4);
    expected(0, 1) = eps;
    expected(1, 0) = -eps;
    CHECK((commutator(h, k.k_matrix) - expected).norm() <= 1e-16);

    const ComplexDense ha = random_hermitian(3, rng), hb = random_hermitian(3, rng);
    const ComplexDense c = commutator(ha, hb);
    CHECK((c + c.adjoint()).norm() <= 1e-13);

    try {
        commutator(identity(2), identity(3));
        FAIL("expected DimMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimMismatch);
    }
}

TEST_CASE("epsilon_of measures the tight commutator norm") {
    const SyncOperator k = build_sync_operator(pauli_z(), pauli_z());
    ComplexDense h = ComplexDense::Zero(4, 4);
    h(0, 1) = h(1, 0) = 0.05;
    CHECK(std::abs(epsilon_of(h, k).epsilon - 0.1) <= 1e-12);

    const ComplexDense compatible = sum_hamiltonian(pauli_z().matrix, pauli_z().matrix);
    CHECK(epsilon_of(compatible, k).epsilon <= 1e-12);

    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const SyncOperator big = build_sync_operator(rotated_observable(random_spectrum(4, rng), rng),
                                                     rotated_observable(random_spectrum(4, rng), rng));
        const ComplexDense hr = random_hermitian(16, rng);
        const CompatPair pair = epsilon_of(hr, big);
        const ComplexDense c = hr * big.k_matrix - big.k_matrix * hr;
        CHECK(std::abs(pair.epsilon - oracle::power_iteration_norm(c, 5000)) <= 1e-8 * pair.epsilon);
        CHECK(std::abs(pair.epsilon - operator_norm(commutator(pair.hamiltonian, big.k_matrix))) <= 1e-12);
    }

    CHECK_THROWS_AS(epsilon_of(identity(3), k), Error);
    ComplexDense skew = ComplexDense::Zero(4, 4);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(epsilon_of(skew, k), Error);
}

TEST_CASE("sum_hamiltonian of compatible parts commutes with K") {
    const SyncOperator k = build_sync_operator(pauli_z(), pauli_z());
    const ComplexDense h = sum_hamiltonian(pauli_z().matrix, pauli_z().matrix);
    CHECK(commutator(h, k.k_matrix).norm() == 0.0);
    CHECK(sum_hamiltonian(ComplexDense::Zero(2, 2), ComplexDense::Zero(3, 3)).norm() == 0.0);

    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const Index da = 2 + trial % 3;
        const Index db = 2 + (trial / 3) % 3;
        const ComplexDense ua = random_unitary(da, rng), ub = random_unitary(db, rng);
        auto diag_random = [&](Index n) {
            RealVector d(n);
            for (Index i = 0; i < n; ++i) d(i) = uniform(-2, 2, rng);
            return d;
        };
        const ComplexDense ta = ua * diag_random(da).cast<Complex>().asDiagonal() * ua.adjoint();
        const ComplexDense tb = ub * diag_random(db).cast<Complex>().asDiagonal() * ub.adjoint();
        const ComplexDense ha = ua * diag_random(da).cast<Complex>().asDiagonal() * ua.adjoint();
        const ComplexDense hb = ub * diag_random(db).cast<Complex>().asDiagonal() * ub.adjoint();
        const SyncOperator kk = build_sync_operator(ClockObservable::make(0.5 * (ta + ta.adjoint()), "a"),
                                                    ClockObservable::make(0.5 * (tb + tb.adjoint()), "b"));
        const ComplexDense h2 = sum_hamiltonian(0.5 * (ha + ha.adjoint()), 0.5 * (hb + hb.adjoint()));
        CHECK(epsilon_of(h2, kk).epsilon <= 1e-12);
    }
}

TEST_CASE("multipartite subspace for two clocks matches the pairwise kernel") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Index da = 2 + trial % 2;
        std::vector<double> a = random_spectrum(da, rng);
        std::vector<double> b = random_spectrum(3, rng);
        b[1] = a[0];
        const ClockObservable ta = rotated_observable(a, rng);
        const ClockObservable tb = rotated_observable(b, rng);
        const SyncOperator k = build_sync_operator(ta, tb);
        const MultipartiteSubspace sub = multipartite_sync_subspace({ta, tb});
        CHECK(sub.dims == std::vector<Index>{da, 3});
        CHECK(frobenius_distance(projector_onto(sub.basis, da * 3), k.kernel_projector) <= 1e-10);
    }
}

TEST_CASE("three sigma_z clocks synchronize on |000> and |111>") {
    const MultipartiteSubspace sub = multipartite_sync_subspace({pauli_z(), pauli_z(), pauli_z()});
    // Oracle: every pair operator is diagonal, so the intersection is spanned by
    // the basis states annihilated by all of them.
    ComplexDense total = ComplexDense::Zero(8, 8);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            const ComplexDense kij = embed_in_slot(pauli_z().matrix, i, {2, 2, 2}) -
                                     embed_in_slot(pauli_z().matrix, j, {2, 2, 2});
            total += kij.cwiseAbs().cast<Complex>();
        }
    }
    const auto expected = oracle::diagonal_zero_indices(total, 1e-15);
    REQUIRE(expected == std::vector<Index>{0, 7});
    REQUIRE(sub.basis.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK((sub.basis[i].amplitudes() - StateVector::basis(8, expected[i]).amplitudes()).norm() <= 1e-15);
    }
}

TEST_CASE("multipartite subspace is empty when one clock shares no tick") {
    const ClockObservable t = diagonal_observable({0, 1});
    const ClockObservable other = diagonal_observable({5, 7});
    CHECK(multipartite_sync_subspace({t, t, other}).basis.empty());
}

TEST_CASE("multipartite preconditions") {
    CHECK_THROWS_AS(multipartite_sync_subspace({pauli_z()}), Error);
    try {
        multipartite_sync_subspace({pauli_z(), pauli_z(), pauli_z()}, {}, 4);
        FAIL("expected DimensionCap");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionCap);
    }
}
