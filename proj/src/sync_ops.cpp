#include "syncsub/sync_ops.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace syncsub {

ClockObservable ClockObservable::make(ComplexDense matrix, std::string label, const Tolerance& tol) {
    require_hermitian(matrix, tol, "clock observable '" + label + "'");
    return {std::move(matrix), std::move(label)};
}

ClockObservable pauli_z() {
    ComplexDense z = ComplexDense::Zero(2, 2);
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    return {z, "pauli_z"};
}

ClockObservable diagonal_observable(const std::vector<double>& eigenvalues, std::string label) {
    if (eigenvalues.empty()) throw Error(ErrorKind::InvalidArgument, "diagonal observable needs at least one eigenvalue");
    const auto n = static_cast<Index>(eigenvalues.size());
    ComplexDense d = ComplexDense::Zero(n, n);
    for (Index i = 0; i < n; ++i) d(i, i) = eigenvalues[static_cast<std::size_t>(i)];
    require_finite(d, "diagonal observable");
    return {d, std::move(label)};
}

SyncOperator sync_operator_from_matrix(ComplexDense k_matrix, Index dim_a, Index dim_b, const Tolerance& tol) {
    if (k_matrix.rows() != dim_a * dim_b || k_matrix.cols() != dim_a * dim_b) {
        throw Error(ErrorKind::DimMismatch, "synchronization operator does not match factor dimensions");
    }
    const NullSpace ns = null_space_decomposition(k_matrix, tol);

    SyncOperator out;
    out.dim_a = dim_a;
    out.dim_b = dim_b;
    out.kernel_threshold = ns.threshold;
    for (Index c = 0; c < ns.basis.cols(); ++c) {
        out.kernel_basis.push_back(StateVector::normalized(ns.basis.col(c)));
    }
    out.kernel_projector = projector_onto(ns.basis);

    const HermitianEigen eig = herm_eig(k_matrix, tol);
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < eig.values.size(); ++i) {
        const double magnitude = std::abs(eig.values(i));
        if (magnitude > ns.threshold) gap = std::min(gap, magnitude);
    }
    out.spectral_gap = gap;
    out.k_matrix = std::move(k_matrix);
    return out;
}

SyncOperator build_sync_operator(const ClockObservable& t_a, const ClockObservable& t_b, const Tolerance& tol) {
    tol.validate();
    require_hermitian(t_a.matrix, tol, "clock observable '" + t_a.label + "'");
    require_hermitian(t_b.matrix, tol, "clock observable '" + t_b.label + "'");
    const Index da = t_a.dim();
    const Index db = t_b.dim();
    ComplexDense k = kron(t_a.matrix, identity(db)) - kron(identity(da), t_b.matrix);
    return sync_operator_from_matrix(std::move(k), da, db, tol);
}

ComplexDense commutator(const ComplexDense& a, const ComplexDense& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        std::ostringstream msg;
        msg << "commutator needs equal square operands, got " << a.rows() << "x" << a.cols() << " and "
            << b.rows() << "x" << b.cols();
        throw Error(ErrorKind::DimMismatch, msg.str());
    }
    return a * b - b * a;
}

CompatPair epsilon_of(const ComplexDense& h, const SyncOperator& k, const Tolerance& tol) {
    require_hermitian(h, tol, "hamiltonian");
    if (h.rows() != k.dim()) {
        std::ostringstream msg;
        msg << "hamiltonian is " << h.rows() << "-dimensional but K acts on dimension " << k.dim();
        throw Error(ErrorKind::DimMismatch, msg.str());
    }
    return {h, operator_norm(commutator(h, k.k_matrix))};
}

ComplexDense sum_hamiltonian(const ComplexDense& h_a, const ComplexDense& h_b, const Tolerance& tol) {
    require_hermitian(h_a, tol, "h_a");
    require_hermitian(h_b, tol, "h_b");
    return kron(h_a, identity(h_b.rows())) + kron(identity(h_a.rows()), h_b);
}

ComplexDense embed_in_slot(const ComplexDense& op, std::size_t slot, const std::vector<Index>& dims) {
    if (slot >= dims.size() || op.rows() != dims[slot] || op.cols() != dims[slot]) {
        throw Error(ErrorKind::DimMismatch, "operator does not fit the requested tensor slot");
    }
    Index before = 1;
    Index after = 1;
    for (std::size_t s = 0; s < slot; ++s) before *= dims[s];
    for (std::size_t s = slot + 1; s < dims.size(); ++s) after *= dims[s];
    return kron(kron(identity(before), op), identity(after));
}

MultipartiteSubspace multipartite_sync_subspace(const std::vector<ClockObservable>& observables,
                                                const Tolerance& tol, Index dimension_cap) {
    tol.validate();
    if (observables.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "multipartite synchronization needs at least two observables");
    }
    std::vector<Index> dims;
    Index total = 1;
    for (const auto& t : observables) {
        require_hermitian(t.matrix, tol, "clock observable '" + t.label + "'");
        dims.push_back(t.dim());
        if (total > dimension_cap / t.dim()) {
            std::ostringstream msg;
            msg << "tensor dimension exceeds cap " << dimension_cap;
            throw Error(ErrorKind::DimensionCap, msg.str());
        }
        total *= t.dim();
    }

    std::vector<ComplexDense> embedded;
    for (std::size_t i = 0; i < observables.size(); ++i) {
        embedded.push_back(embed_in_slot(observables[i].matrix, i, dims));
    }
    std::vector<ComplexDense> pair_operators;
    for (std::size_t i = 0; i < embedded.size(); ++i) {
        for (std::size_t j = i + 1; j < embedded.size(); ++j) {
            pair_operators.push_back(embedded[i] - embedded[j]);
        }
    }
    const NullSpace ns = stacked_null_space(pair_operators, tol);
    MultipartiteSubspace out{{}, dims};
    for (Index c = 0; c < ns.basis.cols(); ++c) out.basis.push_back(StateVector::normalized(ns.basis.col(c)));
    return out;
}

}  // namespace syncsub
