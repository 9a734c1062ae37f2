#pragma once

#include <string>
#include <vector>

#include "syncsub/linalg.hpp"

namespace syncsub {

/// Hermitian operator whose eigenvalues are read as time labels.
struct ClockObservable {
    ComplexDense matrix;
    std::string label;

    /// Validates Hermiticity (NotHermitian otherwise).
    static ClockObservable make(ComplexDense matrix, std::string label, const Tolerance& tol = {});

    Index dim() const { return matrix.rows(); }
};

ClockObservable pauli_z();
ClockObservable diagonal_observable(const std::vector<double>& eigenvalues, std::string label = "diag");

/// K = T_A (x) I - I (x) T_B together with its kernel data.
struct SyncOperator {
    ComplexDense k_matrix;
    std::vector<StateVector> kernel_basis;
    ComplexDense kernel_projector;
    /// Smallest |eigenvalue| of K above the kernel threshold; +inf when K = 0.
    double spectral_gap = 0.0;
    /// The null-space threshold used for the kernel and the gap.
    double kernel_threshold = 0.0;
    Index dim_a = 0;
    Index dim_b = 0;

    Index dim() const { return k_matrix.rows(); }
    Index kernel_dim() const { return static_cast<Index>(kernel_basis.size()); }
};

/// Hamiltonian paired with its exact commutator norm ||[H, K]||.
struct CompatPair {
    ComplexDense hamiltonian;
    double epsilon = 0.0;
};

SyncOperator build_sync_operator(const ClockObservable& t_a, const ClockObservable& t_b,
                                 const Tolerance& tol = {});

/// Kernel data for an arbitrary Hermitian K on a bipartite space of the given
/// factor dimensions. Shared by build_sync_operator and callers that already
/// hold K.
SyncOperator sync_operator_from_matrix(ComplexDense k_matrix, Index dim_a, Index dim_b,
                                       const Tolerance& tol = {});

/// ab - ba. DimMismatch unless both are square of the same size.
ComplexDense commutator(const ComplexDense& a, const ComplexDense& b);

CompatPair epsilon_of(const ComplexDense& h, const SyncOperator& k, const Tolerance& tol = {});

/// H_A (x) I + I (x) H_B.
ComplexDense sum_hamiltonian(const ComplexDense& h_a, const ComplexDense& h_b,
                             const Tolerance& tol = {});

/// I_{before} (x) op (x) I_{after} for the given slot of a slot-major tensor
/// product (slot 0 outermost).
ComplexDense embed_in_slot(const ComplexDense& op, std::size_t slot, const std::vector<Index>& dims);

struct MultipartiteSubspace {
    std::vector<StateVector> basis;
    std::vector<Index> dims;
};

inline constexpr Index kDefaultMultipartiteCap = 4096;

/// Intersection over all pairs i < j of ker(T_i on slot i - T_j on slot j),
/// computed as the null space of the vertically stacked pair operators.
MultipartiteSubspace multipartite_sync_subspace(const std::vector<ClockObservable>& observables,
                                                const Tolerance& tol = {},
                                                Index dimension_cap = kDefaultMultipartiteCap);

}  // namespace syncsub
