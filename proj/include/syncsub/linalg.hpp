#pragma once

// Dense complex matrix primitives shared by every other module.
//
// All operators live in Eigen::MatrixXcd. Rank and Hermiticity decisions go
// through a single Tolerance policy:
//
//   null threshold        max(abs, rel * sigma_max * max(rows, cols))
//   Hermiticity threshold abs * (1 + sigma_max)

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "syncsub/error.hpp"

namespace syncsub {

using Complex = std::complex<double>;
using ComplexDense = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Tolerance {
    double abs = 1e-10;
    double rel = 1e-12;

    /// Throws InvalidArgument unless both fields are finite and nonnegative.
    void validate() const;

    double null_threshold(double sigma_max, Index max_dim) const;
    double hermiticity_threshold(double sigma_max) const { return abs * (1.0 + sigma_max); }
};

/// Unit-norm complex vector. Construction always normalizes.
class StateVector {
public:
    static StateVector normalized(ComplexVector amplitudes);
    static StateVector basis(Index dim, Index index);

    Index dim() const { return amplitudes_.size(); }
    const ComplexVector& amplitudes() const { return amplitudes_; }
    Complex operator[](Index i) const { return amplitudes_(i); }

private:
    explicit StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {}

    ComplexVector amplitudes_;
};

struct HermitianEigen {
    RealVector values;     // ascending
    ComplexDense vectors;  // columns are eigenvectors, unitary
};

/// Right null space together with the rank decision that produced it.
struct NullSpace {
    ComplexDense basis;  // cols x k, orthonormal columns in canonical order
    Index rank = 0;
    double sigma_max = 0.0;
    double threshold = 0.0;
};

ComplexDense identity(Index n);

/// Throws InvalidArgument if any entry is NaN or infinite.
void require_finite(const ComplexDense& a, const std::string& what);

ComplexDense kron(const ComplexDense& a, const ComplexDense& b);

/// Largest singular value.
double operator_norm(const ComplexDense& a);

RealVector singular_values(const ComplexDense& a);

NullSpace null_space_decomposition(const ComplexDense& a, const Tolerance& tol = {});

std::vector<StateVector> null_space(const ComplexDense& a, const Tolerance& tol = {});

/// Null space of the vertical stack of equally wide blocks. The stack is folded
/// into a square triangular factor block by block, so memory stays at two
/// blocks; the threshold uses the shape of the full stack.
NullSpace stacked_null_space(const std::vector<ComplexDense>& blocks, const Tolerance& tol = {});

/// Orthogonal projector sum_i v_i v_i^dagger onto the span of orthonormal vectors.
ComplexDense projector_onto(const std::vector<StateVector>& orthonormal, Index dim);
ComplexDense projector_onto(const ComplexDense& orthonormal_columns);

/// Throws NotHermitian, reporting ||a - a^dagger||, when the defect exceeds the
/// Hermiticity threshold. Also rejects non-square input with DimMismatch.
void require_hermitian(const ComplexDense& a, const Tolerance& tol, const std::string& what);

HermitianEigen herm_eig(const ComplexDense& a, const Tolerance& tol = {});

/// exp(-i h t) via the Hermitian eigendecomposition.
ComplexDense expm_unitary(const ComplexDense& h, double t, const Tolerance& tol = {});

/// Makes the first entry of largest modulus real and positive.
void fix_phase(Eigen::Ref<ComplexVector> v);

/// Deterministic orthonormal basis for the span of the given orthonormal
/// columns: Gram-Schmidt over the projected standard basis vectors e_0, e_1, ...
/// followed by fix_phase. Depends only on the subspace, not on the input basis.
ComplexDense canonical_basis(const ComplexDense& orthonormal_columns);

double frobenius_distance(const ComplexDense& a, const ComplexDense& b);

}  // namespace syncsub
