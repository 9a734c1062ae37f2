#include "syncsub/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace syncsub {

void Tolerance::validate() const {
    if (!std::isfinite(abs) || !std::isfinite(rel) || abs < 0.0 || rel < 0.0) {
        std::ostringstream msg;
        msg << "tolerance must be finite and nonnegative (abs=" << abs << ", rel=" << rel << ")";
        throw Error(ErrorKind::InvalidArgument, msg.str());
    }
}

double Tolerance::null_threshold(double sigma_max, Index max_dim) const {
    return std::max(abs, rel * sigma_max * static_cast<double>(max_dim));
}

StateVector StateVector::normalized(ComplexVector amplitudes) {
    if (amplitudes.size() == 0) {
        throw Error(ErrorKind::InvalidArgument, "state vector must have positive dimension");
    }
    if (!amplitudes.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, "state vector has non-finite amplitudes");
    }
    const double norm = amplitudes.norm();
    if (norm == 0.0) {
        throw Error(ErrorKind::InvalidArgument, "cannot normalize the zero vector");
    }
    amplitudes /= norm;
    return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(Index dim, Index index) {
    if (dim <= 0 || index < 0 || index >= dim) {
        throw Error(ErrorKind::InvalidArgument, "basis index out of range");
    }
    ComplexVector v = ComplexVector::Zero(dim);
    v(index) = 1.0;
    return StateVector(std::move(v));
}

ComplexDense identity(Index n) { return ComplexDense::Identity(n, n); }

void require_finite(const ComplexDense& a, const std::string& what) {
    if (!a.allFinite()) {
        throw Error(ErrorKind::InvalidArgument, what + " has non-finite entries");
    }
}

ComplexDense kron(const ComplexDense& a, const ComplexDense& b) {
    ComplexDense out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

RealVector singular_values(const ComplexDense& a) {
    if (a.size() == 0) return RealVector();
    Eigen::BDCSVD<ComplexDense> svd(a);
    return svd.singularValues();
}

double operator_norm(const ComplexDense& a) {
    const RealVector s = singular_values(a);
    return s.size() == 0 ? 0.0 : s(0);
}

void fix_phase(Eigen::Ref<ComplexVector> v) {
    double largest = 0.0;
    for (Index i = 0; i < v.size(); ++i) largest = std::max(largest, std::abs(v(i)));
    if (largest == 0.0) return;
    for (Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= largest * (1.0 - 1e-9)) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = std::abs(v(i));
            return;
        }
    }
}

ComplexDense canonical_basis(const ComplexDense& orthonormal_columns) {
    const Index n = orthonormal_columns.rows();
    const Index k = orthonormal_columns.cols();
    ComplexDense out(n, k);
    if (k == 0) return out;

    // Some e_j always keeps squared residual >= 1/n while the basis is
    // incomplete, so accepting at 1/(4n) never starves and never accepts noise.
    const double accept_sq = 0.25 / static_cast<double>(n);
    Index found = 0;
    for (Index j = 0; j < n && found < k; ++j) {
        ComplexVector v = orthonormal_columns * orthonormal_columns.row(j).adjoint();
        for (int pass = 0; pass < 2; ++pass) {
            for (Index p = 0; p < found; ++p) {
                v -= out.col(p) * out.col(p).dot(v);
            }
        }
        const double norm_sq = v.squaredNorm();
        if (norm_sq < accept_sq) continue;
        v /= std::sqrt(norm_sq);
        fix_phase(v);
        out.col(found++) = v;
    }
    if (found != k) {
        throw Error(ErrorKind::Internal, "canonical basis construction lost rank");
    }
    return out;
}

namespace {

ComplexDense triangular_factor(const ComplexDense& tall) {
    Eigen::HouseholderQR<ComplexDense> qr(tall);
    return qr.matrixQR().topRows(tall.cols()).triangularView<Eigen::Upper>();
}

NullSpace null_space_of_reduced(const ComplexDense& reduced, Index rows, Index cols, const Tolerance& tol) {
    Eigen::BDCSVD<ComplexDense> svd(reduced, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();

    NullSpace out;
    out.sigma_max = s.size() == 0 ? 0.0 : s(0);
    out.threshold = tol.null_threshold(out.sigma_max, std::max(rows, cols));
    Index rank = 0;
    while (rank < s.size() && s(rank) > out.threshold) ++rank;
    out.rank = rank;
    out.basis = canonical_basis(svd.matrixV().rightCols(cols - rank));
    return out;
}

}  // namespace

NullSpace null_space_decomposition(const ComplexDense& a, const Tolerance& tol) {
    tol.validate();
    require_finite(a, "null space input");
    // Tall input is reduced to its square R factor first; singular values and
    // the right null space are unchanged.
    if (a.rows() > a.cols()) {
        return null_space_of_reduced(triangular_factor(a), a.rows(), a.cols(), tol);
    }
    return null_space_of_reduced(a, a.rows(), a.cols(), tol);
}

NullSpace stacked_null_space(const std::vector<ComplexDense>& blocks, const Tolerance& tol) {
    tol.validate();
    if (blocks.empty()) throw Error(ErrorKind::InvalidArgument, "stacked null space needs at least one block");
    const Index cols = blocks.front().cols();
    Index rows = 0;
    for (const auto& b : blocks) {
        if (b.cols() != cols) throw Error(ErrorKind::DimMismatch, "stacked blocks differ in width");
        require_finite(b, "stacked block");
        rows += b.rows();
    }
    if (blocks.size() == 1) return null_space_decomposition(blocks.front(), tol);

    ComplexDense folded = blocks.front();
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        ComplexDense pair(folded.rows() + blocks[i].rows(), cols);
        pair << folded, blocks[i];
        folded = pair.rows() > cols ? triangular_factor(pair) : pair;
    }
    return null_space_of_reduced(folded, rows, cols, tol);
}

std::vector<StateVector> null_space(const ComplexDense& a, const Tolerance& tol) {
    const NullSpace ns = null_space_decomposition(a, tol);
    std::vector<StateVector> out;
    out.reserve(static_cast<std::size_t>(ns.basis.cols()));
    for (Index c = 0; c < ns.basis.cols(); ++c) {
        out.push_back(StateVector::normalized(ns.basis.col(c)));
    }
    return out;
}

ComplexDense projector_onto(const std::vector<StateVector>& orthonormal, Index dim) {
    ComplexDense p = ComplexDense::Zero(dim, dim);
    for (const auto& v : orthonormal) {
        if (v.dim() != dim) throw Error(ErrorKind::DimMismatch, "projector basis vector has wrong dimension");
        p.noalias() += v.amplitudes() * v.amplitudes().adjoint();
    }
    return p;
}

ComplexDense projector_onto(const ComplexDense& orthonormal_columns) {
    return orthonormal_columns * orthonormal_columns.adjoint();
}

void require_hermitian(const ComplexDense& a, const Tolerance& tol, const std::string& what) {
    if (a.rows() != a.cols()) {
        std::ostringstream msg;
        msg << what << " must be square, got " << a.rows() << "x" << a.cols();
        throw Error(ErrorKind::DimMismatch, msg.str());
    }
    require_finite(a, what);
    const double defect = operator_norm(a - a.adjoint());
    const double threshold = tol.hermiticity_threshold(operator_norm(a));
    if (defect > threshold) {
        std::ostringstream msg;
        msg << what << " is not Hermitian: ||a - a^dagger|| = " << defect << " > " << threshold;
        throw Error(ErrorKind::NotHermitian, msg.str());
    }
}

HermitianEigen herm_eig(const ComplexDense& a, const Tolerance& tol) {
    tol.validate();
    require_hermitian(a, tol, "matrix");
    const ComplexDense symmetric = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexDense> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::Internal, "Hermitian eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexDense expm_unitary(const ComplexDense& h, double t, const Tolerance& tol) {
    const HermitianEigen eig = herm_eig(h, tol);
    ComplexVector phases(eig.values.size());
    for (Index k = 0; k < phases.size(); ++k) {
        phases(k) = std::polar(1.0, -eig.values(k) * t);
    }
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

double frobenius_distance(const ComplexDense& a, const ComplexDense& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimMismatch, "frobenius_distance operands differ in shape");
    }
    return (a - b).norm();
}

}  // namespace syncsub
