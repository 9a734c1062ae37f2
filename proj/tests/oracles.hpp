#pragma once

// Test-only reference computations. None of these route through the SVD,
// eigensolver or null-space code they are used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "syncsub/linalg.hpp"

namespace syncsub::oracle {

/// sigma_max by power iteration on A^dagger A, started from a fixed dense vector.
inline double power_iteration_norm(const ComplexDense& a, int iterations = 2000) {
    if (a.norm() == 0.0) return 0.0;
    ComplexVector v(a.cols());
    for (Index i = 0; i < v.size(); ++i) v(i) = Complex(1.0 + 0.1 * i, 0.3 - 0.05 * i);
    v.normalize();
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        ComplexVector w = a.adjoint() * (a * v);
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        v = w / n;
        estimate = std::sqrt(n);
    }
    return estimate;
}

/// Smallest nonzero |a_i - b_j| over all eigenvalue pairs; +inf if none.
inline double pair_gap(const std::vector<double>& a, const std::vector<double>& b, double zero_tol) {
    double gap = std::numeric_limits<double>::infinity();
    for (double x : a) {
        for (double y : b) {
            const double d = std::abs(x - y);
            if (d > zero_tol) gap = std::min(gap, d);
        }
    }
    return gap;
}

/// Number of eigenvalue pairs with a_i == b_j (within zero_tol): dim ker K.
inline int matching_pairs(const std::vector<double>& a, const std::vector<double>& b, double zero_tol) {
    int count = 0;
    for (double x : a) {
        for (double y : b) count += std::abs(x - y) <= zero_tol;
    }
    return count;
}

/// Commutant dimension of a family of commuting diagonal matrices: group basis
/// indices by their tuple of diagonal entries, sum the squared class sizes.
inline int diagonal_family_commutant_dim(const std::vector<ComplexDense>& diagonals) {
    std::map<std::vector<std::pair<double, double>>, int> classes;
    for (Index i = 0; i < diagonals.front().rows(); ++i) {
        std::vector<std::pair<double, double>> key;
        for (const auto& d : diagonals) {
            key.emplace_back(std::round(d(i, i).real() * 1e9) / 1e9, std::round(d(i, i).imag() * 1e9) / 1e9);
        }
        ++classes[key];
    }
    int dim = 0;
    for (const auto& [key, size] : classes) dim += size * size;
    return dim;
}

/// <chi, chi> = (1/|G|) sum_g |tr rho(g)|^2, which equals sum_lambda m_lambda^2.
inline double character_norm_sq(const std::vector<ComplexDense>& matrices) {
    double sum = 0.0;
    for (const auto& m : matrices) sum += std::norm(m.trace());
    return sum / static_cast<double>(matrices.size());
}

/// Indices of computational basis states of a diagonal operator's null space.
inline std::vector<Index> diagonal_zero_indices(const ComplexDense& diag, double zero_tol) {
    std::vector<Index> out;
    for (Index i = 0; i < diag.rows(); ++i) {
        if (std::abs(diag(i, i)) <= zero_tol) out.push_back(i);
    }
    return out;
}

}  // namespace syncsub::oracle
