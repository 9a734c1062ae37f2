#include "syncsub/random.hpp"

namespace syncsub {

ComplexDense random_gaussian(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexDense out(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            out(i, j) = Complex(re, im);
        }
    }
    return out;
}

ComplexDense random_hermitian(Index n, Rng& rng) {
    const ComplexDense g = random_gaussian(n, n, rng);
    return 0.5 * (g + g.adjoint());
}

ComplexDense random_unitary(Index n, Rng& rng) {
    const ComplexDense g = random_gaussian(n, n, rng);
    Eigen::HouseholderQR<ComplexDense> qr(g);
    ComplexDense q = qr.householderQ();
    const ComplexDense r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index k = 0; k < n; ++k) {
        const Complex d = r(k, k);
        if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
    }
    return q;
}

StateVector random_state(Index n, Rng& rng) {
    return StateVector::normalized(random_gaussian(n, 1, rng).col(0));
}

double uniform(double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

}  // namespace syncsub
