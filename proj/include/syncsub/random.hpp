#pragma once

#include <cstdint>
#include <random>

#include "syncsub/linalg.hpp"

namespace syncsub {

using Rng = std::mt19937_64;

/// Complex matrix with i.i.d. standard normal real and imaginary parts.
ComplexDense random_gaussian(Index rows, Index cols, Rng& rng);

/// (G + G^dagger) / 2 for a Gaussian G.
ComplexDense random_hermitian(Index n, Rng& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with the R phases removed).
ComplexDense random_unitary(Index n, Rng& rng);

StateVector random_state(Index n, Rng& rng);

double uniform(double lo, double hi, Rng& rng);

}  // namespace syncsub
