#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "syncsub/linalg.hpp"
#include "syncsub/random.hpp"
#include "syncsub/sync_ops.hpp"

namespace syncsub {

struct EvolutionSpec {
    ComplexDense hamiltonian;
    StateVector initial_state;
    std::vector<double> times;  // strictly increasing

    /// DimMismatch / InvalidArgument on inconsistent fields.
    void validate() const;
};

struct DriftRow {
    double t = 0.0;
    double drift = 0.0;           // ||K psi(t)||
    double bound = 0.0;           // epsilon |t|
    double fidelity_sq = 0.0;     // ||Pi_K psi(t)||^2
    double fidelity_floor = 0.0;  // 1 - epsilon^2 t^2 / kappa^2, unclamped
};

struct DriftTrajectory {
    std::vector<DriftRow> rows;

    double max_bound_violation() const;    // max(drift - bound)
    double max_fidelity_violation() const; // max(fidelity_floor - fidelity_sq)
};

/// exp(-iHt) from a single eigendecomposition, reused across times.
class Propagator {
public:
    explicit Propagator(const ComplexDense& hamiltonian, const Tolerance& tol = {});

    Index dim() const { return eigen_.values.size(); }
    ComplexVector apply(const ComplexVector& psi, double t) const;

private:
    HermitianEigen eigen_;
};

StateVector evolve(const ComplexDense& h, const StateVector& psi0, double t, const Tolerance& tol = {});

/// NotInKernel if ||K psi(0)|| exceeds the kernel threshold.
DriftTrajectory drift_trajectory(const SyncOperator& k, const CompatPair& pair, const EvolutionSpec& spec,
                                 const Tolerance& tol = {});

/// delta / epsilon; +inf when epsilon is at or below tol.abs.
double short_time_horizon(double epsilon, double delta, const Tolerance& tol = {});

/// ||K psi(t) - (-i) int_0^t exp(-iH(t-s)) [K,H] psi(s) ds|| with the integral
/// taken by the composite trapezoid rule on `steps` uniform subintervals.
double duhamel_residual(const SyncOperator& k, const CompatPair& pair, const StateVector& psi0, double t,
                        int steps, const Tolerance& tol = {});

struct SharpnessInstance {
    SyncOperator k;
    CompatPair pair;
    StateVector psi0;
    std::function<double(double)> closed_form_drift;
};

/// T_A = T_B = sigma_z, H = (eps/2)(|00><01| + |01><00|), psi0 = |00>.
SharpnessInstance sharpness_instance(double epsilon, const Tolerance& tol = {});

/// H = compatible sum + c P with ||[H, K]|| = epsilon exactly, where P is a
/// Gaussian Hermitian perturbation and the compatible parts are diagonal in
/// the observables' eigenbases with Gaussian entries.
ComplexDense random_compatible_hamiltonian(const ClockObservable& t_a, const ClockObservable& t_b,
                                           const SyncOperator& k, double epsilon, Rng& rng,
                                           const Tolerance& tol = {});

/// H_A (x) I + I (x) H_B with H_A, H_B random and diagonal in the observables' eigenbases.
ComplexDense random_compatible_sum(const ClockObservable& t_a, const ClockObservable& t_b, Rng& rng,
                                   const Tolerance& tol = {});

/// Random unit vector in ker K. NotInKernel if the kernel is trivial.
StateVector random_kernel_state(const SyncOperator& k, Rng& rng);

struct RandomInstance {
    ClockObservable t_a;
    ClockObservable t_b;
    SyncOperator k;
    CompatPair pair;
    StateVector psi0;
};

/// Self-contained seeded instance: observables of dimension 2..4 with a shared
/// eigenvalue (so ker K is nontrivial), a Haar eigenbasis each, epsilon drawn
/// from [eps_lo, eps_hi], and psi0 random in ker K. epsilon = 0 gives the
/// exactly compatible sum.
RandomInstance random_instance(std::uint64_t seed, double eps_lo, double eps_hi, const Tolerance& tol = {});

}  // namespace syncsub
