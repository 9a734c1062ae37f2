#include "syncsub/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace syncsub {

namespace {

void require_state_dim(const StateVector& psi, Index dim, const char* what) {
    if (psi.dim() != dim) {
        std::ostringstream msg;
        msg << what << " has dimension " << psi.dim() << " but the operator acts on dimension " << dim;
        throw Error(ErrorKind::DimMismatch, msg.str());
    }
}

void require_in_kernel(const SyncOperator& k, const StateVector& psi0) {
    require_state_dim(psi0, k.dim(), "initial state");
    const double residual = (k.k_matrix * psi0.amplitudes()).norm();
    if (residual > k.kernel_threshold) {
        std::ostringstream msg;
        msg << "initial state is not in ker K: ||K psi0|| = " << residual << " > " << k.kernel_threshold;
        throw Error(ErrorKind::NotInKernel, msg.str());
    }
}

void require_matching_pair(const SyncOperator& k, const CompatPair& pair) {
    if (pair.hamiltonian.rows() != k.dim() || pair.hamiltonian.cols() != k.dim()) {
        throw Error(ErrorKind::DimMismatch, "hamiltonian and K act on different dimensions");
    }
}

ComplexDense hermitize(const ComplexDense& m) { return 0.5 * (m + m.adjoint()); }

ComplexDense diagonal_in_eigenbasis(const ComplexDense& observable, Rng& rng, const Tolerance& tol) {
    const HermitianEigen eig = herm_eig(observable, tol);
    std::normal_distribution<double> normal(0.0, 1.0);
    RealVector d(eig.values.size());
    for (Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
    return hermitize(eig.vectors * d.cast<Complex>().asDiagonal() * eig.vectors.adjoint());
}

}  // namespace

void EvolutionSpec::validate() const {
    if (hamiltonian.rows() != hamiltonian.cols()) {
        throw Error(ErrorKind::DimMismatch, "hamiltonian must be square");
    }
    require_state_dim(initial_state, hamiltonian.rows(), "initial state");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw Error(ErrorKind::InvalidArgument, "time grid has non-finite entries");
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "time grid must be strictly increasing");
        }
    }
}

double DriftTrajectory::max_bound_violation() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) worst = std::max(worst, r.drift - r.bound);
    return worst;
}

double DriftTrajectory::max_fidelity_violation() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) worst = std::max(worst, r.fidelity_floor - r.fidelity_sq);
    return worst;
}

Propagator::Propagator(const ComplexDense& hamiltonian, const Tolerance& tol) : eigen_(herm_eig(hamiltonian, tol)) {}

ComplexVector Propagator::apply(const ComplexVector& psi, double t) const {
    ComplexVector coeffs = eigen_.vectors.adjoint() * psi;
    for (Index k = 0; k < coeffs.size(); ++k) coeffs(k) *= std::polar(1.0, -eigen_.values(k) * t);
    return eigen_.vectors * coeffs;
}

StateVector evolve(const ComplexDense& h, const StateVector& psi0, double t, const Tolerance& tol) {
    const Propagator u(h, tol);
    require_state_dim(psi0, u.dim(), "state");
    return StateVector::normalized(u.apply(psi0.amplitudes(), t));
}

DriftTrajectory drift_trajectory(const SyncOperator& k, const CompatPair& pair, const EvolutionSpec& spec,
                                 const Tolerance& tol) {
    spec.validate();
    require_matching_pair(k, pair);
    if (spec.hamiltonian.rows() != k.dim()) {
        throw Error(ErrorKind::DimMismatch, "evolution hamiltonian and K act on different dimensions");
    }
    if (frobenius_distance(spec.hamiltonian, pair.hamiltonian) > tol.hermiticity_threshold(pair.hamiltonian.norm())) {
        throw Error(ErrorKind::InvalidArgument, "epsilon was measured for a different hamiltonian");
    }
    require_in_kernel(k, spec.initial_state);

    const Propagator u(spec.hamiltonian, tol);
    const double eps = pair.epsilon;
    const double kappa = k.spectral_gap;

    DriftTrajectory out;
    out.rows.reserve(spec.times.size());
    for (const double t : spec.times) {
        const ComplexVector psi = u.apply(spec.initial_state.amplitudes(), t);
        DriftRow row;
        row.t = t;
        row.drift = (k.k_matrix * psi).norm();
        row.bound = eps * std::abs(t);
        row.fidelity_sq = (k.kernel_projector * psi).squaredNorm();
        row.fidelity_floor = 1.0 - (eps * t) * (eps * t) / (kappa * kappa);
        out.rows.push_back(row);
    }
    return out;
}

double short_time_horizon(double epsilon, double delta, const Tolerance& tol) {
    if (!(epsilon >= 0.0) || !(delta > 0.0) || !std::isfinite(delta)) {
        throw Error(ErrorKind::InvalidArgument, "short-time horizon needs epsilon >= 0 and finite delta > 0");
    }
    if (epsilon <= tol.abs) return std::numeric_limits<double>::infinity();
    return delta / epsilon;
}

double duhamel_residual(const SyncOperator& k, const CompatPair& pair, const StateVector& psi0, double t, int steps,
                        const Tolerance& tol) {
    if (steps < 2) throw Error(ErrorKind::InvalidArgument, "duhamel_residual needs at least 2 steps");
    require_matching_pair(k, pair);
    require_in_kernel(k, psi0);

    // Everything is carried in the eigenbasis of H, where both propagators are diagonal.
    const HermitianEigen eig = herm_eig(pair.hamiltonian, tol);
    const ComplexDense& v = eig.vectors;
    const RealVector& lambda = eig.values;
    const ComplexDense source = v.adjoint() * commutator(k.k_matrix, pair.hamiltonian) * v;
    const ComplexVector coeffs0 = v.adjoint() * psi0.amplitudes();

    auto phased = [&](const ComplexVector& c, double s) {
        ComplexVector out = c;
        for (Index i = 0; i < out.size(); ++i) out(i) *= std::polar(1.0, -lambda(i) * s);
        return out;
    };
    auto integrand = [&](double s) -> ComplexVector {
        return Complex(0.0, -1.0) * phased(source * phased(coeffs0, s), t - s);
    };

    const double h = t / steps;
    ComplexVector sum = 0.5 * (integrand(0.0) + integrand(t));
    for (int i = 1; i < steps; ++i) sum += integrand(h * i);
    const ComplexVector integral = v * (h * sum);

    const ComplexVector exact = k.k_matrix * (v * phased(coeffs0, t));
    return (exact - integral).norm();
}

SharpnessInstance sharpness_instance(double epsilon, const Tolerance& tol) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorKind::InvalidArgument, "sharpness instance needs finite epsilon > 0");
    }
    SyncOperator k = build_sync_operator(pauli_z(), pauli_z(), tol);
    ComplexDense h = ComplexDense::Zero(4, 4);
    h(0, 1) = epsilon / 2.0;
    h(1, 0) = epsilon / 2.0;
    CompatPair pair = epsilon_of(h, k, tol);
    auto drift = [epsilon](double t) { return 2.0 * std::abs(std::sin(epsilon * t / 2.0)); };
    return {std::move(k), std::move(pair), StateVector::basis(4, 0), drift};
}

ComplexDense random_compatible_sum(const ClockObservable& t_a, const ClockObservable& t_b, Rng& rng,
                                   const Tolerance& tol) {
    const ComplexDense h_a = diagonal_in_eigenbasis(t_a.matrix, rng, tol);
    const ComplexDense h_b = diagonal_in_eigenbasis(t_b.matrix, rng, tol);
    return sum_hamiltonian(h_a, h_b, tol);
}

ComplexDense random_compatible_hamiltonian(const ClockObservable& t_a, const ClockObservable& t_b,
                                           const SyncOperator& k, double epsilon, Rng& rng, const Tolerance& tol) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw Error(ErrorKind::InvalidArgument, "epsilon must be finite and nonnegative");
    }
    if (t_a.dim() * t_b.dim() != k.dim()) {
        throw Error(ErrorKind::DimMismatch, "observables do not match K");
    }
    const ComplexDense compatible = random_compatible_sum(t_a, t_b, rng, tol);
    if (epsilon == 0.0) return compatible;

    const ComplexDense perturbation = random_hermitian(k.dim(), rng);
    const double raw = operator_norm(commutator(perturbation, k.k_matrix));
    if (raw <= k.kernel_threshold) {
        throw Error(ErrorKind::InvalidArgument, "K commutes with every perturbation; epsilon > 0 is unreachable");
    }
    // [compatible, K] = 0, so the commutator norm is linear in the scale.
    return hermitize(compatible + (epsilon / raw) * perturbation);
}

StateVector random_kernel_state(const SyncOperator& k, Rng& rng) {
    if (k.kernel_basis.empty()) throw Error(ErrorKind::NotInKernel, "ker K is trivial");
    const ComplexDense coeffs = random_gaussian(k.kernel_dim(), 1, rng);
    ComplexVector v = ComplexVector::Zero(k.dim());
    for (Index i = 0; i < k.kernel_dim(); ++i) {
        v += coeffs(i, 0) * k.kernel_basis[static_cast<std::size_t>(i)].amplitudes();
    }
    return StateVector::normalized(std::move(v));
}

RandomInstance random_instance(std::uint64_t seed, double eps_lo, double eps_hi, const Tolerance& tol) {
    if (!(eps_lo >= 0.0) || !(eps_hi >= eps_lo)) {
        throw Error(ErrorKind::InvalidArgument, "epsilon range must satisfy 0 <= lo <= hi");
    }
    Rng rng(seed);
    std::uniform_int_distribution<int> dim_dist(2, 4);
    const int da = dim_dist(rng);
    const int db = dim_dist(rng);

    std::vector<double> spec_a(static_cast<std::size_t>(da));
    for (auto& x : spec_a) x = uniform(-2.0, 2.0, rng);
    std::uniform_int_distribution<std::size_t> pick(0, spec_a.size() - 1);
    std::vector<double> spec_b(static_cast<std::size_t>(db));
    for (std::size_t j = 0; j < spec_b.size(); ++j) {
        const bool shared = j == 0 || uniform(0.0, 1.0, rng) < 0.5;
        spec_b[j] = shared ? spec_a[pick(rng)] : uniform(-2.0, 2.0, rng);
    }

    auto rotated = [&](const std::vector<double>& spectrum, const char* label) {
        const auto n = static_cast<Index>(spectrum.size());
        const ComplexDense u = random_unitary(n, rng);
        RealVector d = Eigen::Map<const RealVector>(spectrum.data(), n);
        return ClockObservable::make(hermitize(u * d.cast<Complex>().asDiagonal() * u.adjoint()), label, tol);
    };
    ClockObservable t_a = rotated(spec_a, "T_A");
    ClockObservable t_b = rotated(spec_b, "T_B");
    SyncOperator k = build_sync_operator(t_a, t_b, tol);

    const double eps = eps_hi > eps_lo ? uniform(eps_lo, eps_hi, rng) : eps_lo;
    const ComplexDense h = random_compatible_hamiltonian(t_a, t_b, k, eps, rng, tol);
    CompatPair pair = epsilon_of(h, k, tol);
    StateVector psi0 = random_kernel_state(k, rng);
    return {std::move(t_a), std::move(t_b), std::move(k), std::move(pair), std::move(psi0)};
}

}  // namespace syncsub
