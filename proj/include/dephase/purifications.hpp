#pragma once

#include <cmath>
#include <numbers>

#include "dephase/dephasing_models.hpp"

namespace dephase {

/// Pure state on system (x) environment whose environment trace is the
/// dephased probe. The phase generator (t/2) sum_i Z_i acts on the system
/// only and is diagonal, so it is stored as its diagonal.
struct PurifiedState {
    StateVector state;
    int n_system = 0;
    int n_env = 0;
    double t = 0.0;
    RealVector generator_diagonal; ///< length 2^n_system

    [[nodiscard]] Eigen::Index dim_system() const { return Eigen::Index{1} << n_system; }
    [[nodiscard]] Eigen::Index dim_env() const { return Eigen::Index{1} << n_env; }

    /// Dense generator on the full register.
    [[nodiscard]] ComplexMatrix generator() const {
        RealVector diag(state.size());
        for (Eigen::Index s = 0; s < dim_system(); ++s) {
            diag.segment(s * dim_env(), dim_env()).setConstant(generator_diagonal(s));
        }
        return diag.cast<Complex>().asDiagonal();
    }

    /// i d|Phi>/dphi, applied without forming the dense generator.
    [[nodiscard]] StateVector apply_generator(const StateVector& v) const {
        StateVector out = v;
        for (Eigen::Index s = 0; s < dim_system(); ++s) {
            out.segment(s * dim_env(), dim_env()) *= generator_diagonal(s);
        }
        return out;
    }

    [[nodiscard]] ComplexMatrix reduced_system() const {
        return partial_trace_env(state, dim_system(), dim_env());
    }

    [[nodiscard]] ComplexMatrix reduced_env() const {
        return partial_trace_sys(state, dim_system(), dim_env());
    }
};

/// Diagonal of (t/2) sum_i Z_i on n qubits.
inline RealVector system_generator_diagonal(int n, double t) {
    const auto dim = Eigen::Index{1} << n;
    RealVector g(dim);
    for (Eigen::Index x = 0; x < dim; ++x) {
        g(x) = 0.5 * t * z_total(static_cast<std::uint64_t>(x), n);
    }
    return g;
}

/// (t/2) sum_i Z_i on the n system sites, extended by the identity on n_env
/// environment sites.
inline ComplexMatrix phase_generator(int n, double t, int n_env = 0) {
    if (n < 1 || n_env < 0 || n + n_env > kMaxQubits) {
        throw InputError("phase generator register out of range");
    }
    const RealVector g = system_generator_diagonal(n, t);
    const auto dim_e = Eigen::Index{1} << n_env;
    return tensor(ComplexMatrix(g.cast<Complex>().asDiagonal()),
                  ComplexMatrix::Identity(dim_e, dim_e));
}

/// Half-angle a with cos(2a) = e^{-gamma t^nu}, i.e. a = arccos(sqrt(P)),
/// P = (1 + e^{-gamma t^nu}) / 2.
inline double rotation_angle(const DephasingModel& model, double t) {
    const double p = 0.5 * (1.0 + std::exp(-local_exponent(model, t)));
    return std::acos(std::sqrt(p));
}

// ---------------------------------------------------------------------------
// Partially correlated environment state

/// A|GHZ> + B|+>^n on n environment qubits.
///
/// B >= 0 solves A^2 + B^2 + 2 c A B = 1 with c = <GHZ|+^n> = 2^{1/2 - n/2},
/// the directly computed overlap; the vector is then renormalized to machine
/// precision. The printed constraint in the source model uses c/2 instead;
/// both constants are kept for reporting.
struct EnvInitState {
    double a = 0.0;
    double b = 0.0;
    int n = 0;
    StateVector amplitudes;

    static EnvInitState create(double amplitude, int n) {
        if (!(amplitude >= 0.0 && amplitude <= 1.0)) {
            throw InputError("environment amplitude A must lie in [0, 1]");
        }
        if (n < 1 || n > kMaxQubits / 2) {
            throw InputError("environment size out of range");
        }
        const double cross = cross_term_coefficient(n);
        const double disc = cross * cross * amplitude * amplitude - 4.0 * (amplitude * amplitude - 1.0);
        const double b = std::max(0.0, 0.5 * (-cross * amplitude + std::sqrt(disc)));
        StateVector v = amplitude * ProbeState::ghz(n).amplitudes() +
                        b * ProbeState::product_plus(n).amplitudes();
        v /= v.norm();
        return EnvInitState{amplitude, b, n, std::move(v)};
    }

    /// 2 <GHZ|+^n> = 2^{3/2 - n/2}: the AB coefficient of the squared norm.
    static double cross_term_coefficient(int n) { return std::pow(2.0, 1.5 - 0.5 * n); }

    /// The AB coefficient as printed alongside the state: 2^{1/2 - n/2}.
    static double printed_cross_term_coefficient(int n) { return std::pow(2.0, 0.5 - 0.5 * n); }

    /// A^2 + B^2 + 2^{1/2-n/2} A B - 1 for the (A, B) chosen here.
    [[nodiscard]] double printed_normalization_residual() const {
        return a * a + b * b + printed_cross_term_coefficient(n) * a * b - 1.0;
    }
};

// ---------------------------------------------------------------------------
// Purification families

namespace detail {

inline void check_register(int n_sys, int n_env) {
    if (n_sys + n_env > kMaxQubits) {
        throw UnsupportedCase("register of " + std::to_string(n_sys + n_env) +
                              " qubits exceeds the cap of " + std::to_string(kMaxQubits));
    }
}

inline void check_probe(const ProbeState& probe, const DephasingModel& model) {
    model.validate();
    if (probe.n() != model.n) {
        throw InputError("probe size does not match the model's particle count");
    }
}

/// Multiplies each system block by e^{-i phi t m_x / 2}.
inline void imprint_phase(PurifiedState& p, double phi) {
    for (Eigen::Index s = 0; s < p.dim_system(); ++s) {
        p.state.segment(s * p.dim_env(), p.dim_env()) *= std::polar(1.0, -phi * p.generator_diagonal(s));
    }
}

/// cos(a) I - i sin(a) P(x)Q for commuting Pauli products (P(x)Q)^2 = I.
inline ComplexMatrix pauli_rotation(Pauli p, Pauli q, double angle) {
    const ComplexMatrix pq = tensor(pauli_matrix(p), pauli_matrix(q));
    return std::cos(angle) * ComplexMatrix::Identity(4, 4) - kI * std::sin(angle) * pq;
}

} // namespace detail

/// prod_i e^{-i phi t Z_i/2} e^{-i a Z_i Y_i^E} |psi>|0>^n, one environment
/// qubit per particle.
inline PurifiedState purify_uncorrelated(const ProbeState& probe, const DephasingModel& model,
                                         double t, double phi) {
    detail::check_probe(probe, model);
    if (!model.is<Uncorrelated>()) {
        throw InputError("purify_uncorrelated needs uncorrelated environments");
    }
    const int n = model.n;
    detail::check_register(n, n);
    const double angle = rotation_angle(model, t);

    PurifiedState p;
    p.n_system = n;
    p.n_env = n;
    p.t = t;
    p.generator_diagonal = system_generator_diagonal(n, t);
    p.state = tensor(probe.amplitudes(), basis_state(Eigen::Index{1} << n, 0));
    const ComplexMatrix coupling = detail::pauli_rotation(Pauli::Z, Pauli::Y, angle);
    for (int i = 0; i < n; ++i) {
        apply_two_qubit(p.state, coupling, i, n + i, 2 * n);
    }
    detail::imprint_phase(p, phi);
    return p;
}

/// s(m) = |m|^{nu-1} m, the spectral reading of |Z|^{nu-1} Z on sector m.
inline double sector_power(int m, double nu) {
    if (m == 0) {
        return 0.0;
    }
    return std::pow(std::abs(static_cast<double>(m)), nu - 1.0) * m;
}

/// e^{-i phi t Z/2} e^{-i a |Z|^{nu-1} Z Y^E} |psi>|0>, Z = sum_i Z_i, with a
/// single shared environment qubit.
inline PurifiedState purify_max_correlated(const ProbeState& probe, const DephasingModel& model,
                                           double t, double phi) {
    detail::check_probe(probe, model);
    if (!model.is<MaxCorrelated>()) {
        throw InputError("purify_max_correlated needs maximally correlated environments");
    }
    const int n = model.n;
    detail::check_register(n, 1);
    const double angle = rotation_angle(model, t);

    PurifiedState p;
    p.n_system = n;
    p.n_env = 1;
    p.t = t;
    p.generator_diagonal = system_generator_diagonal(n, t);
    p.state = tensor(probe.amplitudes(), basis_state(2, 0));
    for (Eigen::Index s = 0; s < p.dim_system(); ++s) {
        // e^{-i theta Y} = [[cos, -sin], [sin, cos]]
        const double theta = angle * sector_power(z_total(static_cast<std::uint64_t>(s), n), model.nu);
        const Complex e0 = p.state(2 * s);
        const Complex e1 = p.state(2 * s + 1);
        p.state(2 * s) = std::cos(theta) * e0 - std::sin(theta) * e1;
        p.state(2 * s + 1) = std::sin(theta) * e0 + std::cos(theta) * e1;
    }
    detail::imprint_phase(p, phi);
    return p;
}

/// prod_i e^{-i phi t Z_i/2} e^{-i a Z_i Z_i^E} |psi> (x) |Psi>_E with the
/// two-qubit environment A|GHZ> + B|++>. Only n = 2, nu = 1 is covered.
inline PurifiedState purify_partial(const ProbeState& probe, double amplitude,
                                    const DephasingModel& model, double t, double phi) {
    if (model.n != 2 || probe.n() != 2) {
        throw UnsupportedCase("partially correlated purification requires n = 2");
    }
    if (model.nu != 1.0) {
        throw UnsupportedCase("partially correlated purification requires nu = 1");
    }
    detail::check_probe(probe, model);
    const int n = 2;
    const double angle = rotation_angle(model, t);
    const EnvInitState env = EnvInitState::create(amplitude, n);

    PurifiedState p;
    p.n_system = n;
    p.n_env = n;
    p.t = t;
    p.generator_diagonal = system_generator_diagonal(n, t);
    p.state = tensor(probe.amplitudes(), env.amplitudes);
    const ComplexMatrix coupling = detail::pauli_rotation(Pauli::Z, Pauli::Z, angle);
    for (int i = 0; i < n; ++i) {
        apply_two_qubit(p.state, coupling, i, n + i, 2 * n);
    }
    detail::imprint_phase(p, phi);
    return p;
}

/// Dispatches on the model's correlation tag.
inline PurifiedState purify(const ProbeState& probe, const DephasingModel& model, double t,
                            double phi) {
    if (model.is<Uncorrelated>()) {
        return purify_uncorrelated(probe, model, t, phi);
    }
    if (model.is<MaxCorrelated>()) {
        return purify_max_correlated(probe, model, t, phi);
    }
    if (const auto* partial = std::get_if<Partial>(&model.correlation)) {
        return purify_partial(probe, partial->amplitude, model, t, phi);
    }
    throw UnsupportedCase("no purification is defined for " + correlation_name(model.correlation) +
                          " environments");
}

} // namespace dephase
