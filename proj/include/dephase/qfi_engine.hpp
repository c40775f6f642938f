#pragma once

// Quantum Fisher information for the phase family rho(phi), three ways:
//   * qfi_sld        exact mixed-state value from the eigen-decomposition
//   * qfi_pure       4 (<dpsi|dpsi> - |<dpsi|psi>|^2) for pure states
//   * variational    C_Q = 4 Var(H - 1 (x) h_E) on a purification, minimized
//                    over an ansatz (minimize_ansatz) or exactly (optimal_h)

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dephase/purifications.hpp"

namespace dephase {

/// Support cutoff on l_i + l_j for the exact oracle.
inline constexpr double kSldSupportTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Exact oracles

inline double qfi_pure(const StateVector& state, const StateVector& dstate) {
    if (state.size() != dstate.size()) {
        throw InputError("state and derivative differ in dimension");
    }
    if (std::abs(state.squaredNorm() - 1.0) > 1e-10) {
        throw InputError("qfi_pure needs a normalized state");
    }
    const double overlap = std::norm(dstate.dot(state));
    return std::max(0.0, 4.0 * (dstate.squaredNorm() - overlap));
}

/// d rho / d phi = -i [G, rho] for a diagonal generator G.
inline ComplexMatrix phase_derivative(const ComplexMatrix& rho, const RealVector& generator_diagonal) {
    if (rho.rows() != generator_diagonal.size() || rho.cols() != generator_diagonal.size()) {
        throw InputError("generator does not match the density matrix");
    }
    ComplexMatrix d(rho.rows(), rho.cols());
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            d(i, j) = -kI * (generator_diagonal(i) - generator_diagonal(j)) * rho(i, j);
        }
    }
    return d;
}

/// 2 sum_{l_i + l_j > tol} |<i|drho|j>|^2 / (l_i + l_j).
inline double qfi_sld(const ComplexMatrix& rho, const ComplexMatrix& drho,
                      double tol = kSldSupportTolerance) {
    require_hermitian(rho, "rho");
    require_hermitian(drho, "drho");
    if (rho.rows() != drho.rows()) {
        throw InputError("rho and drho differ in dimension");
    }
    const Spectrum spec = eigh(rho);
    const ComplexMatrix dt = spec.eigenvectors.adjoint() * drho * spec.eigenvectors;
    double f = 0.0;
    for (Eigen::Index j = 0; j < rho.rows(); ++j) {
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            const double denom = spec.eigenvalues(i) + spec.eigenvalues(j);
            if (denom > tol) {
                f += std::norm(dt(i, j)) / denom;
            }
        }
    }
    return 2.0 * f;
}

/// Exact QFI of the reduced system state of a purification.
inline double qfi_reduced(const PurifiedState& p) {
    const ComplexMatrix rho = p.reduced_system();
    return qfi_sld(rho, phase_derivative(rho, p.generator_diagonal));
}

// ---------------------------------------------------------------------------
// Variational bound

/// Environment-side moments of a purification needed by C_Q:
/// rho_E = Tr_S |Phi><Phi|, weighted = Tr_S[(G (x) 1)|Phi><Phi|], and the
/// first two moments of G.
struct EnvMoments {
    ComplexMatrix rho_env;
    ComplexMatrix weighted;
    double mean_generator = 0.0;
    double mean_generator_sq = 0.0;

    static EnvMoments of(const PurifiedState& p) {
        const Eigen::Map<const ComplexMatrix> amp(p.state.data(), p.dim_env(), p.dim_system());
        EnvMoments m;
        m.rho_env = amp * amp.adjoint();
        m.weighted = amp * p.generator_diagonal.cast<Complex>().asDiagonal() * amp.adjoint();
        const RealVector pops = amp.colwise().squaredNorm().transpose();
        m.mean_generator = pops.dot(p.generator_diagonal);
        m.mean_generator_sq = pops.dot(p.generator_diagonal.cwiseAbs2());
        return m;
    }

    [[nodiscard]] double expect(const ComplexMatrix& op) const { return (rho_env * op).trace().real(); }
};

/// 4 (<M^2> - <M>^2) with M = G - 1_S (x) h_env on the purified state.
inline double variational_cq(const PurifiedState& p, const ComplexMatrix& h_env) {
    if (h_env.rows() != p.dim_env() || h_env.cols() != p.dim_env()) {
        throw InputError("h_env does not act on the environment register");
    }
    require_hermitian(h_env, "h_env");
    const EnvMoments m = EnvMoments::of(p);
    // G and 1 (x) h commute, so <G h> = Tr(h * weighted) is real.
    const double cross = (m.weighted * h_env).trace().real();
    const double mean_h = m.expect(h_env);
    const double mean_h2 = m.expect(h_env * h_env);
    const double second = m.mean_generator_sq - 2.0 * cross + mean_h2;
    const double first = m.mean_generator - mean_h;
    return 4.0 * (second - first * first);
}

/// Ordered list of Hermitian operators on the environment register.
struct AnsatzBasis {
    std::string label;
    std::vector<ComplexMatrix> operators;

    static AnsatzBasis empty() { return {"empty", {}}; }

    /// {sum_i X_i, sum_i Y_i, sum_i Z_i}; with one qubit this is {X, Y, Z}.
    static AnsatzBasis collective_pauli(int n_env) {
        return {"collective-pauli",
                {collective_operator(Pauli::X, n_env), collective_operator(Pauli::Y, n_env),
                 collective_operator(Pauli::Z, n_env)}};
    }

    /// The nine swap-symmetric generators on two environment qubits:
    /// X1+X2, Y1+Y2, Z1+Z2, XX, YY, ZZ, XY+YX, XZ+ZX, YZ+ZY.
    static AnsatzBasis symmetric_two_qubit() {
        auto sym = [](std::string_view a, std::string_view b) -> ComplexMatrix {
            return build_pauli_string(a) + build_pauli_string(b);
        };
        return {"symmetric-two-qubit",
                {sym("XI", "IX"), sym("YI", "IY"), sym("ZI", "IZ"), build_pauli_string("XX"),
                 build_pauli_string("YY"), build_pauli_string("ZZ"), sym("XY", "YX"),
                 sym("XZ", "ZX"), sym("YZ", "ZY")}};
    }

    /// Every non-identity Pauli string on n_env qubits (4^n - 1 operators).
    static AnsatzBasis complete_pauli(int n_env) {
        if (n_env < 1 || n_env > 5) {
            throw InputError("complete Pauli basis supported for 1..5 environment qubits");
        }
        AnsatzBasis basis{"complete-pauli", {}};
        const std::size_t count = std::size_t{1} << (2 * n_env);
        std::vector<Pauli> labels(static_cast<std::size_t>(n_env));
        for (std::size_t code = 1; code < count; ++code) {
            for (int site = 0; site < n_env; ++site) {
                labels[static_cast<std::size_t>(site)] =
                    static_cast<Pauli>("IXYZ"[(code >> (2 * site)) & 3U]);
            }
            basis.operators.push_back(build_pauli_string(std::span<const Pauli>(labels)));
        }
        return basis;
    }

    [[nodiscard]] std::size_t size() const { return operators.size(); }
};

struct AnsatzResult {
    double value = 0.0;
    std::vector<double> coefficients;
};

/// Minimizes C_Q(c) = 4 [Var G - 2 c.v + c.Gc] over real coefficients, with
/// G_kl = Re<B_k B_l> - <B_k><B_l> and v_k = Re<G B_k> - <G><B_k>.
/// Singular covariance falls back to the minimum-norm solution.
inline AnsatzResult minimize_ansatz(const PurifiedState& p, const AnsatzBasis& basis) {
    const EnvMoments m = EnvMoments::of(p);
    const double var_g = m.mean_generator_sq - m.mean_generator * m.mean_generator;
    const auto k = static_cast<Eigen::Index>(basis.size());
    if (k == 0) {
        return {4.0 * var_g, {}};
    }
    RealVector mean_b(k);
    RealVector v(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const ComplexMatrix& b = basis.operators[static_cast<std::size_t>(i)];
        if (b.rows() != p.dim_env()) {
            throw InputError("ansatz operator does not act on the environment register");
        }
        require_hermitian(b, "ansatz operator", 1e-12);
        mean_b(i) = m.expect(b);
        v(i) = (m.weighted * b).trace().real() - m.mean_generator * mean_b(i);
    }
    // rho_E B_k precomputed once; Re Tr(rho_E B_k B_l).
    std::vector<ComplexMatrix> rho_b;
    rho_b.reserve(basis.size());
    for (const auto& b : basis.operators) {
        rho_b.push_back(m.rho_env * b);
    }
    RealMatrix cov(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            const ComplexMatrix& bj = basis.operators[static_cast<std::size_t>(j)];
            // Tr(A B) = sum_ab A_ab B_ba
            const double second =
                (rho_b[static_cast<std::size_t>(i)].array() * bj.transpose().array()).sum().real();
            cov(i, j) = second - mean_b(i) * mean_b(j);
            cov(j, i) = cov(i, j);
        }
    }
    Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(cov);
    cod.setThreshold(1e-13);
    const RealVector c = cod.solve(v);
    AnsatzResult out;
    out.value = 4.0 * (var_g - 2.0 * v.dot(c) + c.dot(cov * c));
    out.coefficients.assign(c.data(), c.data() + c.size());
    return out;
}

/// Sum_k c_k B_k.
inline ComplexMatrix assemble_ansatz(const AnsatzBasis& basis, const std::vector<double>& coefficients) {
    if (basis.size() != coefficients.size() || basis.operators.empty()) {
        throw InputError("coefficient count does not match the ansatz basis");
    }
    ComplexMatrix h = ComplexMatrix::Zero(basis.operators.front().rows(), basis.operators.front().cols());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        h += coefficients[i] * basis.operators[i];
    }
    return h;
}

struct OptimalH {
    double value = 0.0;
    ComplexMatrix h;
};

/// Exact minimizer of C_Q over all Hermitian h_E: solves
/// h rho_E + rho_E h = i Tr_S[|dPhi><Phi| - |Phi><dPhi|] = 2 Tr_S[(G (x) 1)|Phi><Phi|].
inline OptimalH optimal_h(const PurifiedState& p) {
    const EnvMoments m = EnvMoments::of(p);
    const ComplexMatrix rhs = m.weighted + m.weighted.adjoint();
    OptimalH out;
    out.h = solve_anticommutator(m.rho_env, rhs);
    out.value = variational_cq(p, out.h);
    return out;
}

// ---------------------------------------------------------------------------
// Resolution conversion

/// delta w = 1 / sqrt(N F) with N = T / t repetitions of the n-particle run.
inline double resolution_from_qfi(double qfi, double t, double total_time) {
    if (!(t > 0.0) || !(total_time > 0.0)) {
        throw InputError("interrogation and total times must be positive");
    }
    if (!(qfi > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / std::sqrt(total_time / t * qfi);
}

/// Inverse of resolution_from_qfi.
inline double qfi_from_resolution(double delta_w, double t, double total_time) {
    return t / (total_time * delta_w * delta_w);
}

} // namespace dephase
