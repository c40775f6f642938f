#pragma once

// Dense complex linear algebra for small qubit registers.
//
// Conventions used throughout the library:
//   * qubit 0 is the most significant bit of a basis index, so
//     build_pauli_string("ZI") == Z (x) I;
//   * Z|0> = +|0>, Z|1> = -|1>;
//   * a joint system (x) environment index is s * dim_env + e.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <lapacke.h>

#include "dephase/errors.hpp"

namespace dephase {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

/// Largest register (system plus environment) any constructor will build.
inline constexpr int kMaxQubits = 14;

enum class Pauli : char { I = 'I', X = 'X', Y = 'Y', Z = 'Z' };

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
struct Spectrum {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;

    [[nodiscard]] ComplexMatrix reconstruct() const {
        return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
    }
};

// ---------------------------------------------------------------------------
// Basis helpers

/// Number of qubits of a power-of-two dimension; throws otherwise.
inline int qubit_count(Eigen::Index dim) {
    if (dim <= 0 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
        throw InputError("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

/// Eigenvalue of sum_i Z_i on computational basis state `index` of an
/// n-qubit register: (#zeros - #ones).
inline int z_total(std::uint64_t index, int n) {
    return n - 2 * std::popcount(index);
}

/// Eigenvalue of Z_site on basis state `index` (site 0 = most significant).
inline int z_at(std::uint64_t index, int site, int n) {
    return ((index >> (n - 1 - site)) & 1U) ? -1 : 1;
}

inline int hamming_distance(std::uint64_t a, std::uint64_t b) {
    return std::popcount(a ^ b);
}

inline StateVector basis_state(Eigen::Index dim, Eigen::Index index) {
    StateVector v = StateVector::Zero(dim);
    v(index) = 1.0;
    return v;
}

// ---------------------------------------------------------------------------
// Predicates

inline double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) {
        throw InputError("matrix is not square");
    }
    if (m.size() == 0) {
        return 0.0;
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Hermitian within `tol`, scaled by the largest entry when that exceeds 1.
inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const double scale = m.size() == 0 ? 1.0 : std::max(1.0, m.cwiseAbs().maxCoeff());
    return hermiticity_defect(m) <= tol * scale;
}

inline void require_hermitian(const ComplexMatrix& m, std::string_view what, double tol = 1e-10) {
    if (!is_hermitian(m, tol)) {
        throw InputError(std::string(what) + " is not Hermitian");
    }
}

// ---------------------------------------------------------------------------
// Pauli strings and tensor products

inline ComplexMatrix pauli_matrix(Pauli p) {
    ComplexMatrix m(2, 2);
    switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -kI, kI, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

inline Pauli parse_pauli(char c) {
    switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw InputError(std::string("unknown Pauli label '") + c + "'");
    }
}

inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
    return Eigen::kroneckerProduct(a, b).eval();
}

inline ComplexMatrix build_pauli_string(std::span<const Pauli> labels) {
    if (labels.empty()) {
        throw InputError("Pauli string must have at least one site");
    }
    ComplexMatrix out = pauli_matrix(labels.front());
    for (auto p : labels.subspan(1)) {
        out = tensor(out, pauli_matrix(p));
    }
    return out;
}

/// Accepts a label string such as "ZIX"; throws InputError on any other
/// character.
inline ComplexMatrix build_pauli_string(std::string_view labels) {
    std::vector<Pauli> parsed;
    parsed.reserve(labels.size());
    for (char c : labels) {
        parsed.push_back(parse_pauli(c));
    }
    return build_pauli_string(std::span<const Pauli>(parsed));
}

/// `op` acting on `site` of an n-qubit register, identity elsewhere.
inline ComplexMatrix site_operator(Pauli op, int site, int n) {
    std::vector<Pauli> labels(static_cast<std::size_t>(n), Pauli::I);
    labels.at(static_cast<std::size_t>(site)) = op;
    return build_pauli_string(std::span<const Pauli>(labels));
}

/// sum_i op_i over all sites of an n-qubit register.
inline ComplexMatrix collective_operator(Pauli op, int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        out += site_operator(op, i, n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spectral decomposition

/// Hermitian eigen-decomposition (LAPACK zheevr, all eigenpairs). Eigenvalues ascending.
inline Spectrum eigh(const ComplexMatrix& h) {
    require_hermitian(h, "eigh input");
    const auto n = static_cast<lapack_int>(h.rows());
    Spectrum out;
    out.eigenvalues.resize(n);
    if (n == 0) {
        out.eigenvectors.resize(0, 0);
        return out;
    }
    // Only the lower triangle is referenced; use the Hermitian part so tiny
    // asymmetries do not bias the result.
    ComplexMatrix work = 0.5 * (h + h.adjoint());
    out.eigenvectors.resize(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(
        LAPACK_COL_MAJOR, 'V', 'A', 'L', n, reinterpret_cast<lapack_complex_double*>(work.data()), n, 0.0,
        0.0, 0, 0, 0.0, &found, out.eigenvalues.data(),
        reinterpret_cast<lapack_complex_double*>(out.eigenvectors.data()), n, support.data());
    if (info != 0 || found != n) {
        throw Error("zheevr failed with info = " + std::to_string(info));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Partial traces

inline void check_split(Eigen::Index dim, Eigen::Index dim_s, Eigen::Index dim_e) {
    if (dim_s <= 0 || dim_e <= 0 || dim != dim_s * dim_e) {
        throw InputError("dimension " + std::to_string(dim) + " does not split as " +
                         std::to_string(dim_s) + " x " + std::to_string(dim_e));
    }
}

/// Tr_E |state><state| for a pure state on S (x) E.
inline ComplexMatrix partial_trace_env(const StateVector& state, Eigen::Index dim_s,
                                       Eigen::Index dim_e) {
    check_split(state.size(), dim_s, dim_e);
    // Column-major map: entry (e, s) = state[s * dim_e + e].
    const Eigen::Map<const ComplexMatrix> amp(state.data(), dim_e, dim_s);
    return amp.transpose() * amp.conjugate();
}

inline ComplexMatrix partial_trace_env(const ComplexMatrix& rho, Eigen::Index dim_s,
                                       Eigen::Index dim_e) {
    if (rho.rows() != rho.cols()) {
        throw InputError("density matrix is not square");
    }
    check_split(rho.rows(), dim_s, dim_e);
    ComplexMatrix out = ComplexMatrix::Zero(dim_s, dim_s);
    for (Eigen::Index s = 0; s < dim_s; ++s) {
        for (Eigen::Index sp = 0; sp < dim_s; ++sp) {
            out(s, sp) = rho.block(s * dim_e, sp * dim_e, dim_e, dim_e).trace();
        }
    }
    return out;
}

/// Tr_S |state><state| for a pure state on S (x) E.
inline ComplexMatrix partial_trace_sys(const StateVector& state, Eigen::Index dim_s,
                                       Eigen::Index dim_e) {
    check_split(state.size(), dim_s, dim_e);
    const Eigen::Map<const ComplexMatrix> amp(state.data(), dim_e, dim_s);
    return amp * amp.adjoint();
}

// ---------------------------------------------------------------------------
// Anticommutator equation h*rho + rho*h = rhs

/// Solves h*rho + rho*h = rhs on the support of rho. In the eigenbasis of
/// rho, h_ij = rhs_ij / (l_i + l_j) where l_i + l_j > tol and 0 elsewhere.
/// A negative `tol` selects 1e-10 times the largest eigenvalue of rho.
inline ComplexMatrix solve_anticommutator(const ComplexMatrix& rho, const ComplexMatrix& rhs,
                                          double tol = -1.0) {
    require_hermitian(rho, "rho");
    require_hermitian(rhs, "rhs");
    if (rho.rows() != rhs.rows()) {
        throw InputError("rho and rhs differ in dimension");
    }
    const Spectrum spec = eigh(rho);
    const Eigen::Index dim = rho.rows();
    if (dim == 0) {
        return ComplexMatrix(0, 0);
    }
    if (tol < 0.0) {
        tol = 1e-10 * std::max(spec.eigenvalues.maxCoeff(), 0.0);
    }
    const ComplexMatrix& u = spec.eigenvectors;
    ComplexMatrix h = u.adjoint() * rhs * u;
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double denom = spec.eigenvalues(i) + spec.eigenvalues(j);
            h(i, j) = denom > tol ? h(i, j) / denom : Complex{0.0, 0.0};
        }
    }
    h = u * h * u.adjoint();
    return 0.5 * (h + h.adjoint());
}

// ---------------------------------------------------------------------------
// Gate application on state vectors

/// Applies a 4x4 unitary to qubits (qa, qb) of an n-qubit register, with qa
/// as the more significant qubit of the gate's own basis.
inline void apply_two_qubit(StateVector& state, const ComplexMatrix& gate, int qa, int qb,
                            int n) {
    if (gate.rows() != 4 || gate.cols() != 4) {
        throw InputError("two-qubit gate must be 4x4");
    }
    if (state.size() != (Eigen::Index{1} << n) || qa == qb || qa < 0 || qb < 0 || qa >= n ||
        qb >= n) {
        throw InputError("invalid qubit indices for gate application");
    }
    const std::uint64_t ma = std::uint64_t{1} << (n - 1 - qa);
    const std::uint64_t mb = std::uint64_t{1} << (n - 1 - qb);
    const auto dim = static_cast<std::uint64_t>(state.size());
    for (std::uint64_t base = 0; base < dim; ++base) {
        if ((base & ma) || (base & mb)) {
            continue;
        }
        const std::uint64_t idx[4] = {base, base | mb, base | ma, base | ma | mb};
        Complex in[4];
        for (int k = 0; k < 4; ++k) {
            in[k] = state(static_cast<Eigen::Index>(idx[k]));
        }
        for (int r = 0; r < 4; ++r) {
            Complex acc{0.0, 0.0};
            for (int c = 0; c < 4; ++c) {
                acc += gate(r, c) * in[c];
            }
            state(static_cast<Eigen::Index>(idx[r])) = acc;
        }
    }
}

} // namespace dephase
