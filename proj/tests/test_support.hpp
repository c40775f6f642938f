#pragma once

// Random generators and brute-force oracles shared by the unit tests. Nothing
// here calls into the code paths it is used to check.

#include <cmath>
#include <random>

#include "dephase/operator_algebra.hpp"

namespace dephase::testing {

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = Complex(normal(rng), normal(rng));
        }
    }
    return m;
}

/// GUE-like Hermitian matrix with spectrum of order one.
inline ComplexMatrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
    const ComplexMatrix g = random_complex(dim, dim, rng) / std::sqrt(4.0 * static_cast<double>(dim));
    return g + g.adjoint();
}

/// Full-rank density matrix.
inline ComplexMatrix random_density(Eigen::Index dim, std::mt19937_64& rng) {
    const ComplexMatrix g = random_complex(dim, dim, rng);
    ComplexMatrix rho = g * g.adjoint();
    return rho / rho.trace().real();
}

inline StateVector random_state(Eigen::Index dim, std::mt19937_64& rng) {
    StateVector v = random_complex(dim, 1, rng);
    return v / v.norm();
}

/// rho_S by explicit summation over the environment index.
inline ComplexMatrix brute_partial_trace_env(const StateVector& state, Eigen::Index dim_s,
                                             Eigen::Index dim_e) {
    ComplexMatrix out = ComplexMatrix::Zero(dim_s, dim_s);
    for (Eigen::Index s = 0; s < dim_s; ++s) {
        for (Eigen::Index sp = 0; sp < dim_s; ++sp) {
            for (Eigen::Index e = 0; e < dim_e; ++e) {
                out(s, sp) += state(s * dim_e + e) * std::conj(state(sp * dim_e + e));
            }
        }
    }
    return out;
}

/// 4 Var(M) with M = G - 1 (x) h evaluated with dense matrices.
inline double brute_variational_cq(const StateVector& state, const ComplexMatrix& generator,
                                   const ComplexMatrix& h_env, Eigen::Index dim_s) {
    const ComplexMatrix m =
        generator - tensor(ComplexMatrix::Identity(dim_s, dim_s), h_env);
    const StateVector mv = m * state;
    const double mean = state.dot(mv).real();
    return 4.0 * (mv.squaredNorm() - mean * mean);
}

inline double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace dephase::testing
