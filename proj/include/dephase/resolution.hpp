#pragma once

// Closed-form frequency resolutions, optimal interrogation times and the
// improvement of optimal measurements over Ramsey spectroscopy.
//
// All resolutions are |delta w|, never squared. "Markovian" means nu = 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dephase/purifications.hpp"

namespace dephase {

namespace detail {

inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InputError(std::string(what) + " must be finite and positive");
    }
}

inline void require_standard_probe(ProbeKind probe) {
    if (probe == ProbeKind::Custom) {
        throw InputError("closed forms are defined for product-plus and GHZ probes only");
    }
}

inline double checked_root(double argument, const char* what) {
    if (!(argument > 0.0)) {
        throw UndefinedResolution(std::string(what) + ": argument under the root is " +
                                  std::to_string(argument));
    }
    return std::sqrt(argument);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Ramsey baselines

/// Ramsey resolution at the optimal interrogation time, uncorrelated
/// environments: sqrt((2 e gamma nu)^{1/nu} / (n T)) for product probes and
/// sqrt((2 e gamma nu)^{1/nu} / (n^{2 - 1/nu} T)) for GHZ probes.
inline double ramsey_uncorrelated(const DephasingModel& model, ProbeKind probe, double total_time) {
    model.validate();
    detail::require_standard_probe(probe);
    detail::require_positive(total_time, "total time");
    const double numerator = std::pow(2.0 * std::numbers::e * model.gamma * model.nu, 1.0 / model.nu);
    const double n = model.n;
    const double scale = probe == ProbeKind::Ghz ? std::pow(n, 2.0 - 1.0 / model.nu) : n;
    return std::sqrt(numerator / (scale * total_time));
}

/// Ramsey resolution at interrogation time t, maximally correlated
/// environments.
inline double ramsey_max_correlated(const DephasingModel& model, ProbeKind probe, double t,
                                    double total_time) {
    model.validate();
    detail::require_standard_probe(probe);
    detail::require_positive(t, "interrogation time");
    detail::require_positive(total_time, "total time");
    const double n = model.n;
    const double tnu = std::pow(t, model.nu);
    if (probe == ProbeKind::Ghz) {
        return std::sqrt(std::exp(2.0 * std::pow(n, model.nu) * model.gamma * tnu) /
                         (n * n * total_time * t));
    }
    return std::sqrt(std::exp(2.0 * model.gamma * tnu) / (n * total_time * t));
}

/// Minimizer of ramsey_max_correlated over t:
/// product (1 / (2 gamma nu))^{1/nu}, GHZ (1 / (2 n^nu gamma nu))^{1/nu}.
inline double optimal_time_closed(const DephasingModel& model, ProbeKind probe) {
    model.validate();
    detail::require_standard_probe(probe);
    detail::require_positive(model.gamma, "gamma");
    const double base = 1.0 / (2.0 * model.gamma * model.nu);
    if (probe == ProbeKind::Ghz) {
        return std::pow(base / std::pow(static_cast<double>(model.n), model.nu), 1.0 / model.nu);
    }
    return std::pow(base, 1.0 / model.nu);
}

// ---------------------------------------------------------------------------
// Optimal-measurement bound, uncorrelated environments

/// Inputs of the uncorrelated closed form. q is the variance ratio
/// Var(sum Z_i / n) / (1 - <sum Z_i / n>^2) and zbar = <sum Z_i / n>.
struct ResolutionQuery {
    DephasingModel model;
    ProbeKind probe = ProbeKind::ProductPlus;
    double t = 1.0;
    double total_time = 1.0;
    double q = 1.0;
    double zbar = 0.0;
};

struct ProbeMoments {
    double q = 0.0;
    double zbar = 0.0;
};

/// (q, zbar) of an arbitrary probe.
inline ProbeMoments probe_moments(const ProbeState& probe) {
    const int n = probe.n();
    double mean = 0.0;
    double mean_sq = 0.0;
    for (Eigen::Index x = 0; x < probe.dim(); ++x) {
        const double p = std::norm(probe.amplitudes()(x));
        const double j = static_cast<double>(z_total(static_cast<std::uint64_t>(x), n)) / n;
        mean += p * j;
        mean_sq += p * j * j;
    }
    const double denom = 1.0 - mean * mean;
    return {denom > 0.0 ? (mean_sq - mean * mean) / denom : 0.0, mean};
}

/// sqrt((1 - zbar^2)(1 + n q (e^{2 gamma t^nu} - 1)) / (q n^2 T t)).
inline double closed_form_uncorrelated(const ResolutionQuery& query) {
    query.model.validate();
    detail::require_positive(query.t, "interrogation time");
    detail::require_positive(query.total_time, "total time");
    const double spread = query.q * (1.0 - query.zbar * query.zbar);
    if (!(spread > 0.0)) {
        throw UndefinedResolution("q (1 - zbar^2) vanishes; the probe carries no phase information");
    }
    const double n = query.model.n;
    const double x = query.model.gamma * std::pow(query.t, query.model.nu);
    const double numerator = (1.0 - query.zbar * query.zbar) * (1.0 + n * query.q * std::expm1(2.0 * x));
    return std::sqrt(numerator / (query.q * n * n * query.total_time * query.t));
}

/// Large-n optimum of the uncorrelated bound for q = 1, zbar = 0, nu >= 1:
/// sqrt((2 gamma nu)^{1/nu} / ((1 - 1/(2nu))^{1 - 1/nu} n^{2 - 1/nu} T)).
inline double optimal_resolution_uncorrelated(const DephasingModel& model, int n, double total_time) {
    model.validate();
    detail::require_positive(total_time, "total time");
    if (n < 1) {
        throw InputError("particle count must be at least 1");
    }
    const double nu = model.nu;
    const double numerator = std::pow(2.0 * model.gamma * nu, 1.0 / nu);
    const double denominator = std::pow(1.0 - 1.0 / (2.0 * nu), 1.0 - 1.0 / nu) *
                               std::pow(static_cast<double>(n), 2.0 - 1.0 / nu) * total_time;
    return std::sqrt(numerator / denominator);
}

// ---------------------------------------------------------------------------
// Scalar minimization

struct Bracket {
    double lo = 0.0;
    double hi = 1.0;
};

/// Golden-section minimizer of a unimodal function on [lo, hi]; stops when
/// the bracket has shrunk below rel_tol times its initial width.
inline double golden_section(const std::function<double(double)>& f, Bracket bracket,
                             double rel_tol = 1e-10) {
    if (!(bracket.hi > bracket.lo)) {
        throw InputError("bracket must satisfy lo < hi");
    }
    // Flatness probe on an even grid.
    {
        double fmin = std::numeric_limits<double>::infinity();
        double fmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 8; ++i) {
            const double v = f(bracket.lo + (bracket.hi - bracket.lo) * i / 8.0);
            fmin = std::min(fmin, v);
            fmax = std::max(fmax, v);
        }
        if (std::isfinite(fmax) && fmax - fmin <= 1e-14 * std::max(1.0, std::abs(fmax))) {
            throw FlatFunction("no descent found inside the bracket");
        }
    }
    constexpr double kInvPhi = 0.6180339887498949; // (sqrt(5) - 1) / 2
    double a = bracket.lo;
    double b = bracket.hi;
    const double stop = rel_tol * (b - a);
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > stop) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Minimizer of a resolution-versus-t curve on `bracket`.
inline double optimal_time_numeric(const std::function<double(double)>& resolution, Bracket bracket) {
    return golden_section(resolution, bracket, 1e-10);
}

/// Minimizer over (0, 10 t_scale]; the bracket is widened tenfold once if the
/// minimum lands on its upper edge.
inline double minimize_over_t(const std::function<double(double)>& resolution, double t_scale) {
    detail::require_positive(t_scale, "time scale");
    double hi = 10.0 * t_scale;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const double tmin = optimal_time_numeric(resolution, {hi * 1e-12, hi});
        if (tmin < hi * (1.0 - 1e-6)) {
            return tmin;
        }
        hi *= 10.0;
    }
    throw FlatFunction("resolution keeps decreasing beyond the widened bracket");
}

struct TimeOptimum {
    double t = 0.0;
    double resolution = 0.0;
};

/// Numeric minimum over t of the uncorrelated closed form (q = 1, zbar = 0):
/// a log-spaced scan followed by golden-section refinement in log t.
inline TimeOptimum optimal_uncorrelated_numeric(const DephasingModel& model, int n, double total_time) {
    detail::require_positive(model.gamma, "gamma");
    DephasingModel m = model;
    m.n = n;
    m.correlation = Uncorrelated{};
    auto resolution_at = [&](double t) {
        return closed_form_uncorrelated({m, ProbeKind::Ghz, t, total_time, 1.0, 0.0});
    };
    const double t_scale = std::pow(1.0 / (2.0 * m.gamma * m.nu), 1.0 / m.nu);
    const double log_lo = std::log(t_scale) - 12.0 * std::numbers::ln10;
    const double log_hi = std::log(t_scale) + 6.0 * std::numbers::ln10;
    constexpr int kScan = 3601;
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
        const double u = log_lo + (log_hi - log_lo) * i / (kScan - 1);
        const double v = resolution_at(std::exp(u));
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    if (best == 0 || best == kScan - 1) {
        throw FlatFunction("uncorrelated bound has no interior minimum on the scan");
    }
    const double step = (log_hi - log_lo) / (kScan - 1);
    const double centre = log_lo + step * best;
    const double u = golden_section([&](double s) { return resolution_at(std::exp(s)); },
                                    {centre - step, centre + step}, 1e-9);
    return {std::exp(u), resolution_at(std::exp(u))};
}

/// Ratio of the better Ramsey baseline to the optimal-measurement resolution.
/// nu >= 1: [e / (1 - 1/(2 nu))^{1 - nu}]^{1/(2 nu)}, independent of gamma,
/// n and T. nu < 1: numeric optimum of the uncorrelated bound.
inline double improvement_factor(const DephasingModel& model, int n, double total_time) {
    model.validate();
    const double nu = model.nu;
    if (nu >= 1.0) {
        return std::pow(std::numbers::e / std::pow(1.0 - 1.0 / (2.0 * nu), 1.0 - nu), 1.0 / (2.0 * nu));
    }
    detail::require_positive(model.gamma, "gamma");
    DephasingModel m = model;
    m.n = n;
    m.correlation = Uncorrelated{};
    const double ramsey = std::min(ramsey_uncorrelated(m, ProbeKind::ProductPlus, total_time),
                                   ramsey_uncorrelated(m, ProbeKind::Ghz, total_time));
    return ramsey / optimal_uncorrelated_numeric(m, n, total_time).resolution;
}

// ---------------------------------------------------------------------------
// Correlated environments

inline double binomial(int n, int k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// Optimal-measurement resolution for the shared-environment purification
/// (T = 1), with cos(2 phi~) = e^{-gamma t^nu}:
///   product  1/sqrt(t (n - n^2 [sum_i C(n,i) sin(2|n-2i|^nu phi~)]^2 / 2^{2n}))
///   GHZ      1/sqrt(t (n^2 - n^2 sin^2(2 n^nu phi~)))
inline double correlated_closed_form(int n, double nu, double gamma, double t, ProbeKind probe) {
    detail::require_standard_probe(probe);
    detail::require_positive(t, "interrogation time");
    if (n < 1 || !(nu > 0.0) || !(gamma >= 0.0)) {
        throw InputError("invalid (n, nu, gamma)");
    }
    const double angle = 0.5 * std::acos(std::exp(-gamma * std::pow(t, nu)));
    const double nn = n;
    if (probe == ProbeKind::Ghz) {
        const double s = std::sin(2.0 * std::pow(nn, nu) * angle);
        return 1.0 / detail::checked_root(t * (nn * nn - nn * nn * s * s), "correlated GHZ form");
    }
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        sum += binomial(n, i) * std::sin(2.0 * std::pow(std::abs(n - 2.0 * i), nu) * angle);
    }
    const double correction = nn * nn * sum * sum / std::pow(2.0, 2.0 * n);
    return 1.0 / detail::checked_root(t * (nn - correction), "correlated product form");
}

/// Long-time resolution for partially correlated environments, n = 2,
/// nu = 1: 1/sqrt(t (2 - 8 B^2 (A/sqrt2 + B/2)^2 (1 + q))), q = <Z1 Z2>.
/// B follows from A through the environment-state normalization.
inline double partial_corr_asymptote(double amplitude, double q, double t) {
    detail::require_positive(t, "interrogation time");
    if (!(q >= -1.0 && q <= 1.0)) {
        throw InputError("q = <Z1 Z2> must lie in [-1, 1]");
    }
    const double a = amplitude;
    const double b = EnvInitState::create(amplitude, 2).b;
    const double inner = a / std::numbers::sqrt2 + b / 2.0;
    return 1.0 / detail::checked_root(t * (2.0 - 8.0 * b * b * inner * inner * (1.0 + q)),
                                      "partial-correlation asymptote");
}

enum class ParityClass { Unbounded, Bounded, Nonconvergent };

inline std::string parity_name(ParityClass c) {
    switch (c) {
    case ParityClass::Unbounded: return "even/unbounded";
    case ParityClass::Bounded: return "odd/bounded";
    case ParityClass::Nonconvergent: return "non-integer/nonconvergent";
    }
    return "unknown";
}

struct ParityLimit {
    double m = 0.0;           ///< n^nu
    double limit_value = 0.0; ///< sin^2(M pi / 2)
    ParityClass classification = ParityClass::Nonconvergent;
};

/// Long-time behaviour of the GHZ branch: even integer M = n^nu keeps the
/// information growing, odd M saturates, anything else does not settle.
inline ParityLimit parity_limit(int n, double nu) {
    if (n < 1 || !(nu > 0.0)) {
        throw InputError("invalid (n, nu)");
    }
    ParityLimit out;
    out.m = std::pow(static_cast<double>(n), nu);
    const double s = std::sin(out.m * std::numbers::pi / 2.0);
    out.limit_value = s * s;
    const double nearest = std::round(out.m);
    if (std::abs(out.m - nearest) <= 1e-9 * std::max(1.0, out.m)) {
        const bool even = std::fmod(nearest, 2.0) == 0.0;
        out.classification = even ? ParityClass::Unbounded : ParityClass::Bounded;
        out.limit_value = even ? 0.0 : 1.0;
    }
    return out;
}

} // namespace dephase
