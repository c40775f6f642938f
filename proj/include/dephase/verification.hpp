#pragma once

// Cross-check suite behind `dephase_qfi verify`. Every invariant listed for a
// module is a mandatory check; the consistency audits between closed forms
// that are known to disagree are informational and never fail the run.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dephase/qfi_engine.hpp"
#include "dephase/resolution.hpp"
#include "dephase/scenario.hpp"
#include "dephase/sweep.hpp"

namespace dephase {

enum class VerifyDepth { Quick, Full };

inline std::string depth_name(VerifyDepth d) { return d == VerifyDepth::Full ? "full" : "quick"; }

struct VerifyOptions {
    VerifyDepth depth = VerifyDepth::Quick;
    std::uint64_t seed = 42;
    /// Relative scaling applied to every closed form before comparison.
    /// Nonzero values exist only to prove the suite is sensitive.
    double perturbation = 0.0;
    unsigned jobs = 1;
};

struct CheckResult {
    std::string module;
    std::string name;
    bool mandatory = true;
    bool passed = true;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool passed() const {
        return std::all_of(checks.begin(), checks.end(),
                           [](const CheckResult& c) { return !c.mandatory || c.passed; });
    }
    [[nodiscard]] std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(
            checks.begin(), checks.end(), [](const CheckResult& c) { return c.mandatory && !c.passed; }));
    }
};

namespace verify_detail {

inline std::string sci(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 3);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

inline std::string fixed(double v) {
    char buf[48];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 8);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

inline double rel(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Largest error seen so far and where it happened.
struct Worst {
    double value = 0.0;
    std::string where = "-";

    void record(double err, const std::string& label) {
        if (!(err <= value)) { // NaN always lands here
            value = err;
            where = label;
        }
    }
    [[nodiscard]] bool within(double tol) const { return value <= tol; }
    [[nodiscard]] std::string describe(double tol) const {
        return "max error " + sci(value) + " (tol " + sci(tol) + ") at " + where;
    }
};

struct Outcome {
    bool passed = true;
    std::string detail;
};

inline Outcome judge(const Worst& w, double tol) { return {w.within(tol), w.describe(tol)}; }

struct Context {
    VerifyOptions options;
    std::mt19937_64 rng;

    [[nodiscard]] bool full() const { return options.depth == VerifyDepth::Full; }
    /// Closed-form value as seen by the suite.
    [[nodiscard]] double closed(double v) const { return v * (1.0 + options.perturbation); }

    ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols) {
        std::normal_distribution<double> normal(0.0, 1.0);
        ComplexMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) {
                m(i, j) = Complex(normal(rng), normal(rng));
            }
        }
        return m;
    }
    ComplexMatrix random_hermitian(Eigen::Index dim) {
        const ComplexMatrix g = random_complex(dim, dim) / std::sqrt(4.0 * static_cast<double>(dim));
        return g + g.adjoint();
    }
    StateVector random_state(Eigen::Index dim) {
        StateVector v = random_complex(dim, 1);
        return v / v.norm();
    }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

struct CheckSpec {
    std::string module;
    std::string name;
    bool mandatory;
    std::function<Outcome(Context&)> run;
};

inline DephasingModel model_of(Correlation c, double gamma, double nu, int n) {
    return DephasingModel::create(gamma, nu, n, c);
}

inline std::string label(std::initializer_list<std::pair<const char*, double>> kv) {
    std::string s;
    for (const auto& [k, v] : kv) {
        s += (s.empty() ? "" : " ") + std::string(k) + "=" + fixed(v);
    }
    return s;
}

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Correlation family(int k, double amplitude = 0.5) {
    switch (k) {
    case 0: return Uncorrelated{};
    case 1: return MaxCorrelated{};
    default: return Partial{amplitude};
    }
}

inline const char* family_name(int k) {
    return k == 0 ? "uncorrelated" : k == 1 ? "max-correlated" : "partial";
}

// ---------------------------------------------------------------------------
// operator-algebra

inline Outcome partial_trace_physical(Context& ctx) {
    Worst trace;
    Worst negativity;
    const int trials = ctx.full() ? 200 : 40;
    for (int i = 0; i < trials; ++i) {
        const Eigen::Index ds = Eigen::Index{1} << (1 + i % (ctx.full() ? 6 : 4));
        const Eigen::Index de = Eigen::Index{1} << (1 + (i / 7) % 3);
        const ComplexMatrix rho = partial_trace_env(ctx.random_state(ds * de), ds, de);
        const std::string where = label({{"dS", double(ds)}, {"dE", double(de)}});
        trace.record(std::abs(rho.trace().real() - 1.0), where);
        negativity.record(std::max(0.0, -eigh(rho).eigenvalues(0)), where);
    }
    return {trace.within(1e-12) && negativity.within(1e-10),
            "trace " + trace.describe(1e-12) + "; negativity " + negativity.describe(1e-10)};
}

/// max |H - U diag(l) U^dag| elementwise, overwriting both inputs. Uses
/// H - W_+ W_+^dag + W_- W_-^dag on the lower triangle, W = U sqrt|l|.
inline double reconstruction_error(ComplexMatrix& h, Spectrum& s) {
    const Eigen::Index dim = h.rows();
    Eigen::Index negatives = 0;
    while (negatives < dim && s.eigenvalues(negatives) < 0.0) {
        ++negatives;
    }
    s.eigenvectors = s.eigenvectors * s.eigenvalues.cwiseAbs().cwiseSqrt().asDiagonal();
    auto lower = h.selfadjointView<Eigen::Lower>();
    lower.rankUpdate(s.eigenvectors.leftCols(negatives), 1.0);
    lower.rankUpdate(s.eigenvectors.rightCols(dim - negatives), -1.0);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
        worst = std::max(worst, h.col(j).tail(dim - j).cwiseAbs().maxCoeff());
    }
    return worst;
}

inline Outcome eigh_reconstruction(Context& ctx) {
    Worst w;
    std::vector<Eigen::Index> dims{1, 2, 3, 8, 17, 64, 256};
    if (ctx.full()) {
        dims.insert(dims.end(), {1024, 4096});
    }
    for (Eigen::Index dim : dims) {
        ComplexMatrix h = ctx.random_hermitian(dim);
        Spectrum s = eigh(h);
        for (Eigen::Index i = 1; i < dim; ++i) {
            if (s.eigenvalues(i - 1) > s.eigenvalues(i)) {
                return {false, "eigenvalues not ascending at dim " + std::to_string(dim)};
            }
        }
        w.record(reconstruction_error(h, s), label({{"dim", double(dim)}}));
    }
    return judge(w, 1e-10);
}

inline Outcome anticommutator_hermitian(Context& ctx) {
    Worst herm;
    Worst residual;
    const int trials = ctx.full() ? 60 : 20;
    for (int i = 0; i < trials; ++i) {
        const Eigen::Index dim = Eigen::Index{1} << (1 + i % (ctx.full() ? 6 : 4));
        const Eigen::Index rank = i % 3 == 0 ? std::max<Eigen::Index>(1, dim / 2) : dim;
        const ComplexMatrix g = ctx.random_complex(dim, rank);
        ComplexMatrix rho = g * g.adjoint();
        rho /= rho.trace().real();
        const ComplexMatrix rhs = ctx.random_hermitian(dim);
        const ComplexMatrix h = solve_anticommutator(rho, rhs);
        const std::string where = label({{"dim", double(dim)}, {"rank", double(rank)}});
        herm.record(max_abs(h - h.adjoint()), where);
        const Spectrum s = eigh(rho);
        const ComplexMatrix u = s.eigenvectors.rightCols(rank);
        residual.record(max_abs(u.adjoint() * (h * rho + rho * h - rhs) * u), where);
    }
    return {herm.within(1e-12) && residual.within(1e-10),
            "hermiticity " + herm.describe(1e-12) + "; support residual " + residual.describe(1e-10)};
}

inline Outcome tensor_associative(Context& ctx) {
    Worst w;
    for (int i = 0; i < 20; ++i) {
        const Eigen::Index da = 1 + i % 3;
        const Eigen::Index db = 1 + (i / 3) % 3;
        const Eigen::Index dc = 2;
        const ComplexMatrix a = ctx.random_complex(da, da);
        const ComplexMatrix b = ctx.random_complex(db, db);
        const ComplexMatrix c = ctx.random_complex(dc, dc);
        w.record(max_abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))),
                 label({{"da", double(da)}, {"db", double(db)}}));
    }
    return judge(w, 1e-13);
}

// ---------------------------------------------------------------------------
// dephasing-models

inline Outcome dephased_state_physical(Context& ctx) {
    Worst w;
    Worst negativity;
    const int n_max = ctx.full() ? 6 : 3;
    for (int n = 1; n <= n_max; ++n) {
        for (int fam = 0; fam < 2; ++fam) {
            for (double nu : {0.5, 1.0, 2.0, 3.0}) {
                if (fam == 1 && nu > 2.0) {
                    continue; // the shared kernel is not a channel above nu = 2
                }
                for (double x : {0.0, 0.3, 1.0, 4.0}) {
                    const auto m = model_of(family(fam), x, nu, n);
                    const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
                    const ComplexMatrix rho = dephased_state(probe, m, 1.0, ctx.uniform(-2.0, 2.0));
                    const std::string where =
                        std::string(family_name(fam)) + " " + label({{"n", double(n)}, {"nu", nu}, {"x", x}});
                    w.record(max_abs(rho - rho.adjoint()), where);
                    w.record(std::abs(rho.trace().real() - 1.0), where);
                    w.record((rho.diagonal().real() - probe.amplitudes().cwiseAbs2()).cwiseAbs().maxCoeff(), where);
                    negativity.record(std::max(0.0, -eigh(rho).eigenvalues(0)), where);
                }
            }
        }
    }
    return {w.within(1e-12) && negativity.within(1e-10),
            "structure " + w.describe(1e-12) + "; negativity " + negativity.describe(1e-10)};
}

inline Outcome single_particle_models_coincide(Context& ctx) {
    Worst w;
    for (int i = 0; i < 50; ++i) {
        const double gamma = ctx.uniform(0.0, 3.0);
        const double nu = ctx.uniform(0.1, 2.0);
        const double t = ctx.uniform(0.0, 2.0);
        const double phi = ctx.uniform(-3.0, 3.0);
        const ProbeState probe = ProbeState::custom(ctx.random_state(2));
        w.record(max_abs(dephased_state(probe, model_of(Uncorrelated{}, gamma, nu, 1), t, phi) -
                         dephased_state(probe, model_of(MaxCorrelated{}, gamma, nu, 1), t, phi)),
                 label({{"gamma", gamma}, {"nu", nu}, {"t", t}}));
    }
    return judge(w, 1e-15);
}

inline Outcome spectral_lorentzian(Context& ctx) {
    Worst w;
    for (double gamma : {0.5, 1.0, 2.0}) {
        const auto s = SpectralSamples::lorentzian(gamma);
        const int steps = ctx.full() ? 100 : 25;
        for (int k = 0; k <= steps; ++k) {
            const double t = 5.0 / gamma * k / steps;
            w.record(std::abs(coherence_from_spectrum(s, t) - Complex(ctx.closed(std::exp(-gamma * t)), 0.0)),
                     label({{"gamma", gamma}, {"t", t}}));
        }
    }
    return judge(w, 1e-4);
}

inline Outcome spectral_gaussian(Context& ctx) {
    Worst w;
    for (double sigma : {0.5, 1.0, 2.0}) {
        const auto s = SpectralSamples::gaussian(sigma);
        const int steps = ctx.full() ? 100 : 25;
        for (int k = 0; k <= steps; ++k) {
            const double t = 5.0 / sigma * k / steps;
            w.record(std::abs(coherence_from_spectrum(s, t) -
                              Complex(ctx.closed(std::exp(-0.5 * sigma * sigma * t * t)), 0.0)),
                     label({{"sigma", sigma}, {"t", t}}));
        }
    }
    return judge(w, 1e-4);
}

inline Outcome mixed_limits(Context& ctx) {
    Worst w;
    for (int n = 1; n <= 6; ++n) {
        for (double nu : {0.5, 1.0, 2.0}) {
            const double t = 0.7;
            const double gamma = 0.4;
            const auto up = model_of(Mixed{std::numbers::pi / 2}, gamma, nu, n);
            const auto down = model_of(Mixed{0.0}, gamma, nu, n);
            const auto local = model_of(Uncorrelated{}, gamma, nu, n);
            const auto shared = model_of(MaxCorrelated{}, gamma, nu, n);
            const std::string where = label({{"n", double(n)}, {"nu", nu}});
            w.record(rel(mixed_collective_coherence(up, t), ctx.closed(std::exp(-n * local_exponent(local, t)))),
                     where + " theta=pi/2");
            w.record(rel(mixed_collective_coherence(down, t), ctx.closed(std::exp(-collective_exponent(shared, t)))),
                     where + " theta=0");
        }
    }
    return judge(w, 1e-15);
}

inline Outcome mixed_monotone(Context& /*ctx*/) {
    std::string where;
    for (int n = 2; n <= 6; ++n) {
        for (double nu : {1.25, 1.5, 2.0, 3.0}) {
            for (double t : {0.3, 1.0}) {
                const auto m = [&](double theta) { return model_of(Mixed{theta}, 0.5, nu, n); };
                double previous = -1.0;
                for (int k = 0; k <= 32; ++k) {
                    const double theta = std::numbers::pi / 2 * k / 32.0;
                    const double c = mixed_collective_coherence(m(theta), t);
                    if (!(c > previous)) {
                        return {false, "not increasing in theta at " +
                                           label({{"n", double(n)}, {"nu", nu}, {"t", t}, {"theta", theta}})};
                    }
                    previous = c;
                }
                // Correlated end decays faster exactly when (n t)^nu > n t^nu.
                const bool faster = mixed_collective_coherence(m(0.0), t) < mixed_collective_coherence(m(std::numbers::pi / 2), t);
                if (faster != (std::pow(n * t, nu) > n * std::pow(t, nu))) {
                    return {false, "endpoint order inconsistent at " + label({{"n", double(n)}, {"nu", nu}})};
                }
            }
        }
    }
    return {true, "increasing in theta on n=2..6, nu in {1.25,1.5,2,3}"};
}

// ---------------------------------------------------------------------------
// purifications

inline Outcome purification_generator(Context& ctx) {
    Worst norm;
    Worst fd;
    const int n_max = ctx.full() ? 6 : 3;
    for (int fam = 0; fam < 3; ++fam) {
        for (int n = 1; n <= n_max; ++n) {
            if (fam == 2 && n != 2) {
                continue;
            }
            for (int trial = 0; trial < 2; ++trial) {
                const double nu = fam == 2 ? 1.0 : ctx.uniform(0.3, 3.0);
                const double t = ctx.uniform(0.2, 2.0);
                const double phi = ctx.uniform(-2.0, 2.0);
                const auto m = model_of(family(fam, ctx.uniform(0.0, 1.0)), ctx.uniform(0.0, 2.0), nu, n);
                const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
                const PurifiedState p = purify(probe, m, t, phi);
                const std::string where = std::string(family_name(fam)) + " " + label({{"n", double(n)}, {"nu", nu}});
                norm.record(std::abs(p.state.norm() - 1.0), where);
                const double h = 1e-5;
                const StateVector numeric =
                    kI * (purify(probe, m, t, phi + h).state - purify(probe, m, t, phi - h).state) / (2.0 * h);
                fd.record((numeric - p.apply_generator(p.state)).cwiseAbs().maxCoeff(), where);
            }
        }
    }
    return {norm.within(1e-12) && fd.within(1e-6),
            "norm " + norm.describe(1e-12) + "; generator " + fd.describe(1e-6)};
}

inline Outcome uncorrelated_reduces_to_channel(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 5 : 3;
    for (int n = 1; n <= n_max; ++n) {
        for (double x : {0.0, 0.1, 0.5, 1.0, 3.0}) {
            for (double phit : {0.0, 0.7, std::numbers::pi / 2}) {
                for (int k = 0; k < 3; ++k) {
                    const double t = 1.3;
                    const double nu = k == 2 ? 2.0 : 1.0;
                    const auto m = model_of(Uncorrelated{}, x / std::pow(t, nu), nu, n);
                    const ProbeState probe = k == 0   ? ProbeState::product_plus(n)
                                             : k == 1 ? ProbeState::ghz(n)
                                                      : ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
                    const PurifiedState p = purify_uncorrelated(probe, m, t, phit / t);
                    w.record(max_abs(p.reduced_system() - dephased_state(probe, m, t, phit / t)),
                             label({{"n", double(n)}, {"x", x}, {"phit", phit}, {"probe", double(k)}}));
                }
            }
        }
    }
    return judge(w, 1e-12);
}

inline Outcome shared_sector_coherence(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 6 : 3;
    for (int n = 1; n <= n_max; ++n) {
        for (double x : {0.2, 1.0, 3.0}) {
            const double t = 0.9;
            const auto m = model_of(MaxCorrelated{}, x / t, 1.0, n);
            const double a = rotation_angle(m, t);
            const ProbeState probe = ProbeState::product_plus(n);
            const ComplexMatrix rho = purify_max_correlated(probe, m, t, 0.0).reduced_system();
            const double weight = 1.0 / static_cast<double>(probe.dim());
            for (Eigen::Index i = 0; i < probe.dim(); ++i) {
                for (Eigen::Index j = 0; j < probe.dim(); ++j) {
                    const int dm = z_total(static_cast<std::uint64_t>(i), n) - z_total(static_cast<std::uint64_t>(j), n);
                    w.record(std::abs(rho(i, j) - weight * ctx.closed(std::cos(a * dm))),
                             label({{"n", double(n)}, {"x", x}, {"dm", double(dm)}}));
                }
            }
            if (n == 1) {
                w.record(std::abs(rho(0, 1).real() / weight - ctx.closed(std::exp(-x))), "n=1 channel");
            }
        }
    }
    return judge(w, 1e-14);
}

inline Outcome populations_independent_of_gamma(Context& ctx) {
    Worst w;
    for (int fam = 0; fam < 3; ++fam) {
        const int n = fam == 2 ? 2 : (ctx.full() ? 5 : 3);
        const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
        const RealVector pops = probe.amplitudes().cwiseAbs2();
        for (double gamma : {0.0, 0.2, 1.0, 5.0}) {
            const auto m = model_of(family(fam, 0.4), gamma, fam == 1 ? 1.5 : 1.0, n);
            const ComplexMatrix rho = purify(probe, m, 0.8, 0.3).reduced_system();
            w.record((rho.diagonal().real() - pops).cwiseAbs().maxCoeff(),
                     std::string(family_name(fam)) + " " + label({{"gamma", gamma}}));
        }
    }
    return judge(w, 1e-13);
}

inline Outcome environment_normalization(Context& /*ctx*/) {
    Worst w;
    for (int n = 1; n <= 7; ++n) {
        const double overlap = ProbeState::ghz(n).amplitudes().dot(ProbeState::product_plus(n).amplitudes()).real();
        w.record(std::abs(2.0 * overlap - EnvInitState::cross_term_coefficient(n)), label({{"n", double(n)}}));
    }
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const EnvInitState env = EnvInitState::create(a, 2);
        const StateVector raw = a * ProbeState::ghz(2).amplitudes() + env.b * ProbeState::product_plus(2).amplitudes();
        w.record(std::abs(raw.squaredNorm() - 1.0), label({{"A", a}}));
        w.record(std::abs(env.amplitudes.norm() - 1.0), label({{"A", a}}));
    }
    return judge(w, 1e-13);
}

// ---------------------------------------------------------------------------
// qfi-engine

inline Outcome ordering_chain(Context& ctx) {
    Worst w;
    const int trials = ctx.full() ? 90 : 30;
    const int n_max = ctx.full() ? 6 : 3;
    for (int i = 0; i < trials; ++i) {
        const int fam = i % 3;
        const int n = fam == 2 ? 2 : 1 + i / 3 % n_max;
        const auto m = model_of(family(fam, ctx.uniform(0.0, 1.0)), ctx.uniform(0.0, 2.0),
                                fam == 2 ? 1.0 : ctx.uniform(0.5, 2.5), n);
        const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
        const PurifiedState p = purify(probe, m, ctx.uniform(0.2, 2.0), ctx.uniform(-1.0, 1.0));
        const double oracle = qfi_reduced(p);
        const double exact = optimal_h(p).value;
        const double ansatz = minimize_ansatz(p, symmetric_ansatz(m)).value;
        const double any = variational_cq(p, ctx.random_hermitian(p.dim_env()));
        const double scale = std::max(1.0, oracle);
        const std::string where = std::string(family_name(fam)) + " " + label({{"n", double(n)}});
        w.record(std::max(0.0, -oracle) / scale, where + " oracle<0");
        w.record(std::abs(exact - oracle) / scale, where + " optimum!=oracle");
        w.record(std::max(0.0, exact - ansatz) / scale, where + " ansatz<optimum");
        w.record(std::max(0.0, ansatz - any) / scale, where + " random<ansatz");
    }
    return judge(w, 1e-8);
}

inline Outcome complete_basis_saturates(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 3 : 2;
    for (int fam = 0; fam < 3; ++fam) {
        for (int n = 1; n <= n_max; ++n) {
            if (fam == 2 && n != 2) {
                continue;
            }
            const auto m = model_of(family(fam, 0.6), 0.7, fam == 1 ? 2.0 : 1.0, n);
            const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
            const PurifiedState p = purify(probe, m, 0.9, 0.0);
            w.record(rel(minimize_ansatz(p, AnsatzBasis::complete_pauli(p.n_env)).value, qfi_reduced(p)),
                     std::string(family_name(fam)) + " " + label({{"n", double(n)}}));
        }
    }
    return judge(w, 1e-8);
}

inline Outcome monotone_in_gamma(Context& ctx) {
    const int n_max = ctx.full() ? 5 : 3;
    for (int n = 1; n <= n_max; ++n) {
        for (auto kind : {ProbeKind::ProductPlus, ProbeKind::Ghz}) {
            double previous = std::numeric_limits<double>::infinity();
            for (int k = 0; k <= 24; ++k) {
                const double gamma = 0.05 * k * k;
                const auto m = model_of(Uncorrelated{}, gamma, 1.5, n);
                const double f = qfi_reduced(purify(ProbeState::make(kind, n), m, 0.7, 0.2));
                if (f > previous + 1e-12) {
                    return {false, "uncorrelated F increased at " + label({{"n", double(n)}, {"gamma", gamma}})};
                }
                previous = f;
            }
        }
    }
    // Shared-environment families: monotone until a * max|ds| reaches pi/2.
    for (int fam = 1; fam < 3; ++fam) {
        const int top = fam == 2 ? 2 : n_max;
        for (int n = 2; n <= top; ++n) {
            for (auto kind : {ProbeKind::ProductPlus, ProbeKind::Ghz}) {
                const double t = 0.7;
                const double span = 2.0 * n; // largest sector difference at nu = 1
                const double limit = -std::log(std::cos(2.0 * std::numbers::pi / (2.0 * span))) / t;
                double previous = std::numeric_limits<double>::infinity();
                for (int k = 0; k <= 24; ++k) {
                    const auto m = model_of(family(fam, 0.5), limit * k / 24.0, 1.0, n);
                    const double f = qfi_reduced(purify(ProbeState::make(kind, n), m, t, 0.2));
                    if (f > previous + 1e-12) {
                        return {false, std::string(family_name(fam)) + " F increased before revival at " +
                                           label({{"n", double(n)}, {"k", double(k)}})};
                    }
                    previous = f;
                }
            }
        }
    }
    return {true, "uncorrelated monotone on gamma grid; shared families monotone up to the first revival"};
}

inline Outcome independent_of_phi(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 5 : 3;
    for (int fam = 0; fam < 3; ++fam) {
        for (int n = 1; n <= n_max; ++n) {
            if (fam == 2 && n != 2) {
                continue;
            }
            const auto m = model_of(family(fam, 0.3), 0.6, fam == 1 ? 2.0 : 1.0, n);
            const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
            const double f0 = qfi_reduced(purify(probe, m, 1.0, 0.0));
            for (double phi : {0.4, 1.3, -2.2}) {
                w.record(std::abs(qfi_reduced(purify(probe, m, 1.0, phi)) - f0) / std::max(1.0, f0),
                         std::string(family_name(fam)) + " " + label({{"n", double(n)}, {"phi", phi}}));
            }
        }
    }
    return judge(w, 1e-9);
}

inline Outcome finite_difference_drho(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 4 : 3;
    for (int fam = 0; fam < 3; ++fam) {
        for (int n = 1; n <= n_max; ++n) {
            if (fam == 2 && n != 2) {
                continue;
            }
            const auto m = model_of(family(fam, 0.7), 0.4, fam == 1 ? 1.5 : 1.0, n);
            const ProbeState probe = ProbeState::custom(ctx.random_state(Eigen::Index{1} << n));
            const double t = 1.2;
            const double phi = 0.5;
            const double h = 1e-5;
            const ComplexMatrix rho = purify(probe, m, t, phi).reduced_system();
            const ComplexMatrix drho =
                (purify(probe, m, t, phi + h).reduced_system() - purify(probe, m, t, phi - h).reduced_system()) /
                (2.0 * h);
            const double analytic = qfi_reduced(purify(probe, m, t, phi));
            w.record(rel(qfi_sld(rho, 0.5 * (drho + drho.adjoint())), analytic),
                     std::string(family_name(fam)) + " " + label({{"n", double(n)}}));
        }
    }
    return judge(w, 1e-5);
}

inline Outcome parity_property(Context& ctx) {
    std::string detail;
    const int n_max = ctx.full() ? 6 : 3;
    for (int n = 2; n <= n_max; ++n) {
        for (double nu : {1.0, 2.0}) {
            const ParityLimit lim = parity_limit(n, nu);
            if (lim.classification == ParityClass::Nonconvergent) {
                continue;
            }
            auto f = [&](double x) {
                const double t = 1.0;
                return qfi_reduced(purify(ProbeState::ghz(n), model_of(MaxCorrelated{}, x, nu, n), t, 0.0));
            };
            auto f_at = [&](double t) {
                return qfi_reduced(purify(ProbeState::ghz(n), model_of(MaxCorrelated{}, 1.0, nu, n), t, 0.0));
            };
            const std::string where = label({{"n", double(n)}, {"nu", nu}});
            if (lim.classification == ParityClass::Unbounded) {
                // gamma = 1, t^nu from 3 upward
                double previous = f_at(std::pow(3.0, 1.0 / nu));
                for (double x : {4.0, 6.0, 9.0, 14.0}) {
                    const double current = f_at(std::pow(x, 1.0 / nu));
                    if (!(current > previous)) {
                        return {false, "even M did not grow at " + where + " gamma t^nu=" + fixed(x)};
                    }
                    previous = current;
                }
            } else {
                const double clean = f(0.0);
                double previous = f(3.0);
                for (double x : {4.0, 6.0, 9.0, 14.0}) {
                    const double current = f(x);
                    if (!(current < previous)) {
                        return {false, "odd M did not decay at " + where + " gamma t^nu=" + fixed(x)};
                    }
                    previous = current;
                }
                if (!(previous < 1e-3 * clean)) {
                    return {false, "odd M information not vanishing at " + where};
                }
            }
            detail += (detail.empty() ? "" : ", ") + std::string("M=") + fixed(lim.m) + " " +
                      parity_name(lim.classification);
        }
    }
    return {true, detail};
}

// ---------------------------------------------------------------------------
// resolution-analytics

inline Outcome ansatz_matches_uncorrelated_closed_form(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 5 : 3;
    for (int n = 1; n <= n_max; ++n) {
        for (double nu : {1.0, 2.0}) {
            for (double x : {0.1, 0.5, 1.0}) {
                for (auto kind : {ProbeKind::Ghz, ProbeKind::ProductPlus}) {
                    const double t = 0.9;
                    const double total = 2.0;
                    const auto m = model_of(Uncorrelated{}, x / std::pow(t, nu), nu, n);
                    const ProbeState probe = ProbeState::make(kind, n);
                    const PurifiedState p = purify(probe, m, t, 0.0);
                    const ProbeMoments pm = probe_moments(probe);
                    const double closed = ctx.closed(closed_form_uncorrelated({m, kind, t, total, pm.q, pm.zbar}));
                    const double engine = resolution_from_qfi(minimize_ansatz(p, symmetric_ansatz(m)).value, t, total);
                    w.record(rel(engine, closed),
                             probe_name(kind) + " " + label({{"n", double(n)}, {"nu", nu}, {"x", x}}));
                }
            }
        }
    }
    return judge(w, 1e-6);
}

inline Outcome improvement_properties(Context& ctx) {
    const auto at = [](double nu) { return improvement_factor(model_of(Uncorrelated{}, 1.0, nu, 1), 100, 1.0); };
    const double root_e = ctx.closed(std::sqrt(std::numbers::e));
    if (rel(at(1.0), root_e) > 1e-9) {
        return {false, "I(1) = " + fixed(at(1.0)) + " differs from sqrt(e) = " + fixed(root_e)};
    }
    double previous = at(1.0);
    const int steps = ctx.full() ? 1800 : 180;
    for (int k = 1; k <= steps; ++k) {
        const double nu = 1.0 + 9.0 * k / steps;
        const double v = at(nu);
        if (v < 1.0 - 1e-9 || v > previous + 1e-15 || previous - v > 2.0 * 9.0 / steps) {
            return {false, "improvement not continuous/decreasing/>=1 near nu=" + fixed(nu)};
        }
        previous = v;
    }
    return {true, "I(1)=sqrt(e), I(10)=" + fixed(previous) + ", nonincreasing on [1,10]"};
}

inline Outcome heisenberg_limit(Context& ctx) {
    Worst w;
    for (int n = 1; n <= 12; ++n) {
        for (double t : {0.1, 1.0, 7.0}) {
            w.record(rel(ctx.closed(correlated_closed_form(n, 1.7, 0.0, t, ProbeKind::Ghz)), 1.0 / std::sqrt(t * n * n)),
                     label({{"n", double(n)}, {"t", t}}));
        }
    }
    return judge(w, 1e-15);
}

inline Outcome ramsey_equivalence(Context& ctx) {
    Worst w;
    for (int n = 1; n <= (ctx.full() ? 8 : 4); ++n) {
        for (double nu : {1.0, 2.0, 3.0}) {
            for (double gamma : {0.25, 0.5, 1.0, 4.0}) {
                const auto m = model_of(MaxCorrelated{}, gamma, nu, n);
                const double te = optimal_time_closed(m, ProbeKind::Ghz);
                const double tu = optimal_time_closed(m, ProbeKind::ProductPlus);
                const double r = ramsey_max_correlated(m, ProbeKind::ProductPlus, tu, 1.0) /
                                 ctx.closed(ramsey_max_correlated(m, ProbeKind::Ghz, te, 1.0));
                w.record(std::abs(r - 1.0), label({{"n", double(n)}, {"nu", nu}, {"gamma", gamma}}));
            }
        }
    }
    return judge(w, 1e-10);
}

inline Outcome optimal_time_agreement(Context& ctx) {
    Worst w;
    for (int n = 1; n <= 5; ++n) {
        for (double nu : {1.0, 2.0, 3.0}) {
            for (double gamma : {0.25, 1.0, 4.0}) {
                const auto m = model_of(MaxCorrelated{}, gamma, nu, n);
                for (auto kind : {ProbeKind::Ghz, ProbeKind::ProductPlus}) {
                    const double closed = ctx.closed(optimal_time_closed(m, kind));
                    const double numeric = minimize_over_t(
                        [&](double t) { return ramsey_max_correlated(m, kind, t, 1.0); }, closed);
                    w.record(rel(numeric, closed),
                             probe_name(kind) + " " + label({{"n", double(n)}, {"nu", nu}, {"gamma", gamma}}));
                }
            }
        }
    }
    return judge(w, 1e-6);
}

inline Outcome correlated_ghz_matches_oracle(Context& ctx) {
    Worst w;
    const int n_max = ctx.full() ? 6 : 4;
    for (int n = 2; n <= n_max; ++n) {
        for (double nu : {1.0, 2.0}) {
            for (double x : {0.2, 1.0, 3.0}) {
                const double t = 1.0;
                const auto m = model_of(MaxCorrelated{}, x, nu, n);
                const double f = qfi_reduced(purify(ProbeState::ghz(n), m, t, 0.0));
                const std::string where = label({{"n", double(n)}, {"nu", nu}, {"x", x}});
                try {
                    const double closed = ctx.closed(correlated_closed_form(n, nu, x, t, ProbeKind::Ghz));
                    w.record(rel(qfi_from_resolution(closed, t, 1.0), f), where);
                } catch (const UndefinedResolution&) {
                    w.record(f / (n * n * t * t), where + " (closed form undefined)");
                }
            }
        }
    }
    return judge(w, 1e-6);
}

// ---------------------------------------------------------------------------
// cli-app

inline Outcome number_format_round_trip(Context& ctx) {
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(ctx.uniform(-1.0, 1.0), static_cast<int>(ctx.uniform(-300.0, 300.0)));
        const std::string s = format_number(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        if (back != v || s.find(',') != std::string::npos) {
            return {false, "number " + s + " does not round-trip"};
        }
    }
    if (format_number(0.1) != "0.10000000000000001" || format_number(2.0) != "2") {
        return {false, "unexpected 17-digit rendering"};
    }
    return {true, "2000 random doubles round-trip at 17 significant digits"};
}

// ---------------------------------------------------------------------------
// Informational audits

inline Outcome audit_shared_channel_gap(Context& ctx) {
    std::string detail;
    const int n_max = ctx.full() ? 6 : 3;
    for (int n = 2; n <= n_max; ++n) {
        for (double nu : {1.0, 2.0}) {
            const double x = 0.5;
            const auto m = model_of(MaxCorrelated{}, x, nu, n);
            const double purified = qfi_reduced(purify(ProbeState::ghz(n), m, 1.0, 0.0));
            const ComplexMatrix rho = dephased_state(ProbeState::ghz(n), m, 1.0, 0.0);
            const double channel = qfi_sld(rho, phase_derivative(rho, system_generator_diagonal(n, 1.0)));
            detail += (detail.empty() ? "" : "; ") + label({{"n", double(n)}, {"nu", nu}}) +
                      " shared-qubit F=" + fixed(purified) + " collective-channel F=" + fixed(channel);
        }
    }
    return {true, "GHZ, gamma t^nu=0.5: " + detail};
}

inline Outcome audit_product_branch(Context& ctx) {
    std::string detail;
    const int n_max = ctx.full() ? 6 : 4;
    for (int n = 2; n <= n_max; ++n) {
        for (double nu : {1.0, 2.0}) {
            for (double x : {0.2, 1.0, 3.0}) {
                const auto m = model_of(MaxCorrelated{}, x, nu, n);
                const double f = qfi_reduced(purify(ProbeState::product_plus(n), m, 1.0, 0.0));
                std::string closed;
                try {
                    closed = fixed(qfi_from_resolution(correlated_closed_form(n, nu, x, 1.0, ProbeKind::ProductPlus), 1.0, 1.0));
                } catch (const UndefinedResolution&) {
                    closed = "undefined";
                }
                detail += (detail.empty() ? "" : "; ") + label({{"n", double(n)}, {"nu", nu}, {"x", x}}) +
                          " closed F=" + closed + " oracle F=" + fixed(f);
            }
        }
    }
    return {true, "product-probe correlated closed form vs oracle: " + detail};
}

inline Outcome audit_partial_asymptote(Context& /*ctx*/) {
    std::string detail;
    const double t = 8.0;
    const auto gamma = 1.0;
    for (double a : {0.25, 0.5, 0.75, 1.0}) {
        for (auto kind : {ProbeKind::Ghz, ProbeKind::ProductPlus}) {
            const auto m = model_of(Partial{a}, gamma, 1.0, 2);
            const ProbeState probe = ProbeState::make(kind, 2);
            const double q = std::clamp(
                (probe.amplitudes().adjoint() * build_pauli_string("ZZ") * probe.amplitudes())(0).real(), -1.0, 1.0);
            const double engine =
                resolution_from_qfi(minimize_ansatz(purify(probe, m, t, 0.0), symmetric_ansatz(m)).value, t, 1.0);
            std::string literal;
            try {
                literal = fixed(partial_corr_asymptote(a, q, t));
            } catch (const UndefinedResolution&) {
                literal = "undefined";
            }
            const double b = EnvInitState::create(a, 2).b;
            const double inner = a / std::numbers::sqrt2 + b / 2.0;
            const double factored_arg = (1.0 + q) * (2.0 - 8.0 * b * b * inner * inner);
            const std::string factored = factored_arg > 0.0 ? fixed(1.0 / std::sqrt(t * factored_arg)) : "undefined";
            detail += (detail.empty() ? "" : "; ") + probe_name(kind) + " " + label({{"A", a}, {"q", q}}) +
                      " engine=" + fixed(engine) + " printed=" + literal + " (1+q)-factored=" + factored;
        }
    }
    return {true, "long-time partial-correlation form at gamma t=8: " + detail};
}

inline Outcome audit_large_n_optimum(Context& /*ctx*/) {
    std::string detail;
    for (double nu : {1.0, 1.5, 2.0, 3.0}) {
        const auto m = model_of(Uncorrelated{}, 1.0, nu, 1);
        const double closed = optimal_resolution_uncorrelated(m, 100, 1.0);
        const double numeric = optimal_uncorrelated_numeric(m, 100, 1.0).resolution;
        detail += (detail.empty() ? "" : "; ") + label({{"nu", nu}}) + " closed=" + fixed(closed) +
                  " numeric=" + fixed(numeric) + " gap=" + fixed(100.0 * rel(closed, numeric)) + "%";
    }
    return {true, "large-n optimum vs numeric minimum at n=100, gamma=1: " + detail};
}

inline Outcome audit_normalization_constant(Context& /*ctx*/) {
    std::string detail;
    for (double a : {0.25, 0.5, 0.75}) {
        const EnvInitState env = EnvInitState::create(a, 2);
        detail += (detail.empty() ? "" : "; ") + label({{"A", a}, {"B", env.b}}) +
                  " printed-constraint residual=" + fixed(env.printed_normalization_residual());
    }
    return {true, "n=2 cross term: direct 2<GHZ|++>=" + fixed(EnvInitState::cross_term_coefficient(2)) +
                      ", printed=" + fixed(EnvInitState::printed_cross_term_coefficient(2)) + "; " + detail};
}

inline Outcome audit_coherence_convention(Context& /*ctx*/) {
    const auto m = model_of(Uncorrelated{}, 0.7, 1.0, 1);
    const ComplexMatrix rho = dephased_state(ProbeState::product_plus(1), m, 1.0, 0.0);
    return {true, "single-particle coherence uses e^{-gamma t^nu} (2|rho01|=" + fixed(2.0 * std::abs(rho(0, 1))) +
                      " at gamma t=0.7, e^{-0.7}=" + fixed(std::exp(-0.7)) +
                      "); all uncorrelated closed forms use e^{2 gamma t^nu} in the QFI, "
                      "the alternative e^{-2 gamma t^nu} convention would double every exponent"};
}

inline Outcome audit_shared_revival(Context& /*ctx*/) {
    auto f = [](double gamma) {
        return qfi_reduced(purify(ProbeState::ghz(2), model_of(MaxCorrelated{}, gamma, 1.0, 2), 1.0, 0.0));
    };
    return {true, "shared-qubit GHZ n=2, t=1: F(0)=" + fixed(f(0.0)) + " F(ln sqrt2)=" + sci(f(std::log(std::sqrt(2.0)))) +
                      " F(8)=" + fixed(f(8.0)) + " (information revives as the rotation passes a quarter turn)"};
}

inline std::vector<CheckSpec> registry() {
    return {
        {"operator-algebra", "partial trace is trace-one and positive", true, partial_trace_physical},
        {"operator-algebra", "eigh reconstruction", true, eigh_reconstruction},
        {"operator-algebra", "anticommutator solution hermitian", true, anticommutator_hermitian},
        {"operator-algebra", "tensor associativity", true, tensor_associative},
        {"dephasing-models", "dephased state physical, populations kept", true, dephased_state_physical},
        {"dephasing-models", "single-particle models coincide", true, single_particle_models_coincide},
        {"dephasing-models", "Lorentzian spectrum gives exponential decay", true, spectral_lorentzian},
        {"dephasing-models", "Gaussian spectrum gives quadratic decay", true, spectral_gaussian},
        {"dephasing-models", "mixed coherence limits", true, mixed_limits},
        {"dephasing-models", "mixed coherence monotone in theta", true, mixed_monotone},
        {"purifications", "normalized, generated by phase operator", true, purification_generator},
        {"purifications", "uncorrelated purification reduces to channel", true, uncorrelated_reduces_to_channel},
        {"purifications", "shared-qubit sector coherences", true, shared_sector_coherence},
        {"purifications", "populations independent of gamma", true, populations_independent_of_gamma},
        {"purifications", "environment state normalized", true, environment_normalization},
        {"qfi-engine", "ordering chain", true, ordering_chain},
        {"qfi-engine", "complete basis saturates oracle", true, complete_basis_saturates},
        {"qfi-engine", "monotone in gamma", true, monotone_in_gamma},
        {"qfi-engine", "independent of phi", true, independent_of_phi},
        {"qfi-engine", "finite-difference derivative", true, finite_difference_drho},
        {"qfi-engine", "parity of collective exponent", true, parity_property},
        {"resolution-analytics", "ansatz reproduces uncorrelated closed form", true,
         ansatz_matches_uncorrelated_closed_form},
        {"resolution-analytics", "improvement factor properties", true, improvement_properties},
        {"resolution-analytics", "correlated GHZ form at gamma=0", true, heisenberg_limit},
        {"resolution-analytics", "correlated Ramsey equivalence", true, ramsey_equivalence},
        {"resolution-analytics", "numeric optimal time", true, optimal_time_agreement},
        {"resolution-analytics", "correlated GHZ form vs oracle", true, correlated_ghz_matches_oracle},
        {"cli-app", "17-digit number formatting", true, number_format_round_trip},
        {"audit", "shared-qubit purification vs collective channel", false, audit_shared_channel_gap},
        {"audit", "correlated product-probe form", false, audit_product_branch},
        {"audit", "partial-correlation long-time form", false, audit_partial_asymptote},
        {"audit", "large-n optimum vs numeric", false, audit_large_n_optimum},
        {"audit", "environment normalization constant", false, audit_normalization_constant},
        {"audit", "coherence convention", false, audit_coherence_convention},
        {"audit", "shared-qubit information revival", false, audit_shared_revival},
    };
}

} // namespace verify_detail

/// Runs every registered check. Each check draws from its own generator,
/// seeded from (seed, index), so results do not depend on `jobs`.
inline VerifyReport run_verification(const VerifyOptions& options) {
    const auto specs = verify_detail::registry();
    VerifyReport report;
    report.checks = parallel_map(specs.size(), options.jobs, [&](std::size_t i) {
        const auto& spec = specs[i];
        verify_detail::Context ctx{options, std::mt19937_64(options.seed * 1000003ULL + i)};
        CheckResult r{spec.module, spec.name, spec.mandatory, true, "", 0.0};
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto outcome = spec.run(ctx);
            r.passed = outcome.passed;
            r.detail = outcome.detail;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return r;
    });
    return report;
}

} // namespace dephase
