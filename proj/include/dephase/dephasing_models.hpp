#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include "dephase/operator_algebra.hpp"

namespace dephase {

// ---------------------------------------------------------------------------
// Correlation structures

struct Uncorrelated {};
struct MaxCorrelated {};
/// Partially correlated environments prepared in A|GHZ> + B|+>^n.
struct Partial {
    double amplitude = 0.0;
};
/// sin^2(theta) uncorrelated + cos^2(theta) maximally correlated spectra.
struct Mixed {
    double theta = 0.0;
};

using Correlation = std::variant<Uncorrelated, MaxCorrelated, Partial, Mixed>;

inline std::string correlation_name(const Correlation& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Uncorrelated>) {
                return "uncorrelated";
            } else if constexpr (std::is_same_v<T, MaxCorrelated>) {
                return "max-correlated";
            } else if constexpr (std::is_same_v<T, Partial>) {
                return "partial";
            } else {
                return "mixed";
            }
        },
        c);
}

/// Power-law dephasing gamma(t) = gamma * t^nu for n particles.
struct DephasingModel {
    double gamma = 0.0; ///< decay constant, units time^-nu
    double nu = 1.0;    ///< power; 1 is Markovian
    int n = 1;
    Correlation correlation = Uncorrelated{};

    /// Validating constructor.
    static DephasingModel create(double gamma, double nu, int n, Correlation correlation) {
        DephasingModel m{gamma, nu, n, correlation};
        m.validate();
        return m;
    }

    void validate() const {
        if (!std::isfinite(gamma) || gamma < 0.0) {
            throw InputError("gamma must be finite and non-negative");
        }
        if (!std::isfinite(nu) || nu <= 0.0) {
            throw InputError("nu must be finite and positive");
        }
        if (n < 1) {
            throw InputError("particle count must be at least 1");
        }
        if (const auto* p = std::get_if<Partial>(&correlation)) {
            if (n != 2) {
                throw UnsupportedCase("partially correlated environments require n = 2");
            }
            if (!(p->amplitude >= 0.0 && p->amplitude <= 1.0)) {
                throw InputError("partial-correlation amplitude A must lie in [0, 1]");
            }
        }
        if (const auto* m = std::get_if<Mixed>(&correlation)) {
            if (!(m->theta >= 0.0 && m->theta <= std::numbers::pi / 2)) {
                throw InputError("mixing angle theta must lie in [0, pi/2]");
            }
        }
    }

    template <typename T>
    [[nodiscard]] bool is() const {
        return std::holds_alternative<T>(correlation);
    }
};

// ---------------------------------------------------------------------------
// Probe states

enum class ProbeKind { ProductPlus, Ghz, Custom };

inline std::string probe_name(ProbeKind k) {
    switch (k) {
    case ProbeKind::ProductPlus: return "plus";
    case ProbeKind::Ghz: return "ghz";
    case ProbeKind::Custom: return "custom";
    }
    return "custom";
}

/// Normalized pure state of n probe qubits.
class ProbeState {
public:
    static ProbeState product_plus(int n) {
        check_size(n);
        const auto dim = Eigen::Index{1} << n;
        StateVector v = StateVector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
        return ProbeState(n, std::move(v), ProbeKind::ProductPlus);
    }

    static ProbeState ghz(int n) {
        check_size(n);
        const auto dim = Eigen::Index{1} << n;
        StateVector v = StateVector::Zero(dim);
        v(0) = std::numbers::sqrt2 / 2;
        v(dim - 1) += std::numbers::sqrt2 / 2; // n = 1 collapses to |0> + |1>
        return ProbeState(n, std::move(v), ProbeKind::Ghz);
    }

    static ProbeState make(ProbeKind kind, int n) {
        switch (kind) {
        case ProbeKind::ProductPlus: return product_plus(n);
        case ProbeKind::Ghz: return ghz(n);
        case ProbeKind::Custom: break;
        }
        throw InputError("custom probes need explicit amplitudes");
    }

    static ProbeState custom(StateVector amplitudes) {
        const int n = qubit_count(amplitudes.size());
        if (std::abs(amplitudes.squaredNorm() - 1.0) > 1e-12) {
            throw InputError("probe state is not normalized");
        }
        return ProbeState(n, std::move(amplitudes), ProbeKind::Custom);
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] const StateVector& amplitudes() const { return amplitudes_; }
    [[nodiscard]] ProbeKind kind() const { return kind_; }
    [[nodiscard]] Eigen::Index dim() const { return amplitudes_.size(); }

private:
    ProbeState(int n, StateVector v, ProbeKind k) : n_(n), amplitudes_(std::move(v)), kind_(k) {}

    static void check_size(int n) {
        if (n < 1 || n > kMaxQubits) {
            throw InputError("probe size must be between 1 and " + std::to_string(kMaxQubits));
        }
    }

    int n_;
    StateVector amplitudes_;
    ProbeKind kind_;
};

// ---------------------------------------------------------------------------
// Exponents

inline void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InputError("time must be finite and non-negative");
    }
}

/// gamma * t^nu
inline double local_exponent(const DephasingModel& model, double t) {
    require_time(t);
    return model.gamma * std::pow(t, model.nu);
}

/// gamma * (n t)^nu for maximally correlated environments.
inline double collective_exponent(const DephasingModel& model, double t) {
    if (!model.is<MaxCorrelated>()) {
        throw InputError("collective exponent needs maximally correlated environments");
    }
    require_time(t);
    return model.gamma * std::pow(model.n * t, model.nu);
}

/// Survival factor of the GHZ extreme coherence under the mixed joint
/// spectrum: sin^2(theta) e^{-n gamma t^nu} + cos^2(theta) e^{-gamma (n t)^nu}.
inline double mixed_collective_coherence(const DephasingModel& model, double t) {
    const auto* mixed = std::get_if<Mixed>(&model.correlation);
    if (mixed == nullptr) {
        throw InputError("mixed coherence needs a Mixed correlation");
    }
    require_time(t);
    const double s = std::sin(mixed->theta);
    const double c = std::cos(mixed->theta);
    const double local = model.gamma * std::pow(t, model.nu);
    const double collective = model.gamma * std::pow(model.n * t, model.nu);
    return s * s * std::exp(-model.n * local) + c * c * std::exp(-collective);
}

// ---------------------------------------------------------------------------
// Spectral functions F(w)

/// Uniformly spaced samples of a normalized spectral density F(w) >= 0.
class SpectralSamples {
public:
    static constexpr double kNormTolerance = 1e-6;

    /// Validates spacing, positivity and normalization.
    static SpectralSamples from_grid(std::vector<double> w, std::vector<double> density) {
        if (w.size() != density.size() || w.size() < 3) {
            throw InputError("spectral grid needs at least 3 matching (w, F) samples");
        }
        const double h = (w.back() - w.front()) / static_cast<double>(w.size() - 1);
        if (!(h > 0.0)) {
            throw InputError("spectral grid must be increasing");
        }
        for (std::size_t i = 1; i < w.size(); ++i) {
            if (std::abs((w[i] - w[i - 1]) - h) > 1e-6 * h) {
                throw InputError("spectral grid is not uniformly spaced");
            }
        }
        for (double f : density) {
            if (!(f >= 0.0) || !std::isfinite(f)) {
                throw InputError("spectral density must be finite and non-negative");
            }
        }
        SpectralSamples s(std::move(w), std::move(density), h);
        const double mass = s.integral();
        if (std::abs(mass - 1.0) > kNormTolerance) {
            throw InputError("spectral density is not normalized (integral = " +
                             std::to_string(mass) + ")");
        }
        return s;
    }

    /// Tabulates `f` on [-half_width, half_width] and rescales the samples to
    /// unit trapezoid mass.
    static SpectralSamples tabulate(const std::function<double(double)>& f, double half_width,
                                    std::size_t points) {
        if (points < 3 || !(half_width > 0.0)) {
            throw InputError("tabulation needs a positive width and at least 3 points");
        }
        std::vector<double> w(points);
        std::vector<double> d(points);
        const double h = 2.0 * half_width / static_cast<double>(points - 1);
        for (std::size_t i = 0; i < points; ++i) {
            w[i] = -half_width + h * static_cast<double>(i);
            d[i] = f(w[i]);
        }
        SpectralSamples raw(w, d, h);
        const double mass = raw.integral();
        if (!(mass > 0.0)) {
            throw InputError("spectral density has no mass on the grid");
        }
        for (double& x : d) {
            x /= mass;
        }
        return from_grid(std::move(w), std::move(d));
    }

    /// (gamma/pi) / (w^2 + gamma^2); Fourier transform e^{-gamma |t|}.
    static SpectralSamples lorentzian(double gamma, double half_width_in_gamma = 2e4,
                                      double spacing_in_gamma = 0.1) {
        if (!(gamma > 0.0)) {
            throw InputError("Lorentzian width must be positive");
        }
        const auto points =
            static_cast<std::size_t>(std::llround(2.0 * half_width_in_gamma / spacing_in_gamma)) + 1;
        return tabulate(
            [gamma](double w) { return gamma / std::numbers::pi / (w * w + gamma * gamma); },
            half_width_in_gamma * gamma, points);
    }

    /// Zero-mean normal density; Fourier transform e^{-sigma^2 t^2 / 2}.
    static SpectralSamples gaussian(double sigma, double half_width_in_sigma = 10.0,
                                    std::size_t points = 4001) {
        if (!(sigma > 0.0)) {
            throw InputError("Gaussian width must be positive");
        }
        const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
        return tabulate(
            [sigma, norm](double w) { return norm * std::exp(-0.5 * w * w / (sigma * sigma)); },
            half_width_in_sigma * sigma, points);
    }

    /// Two-column CSV (w, F) with a single header line.
    static SpectralSamples load_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open spectral CSV '" + path + "'");
        }
        std::string line;
        if (!std::getline(in, line)) {
            throw InputError("spectral CSV '" + path + "' is empty");
        }
        std::vector<double> w;
        std::vector<double> d;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') {
                line.pop_back();
            }
            if (line.empty()) {
                continue;
            }
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw InputError("line " + std::to_string(lineno) + ": expected two columns");
            }
            w.push_back(parse_double(std::string_view(line).substr(0, comma), lineno));
            d.push_back(parse_double(std::string_view(line).substr(comma + 1), lineno));
        }
        return from_grid(std::move(w), std::move(d));
    }

    [[nodiscard]] double integral() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < density_.size(); ++i) {
            const double weight = (i == 0 || i + 1 == density_.size()) ? 0.5 : 1.0;
            acc += weight * density_[i];
        }
        return acc * spacing_;
    }

    [[nodiscard]] const std::vector<double>& frequencies() const { return w_; }
    [[nodiscard]] const std::vector<double>& density() const { return density_; }
    [[nodiscard]] double spacing() const { return spacing_; }

private:
    SpectralSamples(std::vector<double> w, std::vector<double> d, double h)
        : w_(std::move(w)), density_(std::move(d)), spacing_(h) {}

    static double parse_double(std::string_view field, std::size_t lineno) {
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
            field.remove_suffix(1);
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
            throw InputError("line " + std::to_string(lineno) + ": bad number '" +
                             std::string(field) + "'");
        }
        return value;
    }

    std::vector<double> w_;
    std::vector<double> density_;
    double spacing_;
};

/// Trapezoid value of int F(w) e^{-i w t} dw.
inline Complex coherence_from_spectrum(const SpectralSamples& samples, double t) {
    if (std::abs(samples.integral() - 1.0) > SpectralSamples::kNormTolerance) {
        throw InputError("spectral samples are not normalized");
    }
    const auto& w = samples.frequencies();
    const auto& f = samples.density();
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double weight = (i == 0 || i + 1 == w.size()) ? 0.5 : 1.0;
        acc += weight * f[i] * Complex(std::cos(w[i] * t), -std::sin(w[i] * t));
    }
    return acc * samples.spacing();
}

// ---------------------------------------------------------------------------
// Dephased system state

/// Density matrix of the probe after interrogation time t at detuning phi.
/// Populations are untouched; the coherence between basis strings x, y picks
/// up e^{-i phi t (m_x - m_y)/2} and a decay factor:
///   Uncorrelated   e^{-gamma t^nu d_H(x, y)}
///   MaxCorrelated  e^{-gamma (|m_x - m_y| t / 2)^nu}
/// The maximally correlated kernel is only positive for nu <= 2.
inline ComplexMatrix dephased_state(const ProbeState& probe, const DephasingModel& model,
                                    double t, double phi) {
    model.validate();
    require_time(t);
    if (probe.n() != model.n) {
        throw InputError("probe size does not match the model's particle count");
    }
    const bool uncorrelated = model.is<Uncorrelated>();
    if (!uncorrelated && !model.is<MaxCorrelated>()) {
        throw InputError("dephased_state supports uncorrelated and maximally correlated "
                         "environments only; use a purification for " +
                         correlation_name(model.correlation));
    }
    if (!uncorrelated && model.nu > 2.0) {
        throw InputError("maximally correlated dephasing with nu > 2 is not a positive channel");
    }
    const int n = model.n;
    const auto dim = probe.dim();
    const StateVector& psi = probe.amplitudes();
    const double local = model.gamma * std::pow(t, model.nu);

    ComplexMatrix rho(dim, dim);
    for (Eigen::Index y = 0; y < dim; ++y) {
        const int my = z_total(static_cast<std::uint64_t>(y), n);
        for (Eigen::Index x = 0; x < dim; ++x) {
            const int mx = z_total(static_cast<std::uint64_t>(x), n);
            double decay = 1.0;
            if (x != y) {
                if (uncorrelated) {
                    decay = std::exp(-local * hamming_distance(static_cast<std::uint64_t>(x),
                                                               static_cast<std::uint64_t>(y)));
                } else {
                    const double span = std::abs(mx - my) * t / 2.0;
                    decay = std::exp(-model.gamma * std::pow(span, model.nu));
                }
            }
            const Complex phase = std::polar(1.0, -phi * t * (mx - my) / 2.0);
            rho(x, y) = psi(x) * std::conj(psi(y)) * phase * decay;
        }
    }
    return rho;
}

} // namespace dephase
