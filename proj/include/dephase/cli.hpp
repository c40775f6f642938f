#pragma once

// Command-line front end. run_cli() is the whole program; tools/dephase_qfi.cpp
// only forwards argv to it.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dephase/errors.hpp"
#include "dephase/resolution.hpp"
#include "dephase/scenario.hpp"
#include "dephase/sweep.hpp"
#include "dephase/verification.hpp"

#ifndef DEPHASE_VERSION
#define DEPHASE_VERSION "0.0.0"
#endif

namespace dephase {

inline constexpr const char* kVersion = DEPHASE_VERSION;

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitIo = 2 };

namespace cli_detail {

using json = nlohmann::json;

/// Malformed config file.
class ParseFailure : public Error {
  public:
    using Error::Error;
};

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

/// key=value lines; '#' starts a comment anywhere on a line.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config file " + path);
    }
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ParseFailure(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) {
            throw ParseFailure(path + ":" + std::to_string(lineno) + ": empty key");
        }
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

inline bool flag_present(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args) {
        if (a == "--") {
            break;
        }
        if (a == flag || a.rfind(flag + "=", 0) == 0) {
            return true;
        }
    }
    return false;
}

inline std::optional<std::string> config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) {
            return args[i].substr(9);
        }
    }
    return std::nullopt;
}

/// Config entries become flags placed right after the subcommand name, so
/// anything given on the command line still wins.
inline std::vector<std::string> merge_config(std::vector<std::string> args,
                                             const std::vector<std::string>& subcommands) {
    const auto path = config_path(args);
    if (!path) {
        return args;
    }
    std::size_t insert_at = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (std::find(subcommands.begin(), subcommands.end(), args[i]) != subcommands.end()) {
            insert_at = i + 1;
            break;
        }
    }
    std::vector<std::string> injected;
    for (const auto& [key, value] : read_config(*path)) {
        if (key == "config" || flag_present(args, key)) {
            continue;
        }
        injected.push_back("--" + key);
        injected.push_back(value);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), injected.begin(), injected.end());
    return args;
}

inline std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) {
        s += (s.empty() ? "" : " ") + p;
    }
    return s;
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
        throw IoError("write to " + path + " failed");
    }
}

inline json check_json(const CheckResult& c) {
    return {{"module", c.module}, {"name", c.name}, {"mandatory", c.mandatory}, {"passed", c.passed},
            {"detail", c.detail}};
}

/// Flags shared by `qfi` and `resolution`.
struct ScenarioFlags {
    std::string correlation = "uncorrelated";
    std::string probe = "ghz";
    int n = 2;
    double gamma = 0.25;
    double nu = 1.0;
    double t = 1.0;
    double phi = 0.0;
    double total_time = 1.0;
    double amplitude = 0.5;
    double theta = 0.0;
    std::string ansatz = "symmetric";

    void attach(CLI::App* app, bool with_t) {
        app->add_option("--correlation", correlation, "uncorrelated, max-correlated, partial or mixed")
            ->check(CLI::IsMember({"uncorrelated", "max-correlated", "partial", "mixed"}))
            ->capture_default_str();
        app->add_option("--probe", probe, "ghz or plus")->check(CLI::IsMember({"ghz", "plus"}))->capture_default_str();
        app->add_option("--n", n, "number of qubits")->capture_default_str();
        app->add_option("--gamma", gamma, "decay constant")->capture_default_str();
        app->add_option("--nu", nu, "power of the decay exponent")->capture_default_str();
        if (with_t) {
            app->add_option("--t", t, "interrogation time")->capture_default_str();
        }
        app->add_option("--phi", phi, "frequency at which the QFI is evaluated")->capture_default_str();
        app->add_option("--T", total_time, "total time")->capture_default_str();
        app->add_option("--amplitude", amplitude, "GHZ amplitude A of the partially correlated environment")
            ->capture_default_str();
        app->add_option("--theta", theta, "mixing angle")->capture_default_str();
        app->add_option("--ansatz", ansatz, "symmetric, complete or none")
            ->check(CLI::IsMember({"symmetric", "complete", "none"}))
            ->capture_default_str();
    }

    [[nodiscard]] Correlation correlation_value() const {
        if (correlation == "max-correlated") {
            return MaxCorrelated{};
        }
        if (correlation == "partial") {
            return Partial{amplitude};
        }
        if (correlation == "mixed") {
            return Mixed{theta};
        }
        return Uncorrelated{};
    }
    [[nodiscard]] ProbeKind probe_kind() const { return probe == "plus" ? ProbeKind::ProductPlus : ProbeKind::Ghz; }
    [[nodiscard]] AnsatzChoice ansatz_choice() const {
        return ansatz == "complete" ? AnsatzChoice::Complete
               : ansatz == "none"   ? AnsatzChoice::None
                                    : AnsatzChoice::Symmetric;
    }
    [[nodiscard]] DephasingModel model() const {
        return DephasingModel::create(gamma, nu, n, correlation_value());
    }

    [[nodiscard]] json to_json(bool with_t) const {
        json j{{"correlation", correlation}, {"probe", probe}, {"n", n},   {"gamma", gamma},
               {"nu", nu},                   {"phi", phi},     {"T", total_time}, {"ansatz", ansatz}};
        if (with_t) {
            j["t"] = t;
        }
        if (correlation == "partial") {
            j["amplitude"] = amplitude;
        }
        if (correlation == "mixed") {
            j["theta"] = theta;
        }
        return j;
    }
};

struct Globals {
    std::string manifest;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    std::string config;
};

/// Everything a subcommand reports back to run_cli.
struct RunRecord {
    json parameters = json::object();
    std::vector<CheckResult> checks;
    std::string default_manifest;
    int exit_code = kExitOk;
};

inline CheckResult post_check(std::string name, bool passed, std::string detail) {
    return {"cli-app", std::move(name), true, passed, std::move(detail), 0.0};
}

// ---------------------------------------------------------------------------
// improvement

struct ImprovementFlags {
    double nu_min = 1.0;
    double nu_max = 6.0;
    int steps = 101;
    std::string out;
    int n = 100;
    double gamma = 0.5;
    double total_time = 1.0;
};

inline RunRecord run_improvement(const ImprovementFlags& f, const Globals& g, std::ostream& os) {
    if (!(f.nu_min >= 0.05)) {
        throw InputError("nu-min must be at least 0.05");
    }
    if (!(f.nu_max >= f.nu_min)) {
        throw InputError("nu-max must not be below nu-min");
    }
    if (f.steps < 2 && !(f.steps == 1 && f.nu_min == f.nu_max)) {
        throw InputError("steps must be at least 2 (1 only for a single nu)");
    }
    RunRecord rec;
    rec.parameters = {{"nu_min", f.nu_min}, {"nu_max", f.nu_max}, {"steps", f.steps}, {"out", f.out},
                      {"n", f.n},           {"gamma", f.gamma},   {"T", f.total_time}};
    const auto values = parallel_map(static_cast<std::size_t>(f.steps), g.jobs, [&](std::size_t i) {
        const double nu = f.steps == 1 ? f.nu_min : f.nu_min + (f.nu_max - f.nu_min) * i / (f.steps - 1.0);
        return std::pair{nu, improvement_factor(DephasingModel::create(f.gamma, nu, f.n, Uncorrelated{}), f.n,
                                                f.total_time)};
    });
    SweepTable table{{"nu", "improvement"}, {}};
    bool at_least_one = true;
    for (const auto& [nu, value] : values) {
        table.rows.push_back({nu, value});
        at_least_one = at_least_one && value >= 1.0 - 1e-9;
    }
    std::ostringstream csv;
    table.write_csv(csv);
    if (f.out.empty()) {
        os << csv.str();
    } else {
        write_file(f.out, csv.str());
    }
    rec.checks.push_back(post_check("improvement at least one", at_least_one, std::to_string(values.size()) + " rows"));
    rec.default_manifest = f.out.empty() ? "improvement.manifest.json" : f.out + ".manifest.json";
    return rec;
}

// ---------------------------------------------------------------------------
// qfi

struct QfiFlags {
    ScenarioFlags scenario;
    std::string out;
};

inline json report_json(const QfiReport& r, const ScenarioFlags& flags) {
    json scenario = flags.to_json(true);
    scenario["ansatz_basis"] = r.ansatz_label;
    if (r.parity) {
        scenario["parity"] = parity_name(r.parity->classification);
        scenario["parity_m"] = r.parity->m;
        scenario["parity_limit"] = r.parity->limit_value;
    }
    return {{"qfi_oracle", r.qfi_oracle},
            {"cq_ansatz", r.cq_ansatz},
            {"cq_exact_opt", r.cq_exact_opt},
            {"coefficients", r.coefficients},
            {"resolution", r.resolution},
            {"scenario", scenario}};
}

inline RunRecord run_qfi(const QfiFlags& f, const Globals& /*g*/, std::ostream& os) {
    Scenario s;
    s.model = f.scenario.model();
    s.probe = f.scenario.probe_kind();
    s.t = f.scenario.t;
    s.total_time = f.scenario.total_time;
    s.phi = f.scenario.phi;
    s.ansatz = f.scenario.ansatz_choice();
    const QfiReport r = evaluate_scenario(s);

    RunRecord rec;
    rec.parameters = f.scenario.to_json(true);
    rec.parameters["out"] = f.out;
    const std::string text = report_json(r, f.scenario).dump(2) + "\n";
    if (f.out.empty()) {
        os << text;
    } else {
        write_file(f.out, text);
    }
    const double scale = std::max(1.0, r.qfi_oracle);
    const double gap = std::abs(r.cq_exact_opt - r.qfi_oracle) / scale;
    rec.checks.push_back(post_check("optimum matches oracle", gap <= 1e-8, "relative gap " + format_number(gap)));
    rec.checks.push_back(post_check("ansatz bounds optimum", r.cq_ansatz >= r.cq_exact_opt - 1e-8 * scale,
                                    "cq_ansatz - cq_exact_opt = " + format_number(r.cq_ansatz - r.cq_exact_opt)));
    rec.default_manifest = f.out.empty() ? "qfi.manifest.json" : f.out + ".manifest.json";
    return rec;
}

// ---------------------------------------------------------------------------
// resolution

struct ResolutionFlags {
    ScenarioFlags scenario;
    double t_min = 0.01;
    double t_max = 2.0;
    int steps = 200;
    std::string out;
};

/// The closed-form curve matching the environment family: the optimal-
/// measurement bound for uncorrelated environments, the Ramsey curve for the
/// shared environment, the long-time form for the partially correlated pair.
inline std::function<double(double)> closed_curve(const ScenarioFlags& f, const DephasingModel& m) {
    const ProbeKind kind = f.probe_kind();
    const ProbeState probe = ProbeState::make(kind, m.n);
    if (m.is<Uncorrelated>()) {
        const ProbeMoments pm = probe_moments(probe);
        return [=](double t) { return closed_form_uncorrelated({m, kind, t, f.total_time, pm.q, pm.zbar}); };
    }
    if (m.is<MaxCorrelated>()) {
        return [=](double t) { return ramsey_max_correlated(m, kind, t, f.total_time); };
    }
    if (m.is<Partial>()) {
        const double q = std::clamp(
            (probe.amplitudes().adjoint() * build_pauli_string("ZZ") * probe.amplitudes())(0).real(), -1.0, 1.0);
        const double a = f.amplitude;
        const double total = f.total_time;
        return [=](double t) { return partial_corr_asymptote(a, q, t) / std::sqrt(total); };
    }
    throw UnsupportedCase("no resolution curve is defined for " + correlation_name(m.correlation) +
                          " environments");
}

inline double or_nan(const std::function<double(double)>& fn, double t) {
    try {
        return fn(t);
    } catch (const UndefinedResolution&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

inline RunRecord run_resolution(const ResolutionFlags& f, const Globals& g, std::ostream& os) {
    if (!(f.t_min > 0.0) || !(f.t_max >= f.t_min)) {
        throw InputError("need 0 < t-min <= t-max");
    }
    if (f.steps < 2 && !(f.steps == 1 && f.t_min == f.t_max)) {
        throw InputError("steps must be at least 2");
    }
    const DephasingModel m = f.scenario.model();
    const auto closed = closed_curve(f.scenario, m);
    const ProbeState probe = ProbeState::make(f.scenario.probe_kind(), m.n);
    const int n_env = purify(probe, m, f.t_min, f.scenario.phi).n_env;
    const AnsatzBasis basis = select_ansatz(m, n_env, f.scenario.ansatz_choice());

    const auto rows = parallel_map(static_cast<std::size_t>(f.steps), g.jobs, [&](std::size_t i) {
        const double t = f.steps == 1 ? f.t_min : f.t_min + (f.t_max - f.t_min) * i / (f.steps - 1.0);
        const double cq = minimize_ansatz(purify(probe, m, t, f.scenario.phi), basis).value;
        return std::vector<double>{t, or_nan(closed, t), resolution_from_qfi(cq, t, f.scenario.total_time)};
    });

    RunRecord rec;
    rec.parameters = f.scenario.to_json(false);
    rec.parameters["t_min"] = f.t_min;
    rec.parameters["t_max"] = f.t_max;
    rec.parameters["steps"] = f.steps;
    rec.parameters["out"] = f.out;

    SweepTable table{{"t", "delta_w_closed", "delta_w_qfi"}, rows};
    std::ostringstream csv;
    table.write_csv(csv);

    // Minimizer of the closed curve, where one exists.
    json footer = json::object();
    footer["t_star_closed"] = nullptr;
    footer["t_star_numeric"] = nullptr;
    const double t_scale = m.gamma > 0.0 ? std::pow(1.0 / (2.0 * m.gamma * m.nu), 1.0 / m.nu) : 0.0;
    if (m.is<MaxCorrelated>() && m.gamma > 0.0) {
        footer["t_star_closed"] = optimal_time_closed(m, f.scenario.probe_kind());
    }
    if (t_scale > 0.0 && !m.is<Partial>()) {
        try {
            footer["t_star_numeric"] = minimize_over_t([&](double t) { return or_nan(closed, t); },
                                                       footer["t_star_closed"].is_number()
                                                           ? footer["t_star_closed"].get<double>()
                                                           : t_scale);
        } catch (const FlatFunction&) {
        }
    }
    footer["closed_form"] = m.is<Uncorrelated>()     ? "optimal-measurement bound"
                            : m.is<MaxCorrelated>() ? "Ramsey, shared environment"
                                                     : "long-time partial correlation";

    if (f.out.empty()) {
        os << csv.str() << footer.dump() << "\n";
        rec.default_manifest = "resolution.manifest.json";
    } else {
        write_file(f.out, csv.str());
        write_file(f.out + ".footer.json", footer.dump(2) + "\n");
        rec.default_manifest = f.out + ".manifest.json";
    }
    bool finite = true;
    for (const auto& r : rows) {
        finite = finite && std::isfinite(r[2]);
    }
    rec.checks.push_back(post_check("qfi column finite", finite, std::to_string(rows.size()) + " rows"));
    return rec;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyFlags {
    std::string depth = "quick";
    double perturb = 0.0;
};

inline RunRecord run_verify(const VerifyFlags& f, const Globals& g, std::ostream& os) {
    VerifyOptions options;
    options.depth = f.depth == "full" ? VerifyDepth::Full : VerifyDepth::Quick;
    options.seed = g.seed;
    options.perturbation = f.perturb;
    options.jobs = g.jobs;
    const VerifyReport report = run_verification(options);

    RunRecord rec;
    rec.parameters = {{"depth", f.depth}};
    if (f.perturb != 0.0) {
        rec.parameters["perturb"] = f.perturb;
    }
    for (const auto& c : report.checks) {
        const char* status = !c.mandatory ? "INFO" : c.passed ? "PASS" : "FAIL";
        os << status << "  [" << c.module << "] " << c.name << " (" << format_number(std::round(c.seconds * 1000.0) / 1000.0)
           << " s)\n      " << c.detail << "\n";
        rec.checks.push_back(c);
    }
    const std::size_t mandatory = static_cast<std::size_t>(
        std::count_if(report.checks.begin(), report.checks.end(), [](const CheckResult& c) { return c.mandatory; }));
    os << (report.passed() ? "verify: all " : "verify: ") << mandatory - report.failures() << "/" << mandatory
       << " mandatory checks passed (" << depth_name(options.depth) << ", seed " << g.seed << ")\n";
    rec.default_manifest = "verify.manifest.json";
    return rec;
}

inline unsigned default_jobs() {
    if (const char* env = std::getenv("DEPHASE_QFI_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) {
                return static_cast<unsigned>(v);
            }
        } catch (const std::exception&) {
        }
    }
    return 1;
}

} // namespace cli_detail

/// Runs one command. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    using namespace cli_detail;
    const auto start = std::chrono::steady_clock::now();

    CLI::App app{"Frequency-estimation precision bounds for dephasing qubits", "dephase_qfi"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    g.jobs = default_jobs();
    app.add_option("--config", g.config, "key=value file; command-line flags take precedence");
    app.add_option("--manifest", g.manifest, "run manifest path (default: beside the output)");
    app.add_option("--seed", g.seed, "seed for randomized checks")->capture_default_str();
    app.add_option("--jobs", g.jobs, "worker threads (default from DEPHASE_QFI_JOBS)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    ImprovementFlags improvement;
    auto* cmd_improvement = app.add_subcommand("improvement", "improvement factor over a range of nu");
    cmd_improvement->add_option("--nu-min", improvement.nu_min)->capture_default_str();
    cmd_improvement->add_option("--nu-max", improvement.nu_max)->capture_default_str();
    cmd_improvement->add_option("--steps", improvement.steps)->capture_default_str();
    cmd_improvement->add_option("--out", improvement.out, "CSV path (default: stdout)");
    cmd_improvement->add_option("--n", improvement.n, "particles, used for nu < 1")->capture_default_str();
    cmd_improvement->add_option("--gamma", improvement.gamma, "used for nu < 1")->capture_default_str();
    cmd_improvement->add_option("--T", improvement.total_time, "used for nu < 1")->capture_default_str();

    QfiFlags qfi;
    auto* cmd_qfi = app.add_subcommand("qfi", "QFI report for one scenario");
    qfi.scenario.attach(cmd_qfi, true);
    cmd_qfi->add_option("--out", qfi.out, "JSON path (default: stdout)");

    ResolutionFlags resolution;
    auto* cmd_resolution = app.add_subcommand("resolution", "resolution against interrogation time");
    resolution.scenario.attach(cmd_resolution, false);
    cmd_resolution->add_option("--t-min", resolution.t_min)->capture_default_str();
    cmd_resolution->add_option("--t-max", resolution.t_max)->capture_default_str();
    cmd_resolution->add_option("--steps", resolution.steps)->capture_default_str();
    cmd_resolution->add_option("--out", resolution.out, "CSV path (default: stdout)");

    VerifyFlags verify;
    auto* cmd_verify = app.add_subcommand("verify", "run the cross-check suite");
    cmd_verify->add_option("--depth", verify.depth)->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
    cmd_verify->add_option("--perturb", verify.perturb)->group("");

    std::vector<std::string> args;
    try {
        args = merge_config(raw_args, {"improvement", "qfi", "resolution", "verify"});
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }

    RunRecord rec;
    std::string command;
    try {
        if (cmd_improvement->parsed()) {
            command = "improvement";
            rec = run_improvement(improvement, g, out);
        } else if (cmd_qfi->parsed()) {
            command = "qfi";
            rec = run_qfi(qfi, g, out);
        } else if (cmd_resolution->parsed()) {
            command = "resolution";
            rec = run_resolution(resolution, g, out);
        } else {
            command = "verify";
            rec = run_verify(verify, g, out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }

    bool ok = true;
    json checks = json::array();
    for (const auto& c : rec.checks) {
        checks.push_back(check_json(c));
        ok = ok && (!c.mandatory || c.passed);
    }
    rec.parameters["seed"] = g.seed;
    rec.parameters["jobs"] = g.jobs;
    if (!g.config.empty()) {
        rec.parameters["config"] = g.config;
    }
    const json manifest{
        {"command", command},
        {"command_line", "dephase_qfi " + join(raw_args)},
        {"parameters", rec.parameters},
        {"version", kVersion},
        {"wall_clock_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
        {"checks", checks},
    };
    try {
        write_file(g.manifest.empty() ? rec.default_manifest : g.manifest, manifest.dump(2) + "\n");
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    if (!ok) {
        for (const auto& c : rec.checks) {
            if (c.mandatory && !c.passed) {
                err << "check failed: " << c.name << ": " << c.detail << "\n";
            }
        }
        return kExitFailure;
    }
    return kExitOk;
}

inline int run_cli(int argc, char** argv) {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

} // namespace dephase
