#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dephase/qfi_engine.hpp"
#include "dephase/resolution.hpp"

namespace dephase {

enum class AnsatzChoice {
    Symmetric, ///< collective generators matching the purification family
    Complete, ///< every Pauli string on the environment
    None,     ///< h_E = 0
};

/// One (model, probe, time) point to evaluate.
struct Scenario {
    DephasingModel model;
    ProbeKind probe = ProbeKind::Ghz;
    double t = 1.0;
    double total_time = 1.0;
    double phi = 0.0;
    AnsatzChoice ansatz = AnsatzChoice::Symmetric;
};

/// Ansatz used for each purification family: collective X/Y/Z on the
/// per-particle environments, X/Y/Z on the shared qubit, or the nine
/// swap-symmetric generators for the partially correlated pair.
inline AnsatzBasis symmetric_ansatz(const DephasingModel& model) {
    if (model.is<Uncorrelated>()) {
        return AnsatzBasis::collective_pauli(model.n);
    }
    if (model.is<MaxCorrelated>()) {
        return AnsatzBasis::collective_pauli(1);
    }
    if (model.is<Partial>()) {
        return AnsatzBasis::symmetric_two_qubit();
    }
    throw UnsupportedCase("no ansatz is defined for " + correlation_name(model.correlation) +
                          " environments");
}

inline AnsatzBasis select_ansatz(const DephasingModel& model, int n_env, AnsatzChoice choice) {
    switch (choice) {
    case AnsatzChoice::Symmetric: return symmetric_ansatz(model);
    case AnsatzChoice::Complete: return AnsatzBasis::complete_pauli(n_env);
    case AnsatzChoice::None: return AnsatzBasis::empty();
    }
    return AnsatzBasis::empty();
}

struct QfiReport {
    double qfi_oracle = 0.0;   ///< exact QFI of the reduced system state
    double cq_ansatz = 0.0;    ///< C_Q minimized over the chosen ansatz
    double cq_exact_opt = 0.0; ///< C_Q at the anticommutator optimum
    std::vector<double> coefficients;
    double resolution = 0.0;   ///< 1/sqrt((T/t) qfi_oracle)
    std::string ansatz_label;
    std::optional<ParityLimit> parity;
    Scenario scenario;
};

inline QfiReport evaluate_scenario(const Scenario& s) {
    s.model.validate();
    const ProbeState probe = ProbeState::make(s.probe, s.model.n);
    const PurifiedState purified = purify(probe, s.model, s.t, s.phi);
    const AnsatzBasis basis = select_ansatz(s.model, purified.n_env, s.ansatz);

    QfiReport r;
    r.scenario = s;
    r.qfi_oracle = qfi_reduced(purified);
    const AnsatzResult ansatz = minimize_ansatz(purified, basis);
    r.cq_ansatz = ansatz.value;
    r.coefficients = ansatz.coefficients;
    r.cq_exact_opt = optimal_h(purified).value;
    r.resolution = resolution_from_qfi(r.qfi_oracle, s.t, s.total_time);
    r.ansatz_label = basis.label;
    if (s.model.is<MaxCorrelated>()) {
        r.parity = parity_limit(s.model.n, s.model.nu);
    }
    return r;
}

} // namespace dephase
