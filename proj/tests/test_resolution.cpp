#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dephase/qfi_engine.hpp"
#include "dephase/resolution.hpp"
#include "test_support.hpp"

using namespace dephase;
using dephase::testing::rel_diff;

namespace {

DephasingModel uncorrelated(double gamma, double nu, int n) {
    return DephasingModel::create(gamma, nu, n, Uncorrelated{});
}

DephasingModel max_correlated(double gamma, double nu, int n) {
    return DephasingModel::create(gamma, nu, n, MaxCorrelated{});
}

} // namespace

TEST(Ramsey, MarkovianProbesCoincide) {
    for (int n : {1, 4, 30}) {
        for (double gamma : {0.1, 1.0, 7.0}) {
            for (double total : {0.5, 1.0, 20.0}) {
                const auto m = uncorrelated(gamma, 1.0, n);
                const double expected = std::sqrt(2.0 * std::numbers::e * gamma / (n * total));
                EXPECT_NEAR(ramsey_uncorrelated(m, ProbeKind::ProductPlus, total), expected, 1e-12 * expected);
                EXPECT_NEAR(ramsey_uncorrelated(m, ProbeKind::Ghz, total), expected, 1e-12 * expected);
            }
        }
    }
}

TEST(Ramsey, NonMarkovianGhz) {
    EXPECT_NEAR(ramsey_uncorrelated(uncorrelated(1.0, 2.0, 4), ProbeKind::Ghz, 1.0), 0.6420127083438707,
                1e-15);
}

TEST(Ramsey, ProbeRatio) {
    for (double nu : {0.5, 2.0, 3.0}) {
        const auto m = uncorrelated(0.8, nu, 9);
        const double ratio = ramsey_uncorrelated(m, ProbeKind::ProductPlus, 2.0) /
                             ramsey_uncorrelated(m, ProbeKind::Ghz, 2.0);
        EXPECT_NEAR(ratio, std::pow(9.0, 0.5 * (1.0 - 1.0 / nu)), 1e-13);
    }
}

TEST(Ramsey, CorrelatedEquivalenceAtOptimalTimes) {
    for (int n : {2, 3, 4}) {
        for (double nu : {1.0, 2.0}) {
            for (double gamma : {0.5, 1.0}) {
                const auto m = max_correlated(gamma, nu, n);
                const double te = optimal_time_closed(m, ProbeKind::Ghz);
                const double tu = optimal_time_closed(m, ProbeKind::ProductPlus);
                const double r = ramsey_max_correlated(m, ProbeKind::ProductPlus, tu, 1.0) /
                                 ramsey_max_correlated(m, ProbeKind::Ghz, te, 1.0);
                EXPECT_NEAR(r, 1.0, 1e-10) << n << " " << nu << " " << gamma;
            }
        }
    }
}

TEST(Ramsey, CorrelatedLimits) {
    const auto single = max_correlated(0.6, 1.5, 1);
    EXPECT_DOUBLE_EQ(ramsey_max_correlated(single, ProbeKind::Ghz, 0.7, 2.0),
                     ramsey_max_correlated(single, ProbeKind::ProductPlus, 0.7, 2.0));
    const auto clean = max_correlated(0.0, 1.0, 5);
    EXPECT_NEAR(ramsey_max_correlated(clean, ProbeKind::ProductPlus, 0.7, 2.0) /
                    ramsey_max_correlated(clean, ProbeKind::Ghz, 0.7, 2.0),
                std::sqrt(5.0), 1e-14);
}

TEST(OptimalTime, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(optimal_time_closed(max_correlated(1.0, 1.0, 2), ProbeKind::Ghz), 0.25);
    EXPECT_DOUBLE_EQ(optimal_time_closed(max_correlated(1.0, 1.0, 2), ProbeKind::ProductPlus), 0.5);
}

TEST(OptimalTime, NumericMatchesClosedForm) {
    EXPECT_NEAR(optimal_time_numeric([](double t) { return (t - 3.0) * (t - 3.0); }, {0.0, 10.0}), 3.0,
                1e-8);
    for (int n = 1; n <= 5; ++n) {
        for (double nu : {1.0, 2.0, 3.0}) {
            for (double gamma : {0.25, 1.0, 4.0}) {
                const auto m = max_correlated(gamma, nu, n);
                for (auto kind : {ProbeKind::Ghz, ProbeKind::ProductPlus}) {
                    const double closed = optimal_time_closed(m, kind);
                    const double numeric = minimize_over_t(
                        [&](double t) { return ramsey_max_correlated(m, kind, t, 1.0); }, closed);
                    EXPECT_LT(rel_diff(numeric, closed), 1e-6) << n << " " << nu << " " << gamma;
                }
            }
        }
    }
}

TEST(OptimalTime, FlatFunctionDetected) {
    EXPECT_THROW(golden_section([](double) { return 2.0; }, {0.0, 1.0}), FlatFunction);
    EXPECT_THROW(golden_section([](double t) { return t; }, {1.0, 1.0}), InputError);
}

TEST(ClosedForm, NoDephasingIsHeisenberg) {
    for (int n : {1, 3, 10}) {
        const auto m = uncorrelated(0.0, 1.0, n);
        EXPECT_NEAR(closed_form_uncorrelated({m, ProbeKind::Ghz, 0.4, 2.0, 1.0, 0.0}),
                    std::sqrt(1.0 / (n * n * 2.0 * 0.4)), 1e-15);
    }
}

TEST(ClosedForm, LargeRegisterMarkovianOptimum) {
    const int n = 1000000;
    const auto m = uncorrelated(0.5, 1.0, n);
    const TimeOptimum opt = optimal_uncorrelated_numeric(m, n, 1.0);
    EXPECT_LT(rel_diff(opt.resolution, std::sqrt(2.0 * 0.5 / n)), 1e-3);
    EXPECT_NEAR(optimal_resolution_uncorrelated(m, n, 1.0), std::sqrt(2.0 * 0.5 / n), 1e-15);
}

TEST(ClosedForm, SingleQubitMatchesEngine) {
    for (double gamma : {0.1, 1.0}) {
        for (double t : {0.2, 1.5}) {
            const auto m = uncorrelated(gamma, 1.0, 1);
            const double f = qfi_reduced(purify(ProbeState::product_plus(1), m, t, 0.0));
            EXPECT_LT(rel_diff(closed_form_uncorrelated({m, ProbeKind::ProductPlus, t, 3.0, 1.0, 0.0}),
                               resolution_from_qfi(f, t, 3.0)),
                      1e-12);
        }
    }
}

TEST(ClosedForm, DegenerateProbeThrows) {
    const auto m = uncorrelated(0.2, 1.0, 2);
    EXPECT_THROW(closed_form_uncorrelated({m, ProbeKind::Ghz, 1.0, 1.0, 0.0, 0.0}), UndefinedResolution);
    EXPECT_THROW(closed_form_uncorrelated({m, ProbeKind::Ghz, 1.0, 1.0, 1.0, 1.0}), UndefinedResolution);
}

TEST(ClosedForm, ProbeMoments) {
    const ProbeMoments ghz = probe_moments(ProbeState::ghz(4));
    EXPECT_NEAR(ghz.q, 1.0, 1e-15);
    EXPECT_NEAR(ghz.zbar, 0.0, 1e-15);
    const ProbeMoments plus = probe_moments(ProbeState::product_plus(4));
    EXPECT_NEAR(plus.q, 0.25, 1e-15);
    EXPECT_NEAR(plus.zbar, 0.0, 1e-15);
}

TEST(OptimalResolution, NonMarkovianValue) {
    EXPECT_NEAR(optimal_resolution_uncorrelated(uncorrelated(1.0, 2.0, 1), 100, 1.0), 0.04805622828269509,
                1e-16);
}

TEST(OptimalResolution, NumericMinimumOfBound) {
    // Independent high-precision minimization of the same bound.
    const TimeOptimum opt = optimal_uncorrelated_numeric(uncorrelated(1.0, 2.0, 1), 100, 1.0);
    EXPECT_NEAR(opt.t, 0.07019102859386318, 1e-8);
    EXPECT_NEAR(opt.resolution, 0.05324887939167938, 1e-12);
}

TEST(Improvement, ClosedFormValues) {
    EXPECT_NEAR(improvement_factor(uncorrelated(1.0, 1.0, 1), 100, 1.0), std::sqrt(std::numbers::e), 1e-12);
    EXPECT_NEAR(improvement_factor(uncorrelated(1.0, 2.0, 1), 100, 1.0), 1.1949202919802104, 1e-14);
}

TEST(Improvement, SubLinearPowerIsNumeric) {
    const double value = improvement_factor(uncorrelated(0.5, 0.25, 1), 100, 1.0);
    EXPECT_NEAR(value, 1.0095592124347215, 1e-8);
    EXPECT_NEAR(value, 1.0, 0.05);
}

TEST(Improvement, ContinuousDecreasingAboveOne) {
    double previous = improvement_factor(uncorrelated(1.0, 1.0, 1), 100, 1.0);
    for (int k = 1; k <= 900; ++k) {
        const double nu = 1.0 + 9.0 * k / 900.0;
        const double value = improvement_factor(uncorrelated(1.0, nu, 1), 100, 1.0);
        EXPECT_GE(value, 1.0 - 1e-9);
        EXPECT_LE(value, previous + 1e-15) << nu;
        EXPECT_LT(previous - value, 0.02) << nu;
        previous = value;
    }
    EXPECT_LT(improvement_factor(uncorrelated(1.0, 1e4, 1), 100, 1.0), 1.001);
}

TEST(Correlated, NoDephasingLimits) {
    for (int n : {1, 2, 5}) {
        EXPECT_DOUBLE_EQ(correlated_closed_form(n, 1.5, 0.0, 0.8, ProbeKind::Ghz), 1.0 / std::sqrt(0.8 * n * n));
        EXPECT_NEAR(correlated_closed_form(n, 1.5, 0.0, 0.8, ProbeKind::ProductPlus), 1.0 / std::sqrt(0.8 * n),
                    1e-15);
    }
}

TEST(Correlated, GhzBranchMatchesOracle) {
    const double t = 1.0;
    const auto m = max_correlated(0.5, 1.0, 2);
    const double f = qfi_reduced(purify(ProbeState::ghz(2), m, t, 0.0));
    EXPECT_LT(rel_diff(correlated_closed_form(2, 1.0, 0.5, t, ProbeKind::Ghz), resolution_from_qfi(f, t, 1.0)),
              1e-10);
}

TEST(Correlated, VanishingRootThrows) {
    // n = 3, nu = 1 at 2a = pi/6: sin(3 * 2a) = 1, the GHZ information is zero.
    const double gamma_t = -std::log(std::cos(std::numbers::pi / 6));
    EXPECT_THROW(correlated_closed_form(3, 1.0, gamma_t, 1.0, ProbeKind::Ghz), UndefinedResolution);
}

TEST(PartialAsymptote, TrivialLimits) {
    for (double t : {1.0, 8.0}) {
        EXPECT_NEAR(partial_corr_asymptote(1.0, 0.3, t), 1.0 / std::sqrt(2.0 * t), 1e-15);
        for (double a : {0.0, 0.25, 0.9}) {
            EXPECT_NEAR(partial_corr_asymptote(a, -1.0, t), 1.0 / std::sqrt(2.0 * t), 1e-15);
        }
    }
    EXPECT_THROW(partial_corr_asymptote(0.5, 1.5, 1.0), InputError);
}

TEST(Parity, Classification) {
    const ParityLimit even = parity_limit(2, 1.0);
    EXPECT_EQ(even.classification, ParityClass::Unbounded);
    EXPECT_EQ(even.limit_value, 0.0);
    const ParityLimit odd = parity_limit(3, 1.0);
    EXPECT_EQ(odd.classification, ParityClass::Bounded);
    EXPECT_EQ(odd.limit_value, 1.0);
    const ParityLimit special = parity_limit(9, std::log(2.0) / std::log(9.0));
    EXPECT_NEAR(special.m, 2.0, 1e-12);
    EXPECT_EQ(special.classification, ParityClass::Unbounded);
    const ParityLimit other = parity_limit(3, 0.5);
    EXPECT_EQ(other.classification, ParityClass::Nonconvergent);
    EXPECT_NEAR(other.limit_value, std::pow(std::sin(std::sqrt(3.0) * std::numbers::pi / 2), 2), 1e-15);
    EXPECT_EQ(parity_name(ParityClass::Unbounded), "even/unbounded");
}
