#include "dogforge/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace dogforge;
using namespace dogforge::bench;

namespace {

const std::vector<SweepDesign>& designs() {
    static const std::vector<SweepDesign> d = {
        sweep_design(dogsynth::twisted_3d(pi / 2000), "dog"),
        SweepDesign{"standard", standard_orange_slice(pi / 2, "square")},
    };
    return d;
}

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "no error";
}

}  // namespace

TEST(LogSpaced, EndpointsAndConstantRatio) {
    const auto v = log_spaced(1e-3, 1e-1, 21);
    ASSERT_EQ(v.size(), 21u);
    EXPECT_EQ(v.front(), 1e-3);
    EXPECT_EQ(v.back(), 1e-1);
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_NEAR(v[i] / v[i - 1], std::pow(10.0, 0.1), 1e-12);
    EXPECT_EQ(code_of([] { log_spaced(0.0, 1.0); }), "bad_axis");
    EXPECT_EQ(code_of([] { log_spaced(1.0, 0.5); }), "bad_axis");
}

TEST(Sweep, ZeroNoiseGivesUnitFidelity) {
    const std::vector<double> rates = {0.0, 1e-3};
    const auto s = detuning_sweep(designs(), rates);
    for (const auto& ser : s.series) {
        EXPECT_NEAR(ser.fidelity[0], 1.0, 1e-14);
        EXPECT_NEAR(ser.infidelity[0], 0.0, 1e-14);
        EXPECT_NEAR(ser.fidelity[1], 1.0 - ser.infidelity[1], 1e-15);
    }
}

TEST(Sweep, DoubleGeometricDesignBeatsStandardUnderDetuning) {
    const auto rates = log_spaced(1e-3, 1e-1, 11);
    const auto s = detuning_sweep(designs(), rates);
    ASSERT_EQ(s.series.size(), 2u);
    EXPECT_EQ(s.series[0].label, "dog");
    for (std::size_t i = 0; i < rates.size(); ++i)
        EXPECT_LT(s.series[0].infidelity[i], s.series[1].infidelity[i]) << rates[i];
    // Closed error curve: quartic; open curve: quadratic.
    EXPECT_NEAR(loglog_slope(s, 0, 1e-3, 1e-2).slope, 4.0, 0.1);
    EXPECT_NEAR(loglog_slope(s, 1, 1e-3, 1e-2).slope, 2.0, 0.1);
}

TEST(Sweep, SmallDetuningMatchesErrorCurveGap) {
    // 1 - F ~ (2/3) |r(T)|^2 dz^2 for the open standard design.
    const auto& std_fields = designs()[1].fields;
    const double gap = qdyn::magnus_a1(std_fields).norm();
    const double scale = qdyn::mean_abs_amplitude(std_fields);
    const std::vector<double> rates = {1e-5};
    const auto s = detuning_sweep(std::span(designs()).subspan(1), rates);
    const double dz = rates[0] * scale;
    EXPECT_NEAR(s.series[0].infidelity[0], 2.0 / 3.0 * gap * gap * dz * dz, 1e-3 * 2.0 / 3.0 * gap * gap * dz * dz);
}

TEST(Sweep, ResultsIndependentOfThreadCount) {
    const auto rates = log_spaced(1e-3, 1e-1, 19);
    const auto a = amplitude_sweep(designs(), rates, 1);
    const auto b = amplitude_sweep(designs(), rates, 4);
    for (std::size_t d = 0; d < a.series.size(); ++d) {
        EXPECT_EQ(a.series[d].infidelity, b.series[d].infidelity);
        EXPECT_EQ(a.series[d].fidelity, b.series[d].fidelity);
    }
    EXPECT_EQ(a.kind, AxisKind::AmplitudeRate);
    EXPECT_STREQ(axis_name(a.kind), "amplitude_rate");
}

TEST(Sweep, ValidatesInputs) {
    const std::vector<double> ok = {1e-3, 1e-2};
    const std::vector<double> unsorted = {1e-2, 1e-3};
    const std::vector<double> negative = {-1e-3, 1e-2};
    EXPECT_EQ(code_of([&] { detuning_sweep({}, ok); }), "no_designs");
    EXPECT_EQ(code_of([&] { detuning_sweep(designs(), {}); }), "bad_axis");
    EXPECT_EQ(code_of([&] { detuning_sweep(designs(), unsorted); }), "bad_axis");
    EXPECT_EQ(code_of([&] { detuning_sweep(designs(), negative); }), "bad_axis");
    EXPECT_NO_THROW(amplitude_sweep(designs(), negative));
}

TEST(Toy, ZeroNoiseIsPerfect) {
    for (auto s : {Scenario::Parallel, Scenario::Perpendicular, Scenario::Omega})
        for (auto g : {GateKind::Holonomic, GateKind::NonHolonomic}) {
            const auto r = toy_model_fidelities(0.6 * pi, 0.0, s, g);
            EXPECT_NEAR(r.f_simulated, 1.0, 1e-14);
            EXPECT_NEAR(r.f_closed_form, 1.0, 1e-14);
        }
}

TEST(Toy, SimulationAgreesWithClosedFormsOnAGrid) {
    for (double phi : {0.1, 0.5 * pi, 0.595 * pi, 0.9 * pi})
        for (double eps : {-0.3, -1e-2, 1e-3, 0.05, 0.2})
            for (auto s : {Scenario::Parallel, Scenario::Perpendicular, Scenario::Omega})
                for (auto g : {GateKind::Holonomic, GateKind::NonHolonomic}) {
                    const auto r = toy_model_fidelities(phi, eps, s, g);
                    EXPECT_TRUE(r.consistent()) << scenario_name(s) << " " << gate_kind_name(g) << " phi=" << phi
                                                << " eps=" << eps << " closed=" << r.f_closed_form
                                                << " sim=" << r.f_simulated;
                }
}

TEST(Toy, PerpendicularNoiseTreatsBothGatesAlike) {
    for (double eps : {0.01, 0.1, 0.4}) {
        const auto h = toy_model_fidelities(1.0, eps, Scenario::Perpendicular, GateKind::Holonomic);
        const auto n = toy_model_fidelities(1.0, eps, Scenario::Perpendicular, GateKind::NonHolonomic);
        EXPECT_NEAR(h.f_simulated, n.f_simulated, 1e-12);
    }
}

TEST(Toy, OmegaCrossoverMatchesBisectionOracle) {
    // Independent oracle: plain bisection on the second-order coefficients.
    auto diff = [](double p) { return pi * pi * (1 + std::cos(p)) - 2 * p * p; };
    double lo = 0.5 * pi, hi = 0.7 * pi;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (diff(lo) * diff(mid) <= 0 ? hi : lo) = mid;
    }
    const double x = omega_noise_crossover();
    EXPECT_NEAR(x, 0.5 * (lo + hi), 1e-12);
    // Above the crossover the holonomic gate wins in simulation, below it loses.
    const double eps = 1e-2;
    auto hg = [&](double p) { return toy_model_fidelities(p, eps, Scenario::Omega, GateKind::Holonomic).f_simulated; };
    auto nhg = [&](double p) {
        return toy_model_fidelities(p, eps, Scenario::Omega, GateKind::NonHolonomic).f_simulated;
    };
    EXPECT_GT(hg(x + 0.05), nhg(x + 0.05));
    EXPECT_LT(hg(x - 0.05), nhg(x - 0.05));
}

TEST(Toy, Preconditions) {
    EXPECT_EQ(code_of([] { toy_model_fidelities(1.0, 0.6, Scenario::Omega, GateKind::Holonomic); }), "eps_range");
    EXPECT_EQ(scenario_from_name("perpendicular"), Scenario::Perpendicular);
    EXPECT_EQ(code_of([] { scenario_from_name("diagonal"); }), "bad_scenario");
}

TEST(StandardOrangeSlice, SechShapeStaysOpen) {
    const auto f = standard_orange_slice(pi / 2, "sech");
    const auto d = standard_orange_slice(pi / 2, "square");
    EXPECT_GT(qdyn::magnus_a1(f).norm(), 0.1);
    // Both shapes implement the same gate.
    EXPECT_LT(qdyn::gate_infidelity(qdyn::propagate_final(f), qdyn::propagate_final(d)), 1e-8);
}
