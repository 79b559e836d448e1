#pragma once

// Robustness sweeps against detuning and amplitude errors, and the square-pulse
// toy models comparing holonomic and non-holonomic gates.

#include "dogforge/common.hpp"
#include "dogforge/dogsynth.hpp"
#include "dogforge/numerics.hpp"
#include "dogforge/qdyn.hpp"

#include <span>
#include <string>
#include <vector>

namespace dogforge::bench {

enum class AxisKind { DetuningRate, AmplitudeRate };
const char* axis_name(AxisKind k);

struct SweepDesign {
    std::string label;
    qdyn::ControlFields fields;
};
SweepDesign sweep_design(const dogsynth::DogDesign& design, std::string label);

struct SweepSeries {
    std::string label;
    std::vector<double> fidelity;
    std::vector<double> infidelity;  // computed directly, not as 1 - fidelity
};

struct FidelitySweep {
    AxisKind kind = AxisKind::DetuningRate;
    std::vector<double> axis;
    std::vector<SweepSeries> series;
};

// `count` points from lo to hi, evenly spaced in log.
std::vector<double> log_spaced(double lo, double hi, std::size_t count = 41);

// delta_z = rate * mean|omega| of each design; the ideal gate is the noise-free run.
FidelitySweep detuning_sweep(std::span<const SweepDesign> designs, std::span<const double> rates,
                             unsigned threads = 0);
// omega -> omega (1 + rate).
FidelitySweep amplitude_sweep(std::span<const SweepDesign> designs, std::span<const double> rates,
                              unsigned threads = 0);

// Log-log fit of infidelity against the axis over [lo, hi].
num::LinearFit loglog_slope(const FidelitySweep& sweep, std::size_t series, double lo, double hi);

qdyn::ControlFields standard_orange_slice(double phi0, const std::string& shape, double omega0 = 1.0,
                                          std::size_t grid_points = 20001);

enum class Scenario { Parallel, Perpendicular, Omega };
enum class GateKind { Holonomic, NonHolonomic };
const char* scenario_name(Scenario s);
const char* gate_kind_name(GateKind g);
Scenario scenario_from_name(const std::string& name);

struct ToyModelResult {
    Scenario scenario = Scenario::Parallel;
    GateKind gate = GateKind::Holonomic;
    double phi = 0, eps = 0;
    double f_closed_form = 1, f_simulated = 1;
    double tolerance = 0;  // allowed |closed form - simulated|
    bool consistent() const;
};

// Closed-form fidelity of the toy model (second order for omega noise).
double toy_closed_form(Scenario s, GateKind g, double phi, double eps);
// Exact product of square-pulse segments for the toy Hamiltonians.
std::vector<qdyn::Segment> toy_segments(Scenario s, GateKind g, double phi, double eps);
ToyModelResult toy_model_fidelities(double phi, double eps, Scenario s, GateKind g);

// Gate angle above which the holonomic gate wins under omega noise (second order).
double omega_noise_crossover();

}  // namespace dogforge::bench
