#include "dogforge/bench.hpp"

#include "dogforge/parallel.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>

namespace dogforge::bench {

const char* axis_name(AxisKind k) { return k == AxisKind::DetuningRate ? "detuning_rate" : "amplitude_rate"; }

SweepDesign sweep_design(const dogsynth::DogDesign& design, std::string label) {
    return SweepDesign{std::move(label), design.fields};
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0 && hi > lo) || count < 2)
        fail(ErrorKind::Precondition, "bad_axis", "log axis needs 0 < lo < hi and at least two points");
    std::vector<double> out(count);
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

namespace {

constexpr std::size_t chunk = 8;  // one AVX2 register group of lanes per task

FidelitySweep run_sweep(AxisKind kind, std::span<const SweepDesign> designs, std::span<const double> rates,
                        unsigned threads) {
    if (designs.empty()) fail(ErrorKind::Precondition, "no_designs", "sweep needs at least one design");
    if (rates.empty()) fail(ErrorKind::Precondition, "bad_axis", "sweep axis is empty");
    for (std::size_t i = 0; i < rates.size(); ++i) {
        if (!std::isfinite(rates[i]) || (kind == AxisKind::DetuningRate && rates[i] < 0))
            fail(ErrorKind::Precondition, "bad_axis", "sweep rates must be finite and non-negative");
        if (i > 0 && !(rates[i] > rates[i - 1]))
            fail(ErrorKind::Precondition, "bad_axis", "sweep axis must be strictly increasing");
    }
    for (const auto& d : designs) d.fields.validate();

    FidelitySweep sweep;
    sweep.kind = kind;
    sweep.axis.assign(rates.begin(), rates.end());
    std::vector<Unitary2> ideal(designs.size());
    std::vector<double> scale(designs.size());
    for (std::size_t d = 0; d < designs.size(); ++d) {
        ideal[d] = qdyn::propagate_final(designs[d].fields);
        scale[d] = kind == AxisKind::DetuningRate ? qdyn::mean_abs_amplitude(designs[d].fields) : 1.0;
        sweep.series.push_back({designs[d].label, std::vector<double>(rates.size()),
                                std::vector<double>(rates.size())});
    }

    // Tasks are (design, lane chunk); every cell is written by exactly one task.
    const std::size_t chunks = (rates.size() + chunk - 1) / chunk;
    parallel_for(
        designs.size() * chunks,
        [&](std::size_t task) {
            const std::size_t d = task / chunks, c = task % chunks;
            const std::size_t first = c * chunk, last = std::min(rates.size(), first + chunk);
            std::vector<qdyn::NoiseModel> noise;
            for (std::size_t i = first; i < last; ++i) {
                qdyn::NoiseModel nm;
                if (kind == AxisKind::DetuningRate)
                    nm.detuning = rates[i] * scale[d];
                else
                    nm.amplitude_error = rates[i];
                noise.push_back(nm);
            }
            const auto real = qdyn::propagate_final_batch(designs[d].fields, noise);
            auto& s = sweep.series[d];
            for (std::size_t i = first; i < last; ++i) {
                const double inf = qdyn::gate_infidelity(ideal[d], real[i - first]);
                s.infidelity[i] = inf;
                s.fidelity[i] = std::clamp(1.0 - inf, 0.0, 1.0);
            }
        },
        threads);
    return sweep;
}

}  // namespace

FidelitySweep detuning_sweep(std::span<const SweepDesign> designs, std::span<const double> rates, unsigned threads) {
    return run_sweep(AxisKind::DetuningRate, designs, rates, threads);
}

FidelitySweep amplitude_sweep(std::span<const SweepDesign> designs, std::span<const double> rates,
                              unsigned threads) {
    return run_sweep(AxisKind::AmplitudeRate, designs, rates, threads);
}

num::LinearFit loglog_slope(const FidelitySweep& sweep, std::size_t series, double lo, double hi) {
    std::vector<double> x, y;
    const auto& s = sweep.series.at(series);
    for (std::size_t i = 0; i < sweep.axis.size(); ++i) {
        const double a = sweep.axis[i];
        if (a < lo * (1 - 1e-12) || a > hi * (1 + 1e-12) || !(a > 0) || !(s.infidelity[i] > 0)) continue;
        x.push_back(std::log(a));
        y.push_back(std::log(s.infidelity[i]));
    }
    if (x.size() < 2) fail(ErrorKind::Numerical, "too_few_points", "not enough positive points for a slope fit");
    return num::linear_fit(x, y);
}

qdyn::ControlFields standard_orange_slice(double phi0, const std::string& shape, double omega0,
                                          std::size_t grid_points) {
    return dogsynth::standard_orange_slice_fields(phi0, shape, omega0, grid_points);
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Parallel: return "parallel";
        case Scenario::Perpendicular: return "perpendicular";
        default: return "omega";
    }
}

const char* gate_kind_name(GateKind g) { return g == GateKind::Holonomic ? "HG" : "NHG"; }

Scenario scenario_from_name(const std::string& name) {
    if (name == "parallel") return Scenario::Parallel;
    if (name == "perpendicular") return Scenario::Perpendicular;
    if (name == "omega") return Scenario::Omega;
    fail(ErrorKind::Parse, "bad_scenario", "unknown toy scenario '" + name + "'");
}

double toy_closed_form(Scenario s, GateKind g, double phi, double eps) {
    const bool hg = g == GateKind::Holonomic;
    switch (s) {
        case Scenario::Parallel:
            return hg ? (2 + std::cos(pi * eps)) / 3 : (2 + std::cos(2 * phi * eps)) / 3;
        case Scenario::Perpendicular:
            return (2 + std::cos(2 * eps)) / 3;
        default:
            return hg ? (3 - pi * pi * eps * eps * (1 + std::cos(phi))) / 3 : 1 - 2.0 / 3.0 * phi * phi * eps * eps;
    }
}

// Units with omega = 1: each geodesic is a pi pulse of duration pi.
std::vector<qdyn::Segment> toy_segments(Scenario s, GateKind g, double phi, double eps) {
    const Vec3 x(0.5, 0, 0), tilted(0.5 * std::cos(phi), 0.5 * std::sin(phi), 0), z(0, 0, 0.5);
    std::vector<qdyn::Segment> out;
    if (g == GateKind::Holonomic) {
        const double first = s == Scenario::Omega ? 1 + eps : 1.0;
        const double second = s == Scenario::Perpendicular ? 1.0 : 1 + eps;
        out.push_back({first * x, pi});
        out.push_back({second * tilted, pi});
        if (s == Scenario::Perpendicular) out.push_back({Vec3(0, 0, eps / pi), pi});
    } else {
        const double gain = s == Scenario::Perpendicular ? 1.0 : 1 + eps;
        out.push_back({gain * z, 2 * phi});
        if (s == Scenario::Perpendicular) out.push_back({Vec3(eps / pi, 0, 0), pi});
    }
    return out;
}

bool ToyModelResult::consistent() const { return std::abs(f_closed_form - f_simulated) <= tolerance; }

ToyModelResult toy_model_fidelities(double phi, double eps, Scenario s, GateKind g) {
    if (!(std::abs(eps) <= 0.5)) fail(ErrorKind::Precondition, "eps_range", "|eps| must not exceed 0.5");
    if (!std::isfinite(phi)) fail(ErrorKind::Precondition, "phi_range", "gate angle must be finite");
    const auto ideal = qdyn::propagate_segments(toy_segments(s, g, phi, 0.0));
    const auto real = qdyn::propagate_segments(toy_segments(s, g, phi, eps));
    ToyModelResult r;
    r.scenario = s;
    r.gate = g;
    r.phi = phi;
    r.eps = eps;
    r.f_closed_form = toy_closed_form(s, g, phi, eps);
    r.f_simulated = 1.0 - qdyn::gate_infidelity(ideal, real);
    // The omega formulas are second order; the remainder is O(eps^4) with a
    // constant near 22, so beyond |eps| = 0.2 the quartic bound takes over.
    const double e3 = std::abs(eps * eps * eps);
    r.tolerance = s == Scenario::Omega ? std::max(5 * e3, 25 * e3 * std::abs(eps)) + 1e-12 : 1e-8;
    return r;
}

double omega_noise_crossover() {
    const auto diff = [](double phi) { return pi * pi * (1 + std::cos(phi)) - 2 * phi * phi; };
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::toms748_solve(
        diff, 0.5 * pi, 0.7 * pi, [](double a, double b) { return std::abs(b - a) < 1e-14; }, iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace dogforge::bench
