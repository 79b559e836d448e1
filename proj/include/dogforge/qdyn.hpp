#pragma once

// Single-qubit dynamics under H = (omega/2)(cos phi sx + sin phi sy) + (delta/2) sz
// with quasistatic noise, the first-order error curve, and gate fidelity.

#include "dogforge/common.hpp"
#include "dogforge/curvekit.hpp"
#include "dogforge/kernels.hpp"

#include <span>
#include <vector>

namespace dogforge::qdyn {

// Discontinuity of the fields at sample `index`: the stored arrays hold the
// right-hand values there, the *_before members the left-hand limits.
struct FieldBreak {
    std::size_t index = 0;
    double omega_before = 0, phi_before = 0, delta_before = 0;
    bool operator==(const FieldBreak&) const = default;
};

struct ControlFields {
    Grid grid;
    std::vector<double> omega;  // signed Rabi amplitude
    std::vector<double> phi;    // drive phase, continuous within pieces
    std::vector<double> delta;  // detuning
    std::vector<FieldBreak> breaks;

    std::size_t size() const { return omega.size(); }
    double duration() const { return grid.span(); }
    std::vector<std::size_t> break_indices() const;
    // Fails when arrays disagree in length, samples are non-finite or breaks are out of order.
    void validate() const;
};

struct NoiseModel {
    double detuning = 0.0;        // delta_z, added as delta_z * sz
    double amplitude_error = 0.0;  // omega -> omega (1 + eps)
};

struct EvolutionRecord {
    Grid grid;
    std::vector<Unitary2> u;
};

// Pauli vector of the control Hamiltonian (H = h.sigma) from field values.
Vec3 pauli_vector(double omega, double phi, double delta, const NoiseModel& noise = {});

// Noise-free Gauss-point generators for every step; honours breaks.
kernels::StepTable step_table(const ControlFields& fields);

// Fourth-order Magnus propagation (exact SU(2) exponential per step). Records
// U at every sample.
EvolutionRecord propagate(const ControlFields& fields, const NoiseModel& noise = {});

// Final propagator only, for one or many noise settings; uses the batched kernel.
Unitary2 propagate_final(const ControlFields& fields, const NoiseModel& noise = {});
std::vector<Unitary2> propagate_final_batch(const ControlFields& fields, std::span<const NoiseModel> noise,
                                            kernels::Isa isa = kernels::active_isa());

// Piecewise-constant evolution: exact product of exp(-i h.sigma duration).
struct Segment {
    Vec3 h;
    double duration;
};
Unitary2 propagate_segments(std::span<const Segment> segments);
Unitary2 su2_exp(const Vec3& h, double duration);

// r(t) with r(t).sigma = int_0^t U^dag sz U; starts at the origin, tangent cached.
curvekit::SpaceCurve error_curve(const ControlFields& fields);
curvekit::SpaceCurve error_curve(const EvolutionRecord& record, std::span<const std::size_t> breaks = {});

// Endpoint of the error curve (first Magnus term of the detuning error).
Vec3 magnus_a1(const ControlFields& fields);

// F = Tr(Ur^dag Ur)/6 + |Tr(Ui^dag Ur)|^2 / 6.
double gate_fidelity(const Unitary2& ideal, const Unitary2& real);
// 1 - F for unitary inputs without cancellation error.
double gate_infidelity(const Unitary2& ideal, const Unitary2& real);

// Moves the detuning into the drive phase: delta -> 0, phi -> phi - int delta.
ControlFields interaction_frame_transform(const ControlFields& fields);

// (1/T) int |omega| dt.
double mean_abs_amplitude(const ControlFields& fields);

double unitarity_defect(const Unitary2& u);

// Time derivative of the drive phase, piecewise across breaks.
std::vector<double> phase_rate(const ControlFields& fields);

}  // namespace dogforge::qdyn
