#pragma once

// Bloch-sphere paths of the first column of U = [[e^{ia} cos(th/2), ...],
// [e^{i(a+ph)} sin(th/2), ...]], parallel transport, and Aharonov-Anandan phases.

#include "dogforge/common.hpp"
#include "dogforge/qdyn.hpp"

#include <string>
#include <vector>

namespace dogforge::holonomy {

// Instantaneous jump of azimuth and phase at a pole traversal. Stored arrays
// hold right-hand values at `index`.
struct PathBreak {
    std::size_t index = 0;
    double phi_before = 0, alpha_before = 0;
    bool operator==(const PathBreak&) const = default;
};

struct BlochPath {
    Grid grid;
    std::vector<double> theta, phi, alpha;
    std::vector<unsigned char> pole_flag;  // phi or alpha interpolated here
    std::vector<PathBreak> breaks;

    std::size_t size() const { return theta.size(); }
    std::vector<std::size_t> break_indices() const;
};

// Largest |alpha' + (1 - cos theta) phi' / 2| over interior samples away from
// poles and breaks.
double parallel_transport_residual(const BlochPath& path);
bool is_holonomic(const BlochPath& path, double pt_tol = 1e-6);
bool is_cyclic(const BlochPath& path, double angle_tol = 1e-6);

// Control fields that drive the state along the path (omega >= 0).
qdyn::ControlFields fields_from_path(const BlochPath& path, double pt_tol = 1e-6);

// Reads theta, phi, alpha off the first column of every propagator. Samples
// within `pole_eps` of a pole are flagged and interpolated; jumps across a pole
// become path breaks.
BlochPath bloch_path_from_evolution(const qdyn::EvolutionRecord& record, double pole_eps = 1e-6);

// -1/2 int (1 - cos theta) dphi by the trapezoid rule, including break jumps.
double aa_geometric_phase(const BlochPath& path, double angle_tol = 1e-6);

enum class Frame { Lab, DetuningRotating };
const char* frame_name(Frame f);

struct PhaseReport {
    double total = 0, dynamical = 0, geometric = 0;
    Frame frame = Frame::Lab;
};

// Phases of the state started in |0>. In the rotating frame the state is
// exp(i zeta sz / 2) psi with zeta = int delta, and the Hamiltonian is the
// drive with phase phi - zeta and no detuning.
PhaseReport dynamical_phase(const qdyn::EvolutionRecord& record, const qdyn::ControlFields& fields, Frame frame);

// <psi0|H|psi0> along the record.
std::vector<double> energy_expectation(const qdyn::EvolutionRecord& record, const qdyn::ControlFields& fields);

// Two-level system H = e_n |n><n| + e_m |m><m| with |<m|psi>|^2 = b_sq,
// energies perturbed as E -> E (1 - eps).
struct TwoLevelToy {
    double e_n = 1.0, e_m = 0.0, b_sq = 0.5;
};

struct RobustnessPhases {
    double geometric = 0, total = 0, dynamical = 0;
};

RobustnessPhases aa_phase_robustness(const TwoLevelToy& model, double eps);

}  // namespace dogforge::holonomy
