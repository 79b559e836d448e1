#pragma once

// Doubly geometric gate synthesis: closed error curve in, holonomic control
// fields out, plus the two concrete design families.

#include "dogforge/common.hpp"
#include "dogforge/curvekit.hpp"
#include "dogforge/holonomy.hpp"
#include "dogforge/qdyn.hpp"

#include <span>
#include <string>
#include <vector>

namespace dogforge::dogsynth {

enum class Family { OrangeSlice2D, Twisted3D, Custom, StandardOrangeSlice };
const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct DesignParameters {
    double phi0 = 0.0;       // orange-slice opening
    double xi = 0.0;         // twist constant
    double omega0 = 1.0;     // drive scale; times are in units of 1/omega0
    double window = 10.0;    // half-width of each sech window in omega0*t
    std::size_t grid_points = 20001;
    std::string shape;       // "square" or "sech" for the standard orange slice
    double amplitude_scale = 1.0;
    double inner_center = 10.6;
    double outer_center = 20.6;
    double twist_offset = 0.0;
};

struct DogDesign {
    Family family = Family::Custom;
    DesignParameters params;
    curvekit::SpaceCurve error_curve;
    qdyn::ControlFields fields;
    holonomy::BlochPath path;
    double beta_g = 0.0;             // phase integral of the synthesis (or path integral)
    double beta_g_propagated = 0.0;  // alpha(T) of the propagated evolution, same branch
    double beta_discrepancy = 0.0;
    Mat3 pre_rotation = Mat3::Identity();
    Tolerances tolerances;
};

struct SynthOptions {
    Tolerances tol;
    double pole_sin = 1e-5;       // |sin theta| below which azimuth rates are fitted
    double equator_z = 1e-4;      // |z'| below which 1/z' quantities are fitted
    double singular_rel = 1e-6;   // allowed residual of x'y''-y'x'' at z' = 0, relative
};

// Control fields and Bloch path from an arc-length curve with a closed tangent loop. The curve
// is translated to start at the origin and rotated so its initial tangent is z.
DogDesign synthesize(const curvekit::SpaceCurve& curve, const SynthOptions& options = {});

struct OrangeSliceOptions {
    std::size_t grid_points = 20001;
    bool renormalize_area = true;
    bool refine_closure = true;
    Tolerances tol;
};

// Two four-pulse sech halves; the drive phase steps from 0 to phi0 between them.
DogDesign orange_slice_2d(double phi0, double omega0 = 1.0, const OrangeSliceOptions& options = {});

// Half-sequence amplitude profile in u = omega0*t, u in [-25.6, 25.6].
struct QuadSech {
    double outer_center = 20.6, inner_center = 10.6, edge = 15.6, end = 25.6, outer_factor = -0.5;
    double scale = 1.0;
    double operator()(double u) const;
    double left_limit(double u) const;
    double area() const;
    // Net tangent-angle integral of the lobe, zero for a closed lobe.
    double lobe_gap() const;
};
QuadSech closing_quad_sech(bool renormalize_area, bool refine_closure);

struct TwistedOptions {
    std::size_t grid_points = 20001;
    bool renormalize_area = true;
    bool bisector_offset = true;  // false: literal pi/2 axis offset
    SynthOptions synth;
};

// Planar double-sech curve twisted by xi*z^3, re-parameterized and synthesized.
DogDesign twisted_3d(double xi, double omega0 = 1.0, const TwistedOptions& options = {});

// The untwisted planar curve in parameter w in [0, 40].
curvekit::SpaceCurve planar_double_sech(std::size_t grid_points, bool renormalize_area = true);

struct PhasePoint {
    double xi = 0, beta_g = 0, beta_g_propagated = 0;
};
std::vector<PhasePoint> phase_vs_twist(std::span<const double> xis, double omega0 = 1.0,
                                       const TwistedOptions& options = {}, unsigned threads = 0);

struct RebaseOptions {
    bool require_zero_amplitude = false;
    double amplitude_tol = 1e-6;
    SynthOptions synth;
};

// Cyclically re-indexes a closed design and synthesizes again from the new start.
DogDesign rebase_start_point(const DogDesign& design, std::size_t new_start, const RebaseOptions& options = {});

// Standard (single pulse per geodesic) orange slice with a non-throwing design wrapper.
qdyn::ControlFields standard_orange_slice_fields(double phi0, const std::string& shape, double omega0 = 1.0,
                                                 std::size_t grid_points = 20001);
DogDesign standard_orange_slice_design(double phi0, const std::string& shape, double omega0 = 1.0,
                                       std::size_t grid_points = 20001);

// Net rotation angle of an SU(2) element, in [0, 2pi].
double rotation_angle(const Unitary2& u);

struct Check {
    std::string name;
    bool passed = false;
    double value = 0, threshold = 0;
};

// Re-evaluates the design invariants on stored data.
std::vector<Check> check_design(const DogDesign& design);

struct CurvatureTorsionMatch {
    double kappa_rel_rms = 0;  // RMS(kappa - |omega|) / RMS(omega)
    double torsion_rms = 0;    // RMS(tau - (phi' - delta))
    std::size_t samples = 0;
};
// Compares curve invariants with the fields on interior, well-curved samples.
CurvatureTorsionMatch curvature_torsion_match(const curvekit::SpaceCurve& curve, const qdyn::ControlFields& fields,
                                              double straight_fraction = 1e-3);

// RMS distance from the best-fit plane through samples [first, last], and the
// largest extent of those samples.
struct Planarity {
    double rms = 0, size = 0;
};
Planarity planarity(std::span<const Vec3> points);

}  // namespace dogforge::dogsynth
