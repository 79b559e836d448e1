#pragma once

// Differential geometry of sampled space curves.

#include "dogforge/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dogforge::curvekit {

// A curve sampled on a uniform parameter grid. `tangent` and `second` optionally
// cache accurate first and second derivatives; when absent they are computed
// by finite differences. `breaks` lists sample indices where the second
// derivative may jump.
struct SpaceCurve {
    Grid grid;
    std::vector<Vec3> points;
    std::vector<Vec3> tangent;
    std::vector<Vec3> second;
    std::vector<std::size_t> breaks;
    std::string label;

    std::size_t size() const { return points.size(); }
    double length() const { return grid.span(); }
    bool has_tangent() const { return tangent.size() == points.size(); }
    bool has_second() const { return second.size() == points.size(); }

    // Validates sizes and uniform spacing of explicit sample times.
    static SpaceCurve from_samples(std::span<const double> t, std::vector<Vec3> points, std::string label = {});
};

struct Tantrix {
    Grid grid;
    std::vector<Vec3> directions;
};

struct FrenetData {
    std::vector<double> curvature;
    std::vector<double> torsion;
    std::vector<unsigned char> torsion_defined;
};

struct Frame {
    Vec3 tangent = Vec3::UnitZ();
    Vec3 normal = Vec3::UnitY();
    Vec3 binormal = -Vec3::UnitX();
};

struct ClosureReport {
    double endpoint_gap = 0;
    double tangent_gap = 0;
    double tangent_vs_zhat = 0;
};

struct FrenetOptions {
    double kappa_floor = 1e-9;
    bool strict = false;
    std::size_t straight_run_max = 16;
};

// order-th derivative with respect to the curve parameter.
std::vector<Vec3> derivatives(const SpaceCurve& curve, int order);

// Unit tangents; fails when any |dr/dt| departs from 1 by more than `tol`.
Tantrix tantrix(const SpaceCurve& curve, double tol = 1e-6);

// Curvature |r' x r''| / |r'|^3 and torsion (r' x r'').r''' / |r' x r''|^2.
// Torsion is flagged undefined where |r' x r''| <= kappa_floor and at break samples.
FrenetData frenet(const SpaceCurve& curve, const FrenetOptions& options = {});

// Integrates the Frenet-Serret system for curvature and torsion on a uniform
// grid with a fourth-order Magnus scheme. The result starts at the origin and
// caches tangent and curvature vector.
SpaceCurve integrate_frenet(std::span<const double> curvature, std::span<const double> torsion, const Grid& grid,
                            const Frame& initial = {});

// Rotation-minimizing transport of a unit normal along a unit-speed curve
// given its tangent and tangent derivative (with left limits at breaks).
// Fourth-order Magnus steps; the result is re-projected orthogonal to the tangent.
std::vector<Vec3> transport_normal(std::span<const Vec3> tangent, std::span<const Vec3> accel, double h,
                                   std::span<const std::size_t> breaks, std::span<const Vec3> accel_left,
                                   const Vec3& start);

// Twists a curve lying in the yz-plane about the line y = axis_offset, x = 0
// by the angle xi*z^3: (x, y, z) -> (-(y - c) sin g, (y - c) cos g, z).
// Samples stay in the input parameter.
SpaceCurve twist(const SpaceCurve& planar, double xi, double axis_offset = pi / 2, double planar_tol = 1e-9);

// Resamples on a uniform arc-length grid with `samples` points (default: input
// count). The arc length is integrated with Hermite corrections and inverted
// through a monotone cubic.
SpaceCurve arc_length_reparameterize(const SpaceCurve& curve, std::size_t samples = 0);

ClosureReport closure_report(const SpaceCurve& curve);

// True when both gaps are below closure_tol * length.
bool is_closed(const ClosureReport& report, double length, double closure_tol = 1e-4);

// Applies p -> R p + shift to points and rotates cached derivatives.
SpaceCurve transformed(const SpaceCurve& curve, const Mat3& rotation, const Vec3& shift = Vec3::Zero());

// Rescales the parameter and the points by 1/factor (unit speed preserved).
SpaceCurve rescaled(const SpaceCurve& curve, double factor);

// Smallest rotation taking unit vector `from` onto unit vector `to`.
Mat3 rotation_between(const Vec3& from, const Vec3& to);

// RMS distance after optimal rigid alignment (Kabsch) of equally sized samples.
double rigid_alignment_rms(std::span<const Vec3> a, std::span<const Vec3> b);

}  // namespace dogforge::curvekit
