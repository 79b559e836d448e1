#include "dogforge/dogsynth.hpp"

#include "dogforge/numerics.hpp"
#include "dogforge/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dogforge::dogsynth {

using curvekit::SpaceCurve;
using qdyn::ControlFields;

const char* family_name(Family f) {
    switch (f) {
        case Family::OrangeSlice2D: return "orange_slice_2d";
        case Family::Twisted3D: return "twisted_3d";
        case Family::StandardOrangeSlice: return "standard_orange_slice";
        default: return "custom";
    }
}

Family family_from_name(const std::string& name) {
    if (name == "orange_slice_2d") return Family::OrangeSlice2D;
    if (name == "twisted_3d") return Family::Twisted3D;
    if (name == "standard_orange_slice") return Family::StandardOrangeSlice;
    if (name == "custom") return Family::Custom;
    fail(ErrorKind::Parse, "bad_family", "unknown design family '" + name + "'");
}

double rotation_angle(const Unitary2& u) {
    return 2.0 * std::acos(std::clamp(0.5 * u.trace().real(), -1.0, 1.0));
}

namespace {

std::vector<unsigned char> as_flags(const std::vector<bool>& v) {
    return std::vector<unsigned char>(v.begin(), v.end());
}

double max_abs(std::span<const double> v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

DogDesign synthesize(const SpaceCurve& input, const SynthOptions& opt) {
    const Tolerances& tol = opt.tol;
    const std::size_t n = input.size();
    if (n < 16) fail(ErrorKind::Precondition, "too_coarse", "curve has too few samples for third derivatives");

    // Unit speed, then rotate so the initial tangent is z.
    auto T = curvekit::derivatives(input, 1);
    for (auto& t : T) {
        if (std::abs(t.norm() - 1.0) > tol.tantrix)
            fail(ErrorKind::Precondition, "tantrix_not_unit", "curve is not parameterized by arc length");
        t.normalize();
    }
    const Mat3 R = curvekit::rotation_between(T.front(), Vec3::UnitZ());
    SpaceCurve curve = curvekit::transformed(input, R, -(R * input.points.front()));
    for (auto& t : T) t = R * t;
    curve.tangent = T;
    curve.second.clear();
    const double L = curve.length();
    const auto closure = curvekit::closure_report(curve);
    if (!(closure.endpoint_gap < tol.closure * L))
        fail(ErrorKind::Numerical, "open_curve",
             "error curve is not closed (gap " + std::to_string(closure.endpoint_gap) + ")");
    const double end_angle = std::atan2(T.back().cross(Vec3::UnitZ()).norm(), T.back().z());
    if (!(end_angle < tol.closure))
        fail(ErrorKind::Numerical, "tangent_not_zhat", "final tangent is not aligned with the initial one");

    const double h = curve.grid.spacing;
    const auto& br = curve.breaks;
    std::vector<Vec3> A_left;
    const auto A = num::differentiate<Vec3>(T, h, 1, br, {}, &A_left);

    std::vector<double> om(n), numr(n), z(n), hor(n), opz(n);
    for (std::size_t k = 0; k < n; ++k) {
        om[k] = A[k].norm();
        numr[k] = T[k].x() * A[k].y() - T[k].y() * A[k].x();
        z[k] = T[k].z();
        hor[k] = T[k].x() * T[k].x() + T[k].y() * T[k].y();
        opz[k] = z[k] >= 0 ? 1.0 + z[k] : hor[k] / (1.0 - z[k]);
    }
    const double peak = max_abs(om);
    if (!(h * peak < 0.1)) fail(ErrorKind::Precondition, "too_coarse", "grid too coarse for the curvature");

    // Singular sets: poles (sin theta ~ 0) and the equator (z' ~ 0).
    std::vector<bool> pole(n), equator(n);
    const double pole_hor = opt.pole_sin * opt.pole_sin;
    for (std::size_t k = 0; k < n; ++k) {
        pole[k] = hor[k] < pole_hor;
        equator[k] = std::abs(z[k]) < opt.equator_z;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double dot = T[k].x() * T[k + 1].x() + T[k].y() * T[k + 1].y();
        if (hor[k] < 1e-4 && hor[k + 1] < 1e-4 && dot < 0) pole[k] = pole[k + 1] = true;
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (z[k] * z[k + 1] > 0 || (z[k] == 0 && z[k + 1] == 0)) continue;
        const double s = z[k] / (z[k] - z[k + 1]);
        const double at_crossing = numr[k] + s * (numr[k + 1] - numr[k]);
        if (std::abs(at_crossing) > opt.singular_rel * std::max(peak, 1e-300))
            fail(ErrorKind::Numerical, "singular_detuning",
                 "x'y''-y'x'' does not vanish where z' = 0; the detuning would diverge");
    }

    std::vector<double> delta(n), dphi(n), g(n), dchi(n);
    std::vector<bool> f_delta(n), f_dphi(n), f_g(n), f_chi(n);
    for (std::size_t k = 0; k < n; ++k) {
        f_delta[k] = equator[k];
        f_dphi[k] = equator[k] || pole[k];
        f_g[k] = equator[k] || (pole[k] && z[k] < 0);
        f_chi[k] = pole[k];
        delta[k] = f_delta[k] ? 0 : numr[k] / z[k];
        dphi[k] = f_dphi[k] ? 0 : numr[k] / (z[k] * hor[k]);
        g[k] = f_g[k] ? 0 : numr[k] / (z[k] * opz[k]);
        dchi[k] = f_chi[k] ? 0 : numr[k] / hor[k];
    }
    if (!(peak > tol.kappa_floor)) fail(ErrorKind::Numerical, "degenerate_segment", "curve is straight everywhere");
    num::fill_flagged(delta, as_flags(f_delta));
    num::fill_flagged(dphi, as_flags(f_dphi));
    num::fill_flagged(g, as_flags(f_g));
    num::fill_flagged(dchi, as_flags(f_chi));

    // Left limits at curve breaks.
    const std::size_t nb = br.size();
    std::vector<double> delta_l(nb), dphi_l(nb), g_l(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        const std::size_t b = br[j];
        const Vec3& a = A_left[j];
        const double nl = T[b].x() * a.y() - T[b].y() * a.x();
        delta_l[j] = f_delta[b] ? delta[b] : nl / z[b];
        dphi_l[j] = f_dphi[b] ? dphi[b] : nl / (z[b] * hor[b]);
        g_l[j] = f_g[b] ? g[b] : nl / (z[b] * opz[b]);
    }

    // Drive: the curvature vector read in a rotation-minimizing frame, so the
    // phase picks up the torsion integral without dividing by the curvature,
    // plus the accumulated detuning.
    const auto m1 = curvekit::transport_normal(T, A, h, br, A_left, Vec3::UnitX());
    const auto zeta = num::cumulative_integral<double>(delta, h, br, delta_l);
    auto drive = [&](std::size_t k, const Vec3& a) {
        const Vec3 m2 = T[k].cross(m1[k]);
        return std::polar(1.0, zeta[k] - pi / 2) * cplx(a.dot(m1[k]), a.dot(m2));
    };
    ControlFields fields;
    fields.grid = curve.grid;
    fields.omega = om;
    fields.delta = delta;
    fields.phi.resize(n);
    {
        std::size_t j = 0;
        double prev = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (j < nb && br[j] == k) {
                const cplx left = drive(k, A_left[j]);
                const double before = prev + num::wrap_pi(std::arg(left) - prev);
                fields.breaks.push_back(qdyn::FieldBreak{k, std::abs(left), before, delta_l[j]});
                prev = before;
                ++j;
            }
            const double raw = std::arg(drive(k, A[k]));
            fields.phi[k] = k == 0 ? raw : prev + num::wrap_pi(raw - prev);
            prev = fields.phi[k];
        }
    }
    // Bloch path: theta from z', phi and alpha integrated, pole passages as jumps.
    holonomy::BlochPath path;
    path.grid = curve.grid;
    path.theta.resize(n);
    path.phi.resize(n);
    path.alpha.resize(n);
    path.pole_flag = as_flags(pole);
    for (std::size_t k = 0; k < n; ++k) path.theta[k] = std::atan2(std::sqrt(hor[k]), z[k]);

    struct Event {
        std::size_t index;
        double dphi, dalpha;
    };
    std::vector<Event> events;
    for (std::size_t i = 0; i < n;) {
        if (!pole[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && pole[j]) ++j;
        if (i > 0 && j < n) {
            const std::size_t before = i - 1, after = j;
            const double chi_b = std::atan2(-T[before].y(), -T[before].x());
            const double chi_a = std::atan2(-T[after].y(), -T[after].x());
            double smooth = 0;
            for (std::size_t k = before; k < after; ++k) smooth += 0.5 * h * (dchi[k] + dchi[k + 1]);
            const double d = num::wrap_pi(chi_a - chi_b - smooth);
            if (std::abs(d) > 1e-6) {
                const std::size_t m = i + (j - i) / 2;
                if (z[m] < 0)
                    events.push_back({m, -d, d});
                else
                    events.push_back({m, d, 0.0});
            }
        }
        i = j;
    }

    std::vector<double> ga(n), ga_l(nb);
    for (std::size_t k = 0; k < n; ++k) ga[k] = -0.5 * g[k];
    for (std::size_t j = 0; j < nb; ++j) ga_l[j] = -0.5 * g_l[j];
    const auto Iphi = num::cumulative_integral<double>(dphi, h, br, dphi_l);
    const auto Ialpha = num::cumulative_integral<double>(ga, h, br, ga_l);
    const double phi0 = fields.phi[0] - pi / 2;
    {
        double jp = 0, ja = 0;
        std::size_t e = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (e < events.size() && events[e].index == k) {
                path.breaks.push_back(holonomy::PathBreak{k, phi0 + Iphi[k] + jp, Ialpha[k] + ja});
                jp += events[e].dphi;
                ja += events[e].dalpha;
                ++e;
            }
            path.phi[k] = phi0 + Iphi[k] + jp;
            path.alpha[k] = Ialpha[k] + ja;
        }
    }

    DogDesign d;
    d.family = Family::Custom;
    d.params.grid_points = n;
    d.error_curve = std::move(curve);
    d.fields = std::move(fields);
    d.path = std::move(path);
    d.beta_g = d.path.alpha.back();
    d.pre_rotation = R;
    d.tolerances = tol;
    const Unitary2 U = qdyn::propagate_final(d.fields);
    const double measured = std::arg(U(0, 0));
    d.beta_discrepancy = std::abs(num::wrap_pi(measured - d.beta_g));
    d.beta_g_propagated = d.beta_g + num::wrap_pi(measured - d.beta_g);
    return d;
}

// ---- Four-pulse sech half sequence ----

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

// Segment 0: outer left, 1: inner left, 2: inner right, 3: outer right.
double segment_value(const QuadSech& q, int seg, double u) {
    switch (seg) {
        case 0: return q.scale * q.outer_factor * sech(u + q.outer_center);
        case 1: return q.scale * sech(u + q.inner_center);
        case 2: return q.scale * sech(u - q.inner_center);
        default: return q.scale * q.outer_factor * sech(u - q.outer_center);
    }
}

double segment_antiderivative(const QuadSech& q, int seg, double u) {
    switch (seg) {
        case 0: return q.scale * q.outer_factor * num::gudermannian(u + q.outer_center);
        case 1: return q.scale * num::gudermannian(u + q.inner_center);
        case 2: return q.scale * num::gudermannian(u - q.inner_center);
        default: return q.scale * q.outer_factor * num::gudermannian(u - q.outer_center);
    }
}

std::array<double, 5> segment_bounds(const QuadSech& q) { return {-q.end, -q.edge, 0.0, q.edge, q.end}; }

int segment_of(const QuadSech& q, double u, bool left) {
    const auto b = segment_bounds(q);
    for (int s = 0; s < 4; ++s)
        if (left ? (u <= b[s + 1]) : (u < b[s + 1])) return s;
    return 3;
}

// Tangent angle accumulated from the start of the half.
double turning(const QuadSech& q, double u) {
    const auto b = segment_bounds(q);
    double acc = 0;
    for (int s = 0; s < 4; ++s) {
        const double hi = std::min(u, b[s + 1]);
        if (hi <= b[s]) break;
        acc += segment_antiderivative(q, s, hi) - segment_antiderivative(q, s, b[s]);
    }
    return acc;
}

}  // namespace

double QuadSech::operator()(double u) const { return segment_value(*this, segment_of(*this, u, false), u); }
double QuadSech::left_limit(double u) const { return segment_value(*this, segment_of(*this, u, true), u); }
double QuadSech::area() const { return turning(*this, end); }

double QuadSech::lobe_gap() const {
    const auto b = segment_bounds(*this);
    double gap = 0;
    for (int s = 0; s < 4; ++s) {
        gap += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double u) { return std::sin(turning(*this, u)); }, b[s], b[s + 1], 10, 1e-14);
    }
    return gap;
}

QuadSech closing_quad_sech(bool renormalize_area, bool refine_closure) {
    QuadSech q;
    auto normalize = [&](QuadSech& s) {
        s.scale = 1.0;
        if (renormalize_area) s.scale = pi / s.area();
    };
    normalize(q);
    if (!refine_closure) return q;
    auto gap = [&](double c) {
        QuadSech s = q;
        s.inner_center = c;
        normalize(s);
        return s.lobe_gap();
    };
    double lo = 10.3, hi = 10.9;
    if (gap(lo) * gap(hi) > 0) fail(ErrorKind::Numerical, "no_closure", "cannot close the four-pulse lobe");
    std::uintmax_t iters = 100;
    const auto root = boost::math::tools::toms748_solve(
        gap, lo, hi, [](double a, double b) { return std::abs(b - a) < 1e-13; }, iters);
    q.inner_center = 0.5 * (root.first + root.second);
    normalize(q);
    return q;
}

namespace {

ControlFields slice_fields(const ControlFields& f, std::size_t first, std::size_t last) {
    ControlFields out;
    out.grid = Grid{f.grid.at(first), f.grid.spacing, last - first + 1};
    out.omega.assign(f.omega.begin() + first, f.omega.begin() + last + 1);
    out.phi.assign(f.phi.begin() + first, f.phi.begin() + last + 1);
    out.delta.assign(f.delta.begin() + first, f.delta.begin() + last + 1);
    for (const auto& b : f.breaks) {
        if (b.index == last) {
            out.omega.back() = b.omega_before;
            out.phi.back() = b.phi_before;
            out.delta.back() = b.delta_before;
        } else if (b.index > first && b.index < last) {
            auto nb = b;
            nb.index -= first;
            out.breaks.push_back(nb);
        }
    }
    return out;
}

}  // namespace

DogDesign orange_slice_2d(double phi0, double omega0, const OrangeSliceOptions& options) {
    if (!(phi0 > -pi && phi0 <= pi)) fail(ErrorKind::Precondition, "phi0_range", "phi0 must lie in (-pi, pi]");
    if (!(omega0 > 0)) fail(ErrorKind::Precondition, "omega0_range", "omega0 must be positive");
    const QuadSech q = closing_quad_sech(options.renormalize_area, options.refine_closure);

    // 256 intervals per 102.4 units of u put every segment boundary on the grid.
    const std::size_t m = std::max<std::size_t>(1, std::lround((options.grid_points - 1) / 256.0));
    const std::size_t half = 128 * m, n = 256 * m + 1;
    const double hu = 0.4 / static_cast<double>(m);
    const std::array<std::size_t, 4> seg_end = {25 * m, 64 * m, 103 * m, 128 * m};

    ControlFields f;
    f.grid = Grid{0.0, hu / omega0, n};
    f.omega.resize(n);
    f.phi.resize(n);
    f.delta.assign(n, 0.0);
    auto seg_of = [&](std::size_t j) {
        int s = 0;
        while (s < 3 && j >= seg_end[s]) ++s;
        return s;
    };
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t h2 = k >= half ? 1 : 0;
        const std::size_t j = k - h2 * half;
        const double u = -q.end + hu * static_cast<double>(j);
        f.omega[k] = omega0 * segment_value(q, seg_of(j), u);
        f.phi[k] = h2 ? phi0 : 0.0;
    }
    for (std::size_t h2 = 0; h2 < 2; ++h2) {
        for (int s = 0; s < 2; ++s) {
            const std::size_t j = s == 0 ? seg_end[0] : seg_end[2];
            const double u = -q.end + hu * static_cast<double>(j);
            const std::size_t k = h2 * half + j;
            f.breaks.push_back({k, omega0 * segment_value(q, s == 0 ? 0 : 2, u), f.phi[k], 0.0});
        }
        if (h2 == 0) f.breaks.push_back({half, omega0 * segment_value(q, 3, q.end), 0.0, 0.0});
    }
    std::sort(f.breaks.begin(), f.breaks.end(), [](auto& a, auto& b) { return a.index < b.index; });
    f.validate();

    const Tolerances& tol = options.tol;
    for (std::size_t h2 = 0; h2 < 2; ++h2) {
        const auto part = slice_fields(f, h2 * half, (h2 + 1) * half);
        const double angle = rotation_angle(qdyn::propagate_final(part));
        if (!(std::abs(angle - pi) < tol.area))
            fail(ErrorKind::Numerical, "area_deviation",
                 "half sequence rotates by " + std::to_string(angle) + " instead of pi");
    }

    const auto rec = qdyn::propagate(f);
    DogDesign d;
    d.family = Family::OrangeSlice2D;
    d.error_curve = qdyn::error_curve(rec, f.break_indices());
    const double lobe_len = 0.5 * d.error_curve.length();
    const auto& r = d.error_curve.points;
    const double gap1 = (r[half] - r[0]).norm(), gap2 = (r[n - 1] - r[half]).norm();
    if (!(gap1 < tol.closure * lobe_len && gap2 < tol.closure * lobe_len))
        fail(ErrorKind::Numerical, "open_lobe",
             "four-pulse lobe does not close (gap " + std::to_string(std::max(gap1, gap2)) + ")");
    d.fields = std::move(f);
    d.path = holonomy::bloch_path_from_evolution(rec);
    d.beta_g = holonomy::aa_geometric_phase(d.path, tol.angle * 100);
    const double measured = std::arg(rec.u.back()(0, 0));
    d.beta_discrepancy = std::abs(num::wrap_pi(measured - d.beta_g));
    d.beta_g_propagated = d.beta_g + num::wrap_pi(measured - d.beta_g);
    d.params.phi0 = phi0;
    d.params.omega0 = omega0;
    d.params.window = 10.0;
    d.params.grid_points = n;
    d.params.amplitude_scale = q.scale;
    d.params.inner_center = q.inner_center;
    d.params.outer_center = q.outer_center;
    d.tolerances = tol;
    return d;
}

// ---- Twisted family ----

SpaceCurve planar_double_sech(std::size_t grid_points, bool renormalize_area) {
    if (grid_points < 64) fail(ErrorKind::Precondition, "too_coarse", "need at least 64 samples");
    const double c = renormalize_area ? pi / (2.0 * num::gudermannian(10.0)) : 1.0;
    const Grid grid{0.0, 40.0 / static_cast<double>(grid_points - 1), grid_points};
    std::vector<double> kappa(grid_points), torsion(grid_points, 0.0);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double w = grid.at(k);
        kappa[k] = c * sech(w <= 20.0 ? w - 10.0 : w - 30.0);
    }
    auto curve = curvekit::integrate_frenet(kappa, torsion, grid);
    curve.label = "planar_double_sech";
    return curve;
}

namespace {

// y of the planar curve where its tangent first crosses the equator (z' = 0).
double bisector_offset(const SpaceCurve& planar) {
    const auto& T = planar.tangent;
    const auto& S = planar.second;
    const double h = planar.grid.spacing;
    for (std::size_t k = 0; k + 1 < planar.size(); ++k) {
        if (T[k].z() > 0 && T[k + 1].z() > 0) continue;
        if (T[k].z() == 0) return planar.points[k].y();
        double s = T[k].z() / (T[k].z() - T[k + 1].z());
        for (int it = 0; it < 20; ++it) {
            const double f = num::hermite<double>(T[k].z(), T[k + 1].z(), h * S[k].z(), h * S[k + 1].z(), s);
            const double s2 = s * s;
            const double df = (6 * s2 - 6 * s) * T[k].z() + (3 * s2 - 4 * s + 1) * h * S[k].z() +
                              (-6 * s2 + 6 * s) * T[k + 1].z() + (3 * s2 - 2 * s) * h * S[k + 1].z();
            if (df == 0) break;
            s -= f / df;
        }
        return num::hermite<double>(planar.points[k].y(), planar.points[k + 1].y(), h * T[k].y(), h * T[k + 1].y(),
                                    s);
    }
    fail(ErrorKind::Numerical, "no_equator", "planar curve never turns horizontal");
}

}  // namespace

DogDesign twisted_3d(double xi, double omega0, const TwistedOptions& options) {
    if (!(std::abs(xi) <= pi / 500)) fail(ErrorKind::Precondition, "xi_range", "|xi| must not exceed pi/500");
    if (!(omega0 > 0)) fail(ErrorKind::Precondition, "omega0_range", "omega0 must be positive");
    const auto planar = planar_double_sech(options.grid_points, options.renormalize_area);
    const double offset = options.bisector_offset ? bisector_offset(planar) : pi / 2;
    const auto twisted = curvekit::twist(planar, xi, offset);
    auto curve = curvekit::arc_length_reparameterize(twisted, options.grid_points);
    curve = curvekit::transformed(curve, Mat3::Identity(), -curve.points.front());
    curve = curvekit::rescaled(curve, omega0);
    curve.label = "twisted_3d";
    DogDesign d = synthesize(curve, options.synth);
    d.family = Family::Twisted3D;
    d.params.xi = xi;
    d.params.omega0 = omega0;
    d.params.window = 10.0;
    d.params.grid_points = options.grid_points;
    d.params.amplitude_scale = options.renormalize_area ? pi / (2.0 * num::gudermannian(10.0)) : 1.0;
    d.params.twist_offset = offset;
    return d;
}

std::vector<PhasePoint> phase_vs_twist(std::span<const double> xis, double omega0, const TwistedOptions& options,
                                       unsigned threads) {
    std::vector<PhasePoint> out(xis.size());
    parallel_for(
        xis.size(),
        [&](std::size_t i) {
            const auto d = twisted_3d(xis[i], omega0, options);
            out[i] = PhasePoint{xis[i], d.beta_g, d.beta_g_propagated};
        },
        threads);
    // Keep consecutive phases on one branch.
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double shift = 2 * pi * std::round((out[i].beta_g - out[i - 1].beta_g) / (2 * pi));
        out[i].beta_g -= shift;
        out[i].beta_g_propagated -= shift;
    }
    return out;
}

DogDesign rebase_start_point(const DogDesign& design, std::size_t new_start, const RebaseOptions& options) {
    const auto& c = design.error_curve;
    const std::size_t n = c.size();
    if (new_start == 0) return design;
    if (new_start >= n - 1) fail(ErrorKind::Precondition, "bad_start", "start index outside the curve");
    const auto rep = curvekit::closure_report(c);
    if (!curvekit::is_closed(rep, c.length(), design.tolerances.closure))
        fail(ErrorKind::Precondition, "open_curve", "only closed curves can be rebased");
    const auto T = curvekit::derivatives(c, 1);
    if (std::abs(T[new_start].norm() - 1.0) > design.tolerances.tantrix)
        fail(ErrorKind::Precondition, "bad_start", "tangent undefined at the new start point");
    if (options.require_zero_amplitude) {
        const auto A = curvekit::derivatives(c, 2);
        if (A[new_start].norm() > options.amplitude_tol)
            fail(ErrorKind::Precondition, "nonzero_start_amplitude",
                 "curvature at the new start point is not zero, so the drive cannot start from rest");
    }

    // Closed curve: samples 0 and n-1 coincide, so n-1 distinct points cycle.
    const std::size_t period = n - 1;
    SpaceCurve out;
    out.grid = Grid{0.0, c.grid.spacing, n};
    out.label = c.label + "+rebased";
    out.points.resize(n);
    out.tangent.resize(n);
    const Vec3 origin = c.points[new_start];
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = (new_start + j) % period;
        const Vec3 wrap = (new_start + j >= period) ? Vec3(c.points[period] - c.points[0]) : Vec3::Zero();
        out.points[j] = c.points[k] + wrap - origin;
        out.tangent[j] = T[k];
    }
    std::vector<std::size_t> br{period - new_start};
    for (std::size_t b : c.breaks) br.push_back((b + period - new_start) % period);
    std::sort(br.begin(), br.end());
    for (std::size_t b : br)
        if (b > 0 && b + 1 < n && (out.breaks.empty() || b != out.breaks.back())) out.breaks.push_back(b);

    DogDesign d = synthesize(out, options.synth);
    d.family = design.family;
    d.params = design.params;
    return d;
}

// ---- Standard orange slice ----

ControlFields standard_orange_slice_fields(double phi0, const std::string& shape, double omega0,
                                           std::size_t grid_points) {
    if (!(phi0 > -pi && phi0 <= pi)) fail(ErrorKind::Precondition, "phi0_range", "phi0 must lie in (-pi, pi]");
    if (!(omega0 > 0)) fail(ErrorKind::Precondition, "omega0_range", "omega0 must be positive");
    const std::size_t n = grid_points % 2 == 1 ? grid_points : grid_points + 1;
    if (n < 33) fail(ErrorKind::Precondition, "too_coarse", "need at least 33 samples");
    const std::size_t mid = (n - 1) / 2;
    ControlFields f;
    f.omega.resize(n);
    f.phi.resize(n);
    f.delta.assign(n, 0.0);
    if (shape == "square") {
        f.grid = Grid{0.0, 2 * pi / omega0 / static_cast<double>(n - 1), n};
        std::fill(f.omega.begin(), f.omega.end(), omega0);
    } else if (shape == "sech") {
        const double c = pi / (2.0 * num::gudermannian(10.0));
        f.grid = Grid{0.0, 40.0 / omega0 / static_cast<double>(n - 1), n};
        for (std::size_t k = 0; k < n; ++k) {
            const double u = omega0 * f.grid.at(k);
            f.omega[k] = omega0 * c * sech(k <= mid ? u - 10.0 : u - 30.0);
        }
    } else {
        fail(ErrorKind::Precondition, "bad_shape", "pulse shape must be 'square' or 'sech'");
    }
    for (std::size_t k = 0; k < n; ++k) f.phi[k] = k < mid ? 0.0 : phi0;
    f.breaks.push_back({mid, f.omega[mid], 0.0, 0.0});
    return f;
}

DogDesign standard_orange_slice_design(double phi0, const std::string& shape, double omega0,
                                       std::size_t grid_points) {
    DogDesign d;
    d.family = Family::StandardOrangeSlice;
    d.fields = standard_orange_slice_fields(phi0, shape, omega0, grid_points);
    const auto rec = qdyn::propagate(d.fields);
    d.error_curve = qdyn::error_curve(rec, d.fields.break_indices());
    d.path = holonomy::bloch_path_from_evolution(rec);
    d.beta_g = holonomy::aa_geometric_phase(d.path, 1e-4);
    const double measured = std::arg(rec.u.back()(0, 0));
    d.beta_discrepancy = std::abs(num::wrap_pi(measured - d.beta_g));
    d.beta_g_propagated = d.beta_g + num::wrap_pi(measured - d.beta_g);
    d.params.phi0 = phi0;
    d.params.omega0 = omega0;
    d.params.shape = shape;
    d.params.grid_points = d.fields.size();
    return d;
}

// ---- Diagnostics ----

CurvatureTorsionMatch curvature_torsion_match(const SpaceCurve& curve, const ControlFields& fields,
                                              double straight_fraction) {
    const std::size_t n = curve.size();
    if (fields.size() != n) fail(ErrorKind::Precondition, "size_mismatch", "curve and fields differ in length");
    const auto fr = curvekit::frenet(curve);
    const auto dphase = qdyn::phase_rate(fields);
    const double kmax = *std::max_element(fr.curvature.begin(), fr.curvature.end());
    std::vector<unsigned char> skip(n, 0);
    for (std::size_t k = 0; k < std::min<std::size_t>(4, n); ++k) skip[k] = skip[n - 1 - k] = 1;
    for (std::size_t b : curve.breaks) skip[b] = 1;
    for (std::size_t b : fields.break_indices()) skip[b] = 1;
    double sk = 0, so = 0, st = 0;
    std::size_t used = 0, used_t = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (skip[k] || fr.curvature[k] < straight_fraction * kmax) continue;
        const double dk = fr.curvature[k] - std::abs(fields.omega[k]);
        sk += dk * dk;
        so += fields.omega[k] * fields.omega[k];
        ++used;
        if (fr.torsion_defined[k]) {
            const double dt = fr.torsion[k] - (dphase[k] - fields.delta[k]);
            st += dt * dt;
            ++used_t;
        }
    }
    CurvatureTorsionMatch m;
    m.samples = used;
    m.kappa_rel_rms = so > 0 ? std::sqrt(sk / so) : 0.0;
    m.torsion_rms = used_t ? std::sqrt(st / static_cast<double>(used_t)) : 0.0;
    return m;
}

Planarity planarity(std::span<const Vec3> points) {
    Vec3 c = Vec3::Zero();
    for (const auto& p : points) c += p;
    c /= static_cast<double>(points.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : points) cov += (p - c) * (p - c).transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const Vec3 normal = es.eigenvectors().col(0);
    Planarity out;
    double ss = 0;
    for (const auto& p : points) {
        const double d = normal.dot(p - c);
        ss += d * d;
        out.size = std::max(out.size, (p - points.front()).norm());
    }
    out.rms = std::sqrt(ss / static_cast<double>(points.size()));
    return out;
}

std::vector<Check> check_design(const DogDesign& d) {
    std::vector<Check> out;
    const auto& tol = d.tolerances;
    const auto& c = d.error_curve;
    const double L = c.length();
    const auto rep = curvekit::closure_report(c);
    out.push_back({"closure_endpoint", rep.endpoint_gap < tol.closure * L, rep.endpoint_gap, tol.closure * L});
    out.push_back({"closure_tangent", rep.tangent_gap < tol.closure, rep.tangent_gap, tol.closure});
    out.push_back({"initial_tangent_z", rep.tangent_vs_zhat < tol.closure, rep.tangent_vs_zhat, tol.closure});

    const double res = holonomy::parallel_transport_residual(d.path);
    out.push_back({"parallel_transport", res < tol.pt, res, tol.pt});
    const double theta_end = std::max(std::abs(d.path.theta.front()), std::abs(d.path.theta.back()));
    out.push_back({"cyclic_path", theta_end < 1e-4, theta_end, 1e-4});

    const auto match = curvature_torsion_match(c, d.fields);
    out.push_back({"curvature_matches_amplitude", match.kappa_rel_rms < 1e-4, match.kappa_rel_rms, 1e-4});
    out.push_back({"torsion_matches_phase_rate", match.torsion_rms < 1e-3, match.torsion_rms, 1e-3});

    const Unitary2 U = qdyn::propagate_final(d.fields);
    const double off = std::max(std::abs(U(0, 1)), std::abs(U(1, 0)));
    out.push_back({"gate_diagonal", off < 1e-3, off, 1e-3});
    return out;
}

}  // namespace dogforge::dogsynth
