#include "dogforge/curvekit.hpp"

#include "dogforge/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace dogforge::curvekit {

SpaceCurve SpaceCurve::from_samples(std::span<const double> t, std::vector<Vec3> points, std::string label) {
    if (t.size() != points.size()) fail(ErrorKind::Precondition, "size_mismatch", "time and point counts differ");
    if (t.size() < 2) fail(ErrorKind::Precondition, "too_few_samples", "a curve needs at least two samples");
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(h > 0)) fail(ErrorKind::Precondition, "non_uniform_grid", "sample times must increase");
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double expect = t.front() + h * static_cast<double>(k);
        if (std::abs(t[k] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
            fail(ErrorKind::Precondition, "non_uniform_grid", "sample times are not uniformly spaced");
    }
    SpaceCurve c;
    c.grid = Grid{t.front(), h, t.size()};
    c.points = std::move(points);
    c.label = std::move(label);
    return c;
}

std::vector<Vec3> derivatives(const SpaceCurve& curve, int order) {
    const std::span<const Vec3> pts(curve.points);
    const double h = curve.grid.spacing;
    const auto& br = curve.breaks;
    if (curve.size() < 7) fail(ErrorKind::Precondition, "too_few_samples", "derivatives need at least 7 samples");
    switch (order) {
        case 1:
            if (curve.has_tangent()) return curve.tangent;
            return num::differentiate<Vec3>(pts, h, 1, br);
        case 2:
            if (curve.has_second()) return curve.second;
            if (curve.has_tangent()) return num::differentiate<Vec3>(curve.tangent, h, 1, br);
            return num::differentiate<Vec3>(pts, h, 2, br);
        case 3:
            if (curve.has_second()) return num::differentiate<Vec3>(curve.second, h, 1, br);
            if (curve.has_tangent()) return num::differentiate<Vec3>(curve.tangent, h, 2, br);
            return num::differentiate<Vec3>(pts, h, 3, br);
        default:
            fail(ErrorKind::Precondition, "bad_order", "derivative order must be 1, 2 or 3");
    }
}

Tantrix tantrix(const SpaceCurve& curve, double tol) {
    Tantrix out{curve.grid, derivatives(curve, 1)};
    for (const Vec3& d : out.directions)
        if (std::abs(d.norm() - 1.0) > tol)
            fail(ErrorKind::Numerical, "tantrix_not_unit", "curve is not parameterized by arc length");
    return out;
}

FrenetData frenet(const SpaceCurve& curve, const FrenetOptions& options) {
    const auto r1 = derivatives(curve, 1);
    const auto r2 = derivatives(curve, 2);
    const auto r3 = derivatives(curve, 3);
    const std::size_t n = curve.size();
    FrenetData out;
    out.curvature.resize(n);
    out.torsion.assign(n, 0.0);
    out.torsion_defined.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 c = r1[k].cross(r2[k]);
        const double speed = r1[k].norm();
        const double cn = c.norm();
        out.curvature[k] = cn / (speed * speed * speed);
        if (cn > options.kappa_floor) {
            out.torsion[k] = c.dot(r3[k]) / (cn * cn);
            out.torsion_defined[k] = 1;
        }
    }
    for (std::size_t b : curve.breaks)
        if (b < n) out.torsion_defined[b] = 0, out.torsion[b] = 0.0;
    if (options.strict) {
        std::size_t run = 0;
        for (std::size_t k = 0; k < n; ++k) {
            run = out.torsion_defined[k] ? 0 : run + 1;
            if (run > options.straight_run_max)
                fail(ErrorKind::Numerical, "degenerate_segment", "straight segment too long for torsion");
        }
    }
    return out;
}

namespace {

// Cubic interpolation of samples at fractional index k + c, stencil kept inside the array.
double sample_at(std::span<const double> f, std::size_t k, double c) {
    const std::size_t n = f.size();
    if (n < 4) {
        const std::size_t k1 = std::min(k + 1, n - 1);
        return (1 - c) * f[k] + c * f[k1];
    }
    const std::size_t start = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(k) - 1, 0,
                                                         static_cast<std::ptrdiff_t>(n) - 4);
    const double x = static_cast<double>(k) + c - static_cast<double>(start + 1);
    const auto w = num::cubic_weights(x);
    return w[0] * f[start] + w[1] * f[start + 1] + w[2] * f[start + 2] + w[3] * f[start + 3];
}

Mat3 rodrigues(const Vec3& axis_angle) {
    const double th = axis_angle.norm();
    Mat3 K;
    K << 0, -axis_angle.z(), axis_angle.y(), axis_angle.z(), 0, -axis_angle.x(), -axis_angle.y(), axis_angle.x(), 0;
    double a, b;
    if (th < 1e-4) {
        const double t2 = th * th;
        a = 1 - t2 / 6 + t2 * t2 / 120;
        b = 0.5 - t2 / 24 + t2 * t2 / 720;
    } else {
        a = std::sin(th) / th;
        b = (1 - std::cos(th)) / (th * th);
    }
    return Mat3::Identity() + a * K + b * K * K;
}

void orthonormalize(Mat3& F) {
    Vec3 t = F.col(0).normalized();
    Vec3 n = (F.col(1) - t.dot(F.col(1)) * t).normalized();
    F.col(0) = t;
    F.col(1) = n;
    F.col(2) = t.cross(n);
}

}  // namespace

SpaceCurve integrate_frenet(std::span<const double> curvature, std::span<const double> torsion, const Grid& grid,
                            const Frame& initial) {
    const std::size_t n = grid.count;
    if (curvature.size() != n || torsion.size() != n)
        fail(ErrorKind::Precondition, "size_mismatch", "curvature and torsion must match the grid");
    if (n < 2) fail(ErrorKind::Precondition, "too_few_samples", "need at least two samples");
    Mat3 F;
    F.col(0) = initial.tangent;
    F.col(1) = initial.normal;
    F.col(2) = initial.binormal;
    if ((F.transpose() * F - Mat3::Identity()).norm() > 1e-10 || F.determinant() < 0)
        fail(ErrorKind::Precondition, "bad_frame", "initial frame is not a right-handed orthonormal triad");

    constexpr double c1 = 0.5 - 0.28867513459481288225, c2 = 0.5 + 0.28867513459481288225;
    constexpr double comm = 0.14433756729740644113;  // sqrt(3)/12
    const double h = grid.spacing;

    std::vector<Vec3> tangent(n), second(n);
    tangent[0] = F.col(0);
    second[0] = curvature[0] * F.col(1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        // Body angular velocity (tau, 0, kappa) at the two Gauss points.
        const Vec3 w1(sample_at(torsion, k, c1), 0.0, sample_at(curvature, k, c1));
        const Vec3 w2(sample_at(torsion, k, c2), 0.0, sample_at(curvature, k, c2));
        const Vec3 step = 0.5 * h * (w1 + w2) + comm * h * h * w1.cross(w2);
        F = F * rodrigues(step);
        orthonormalize(F);
        tangent[k + 1] = F.col(0);
        second[k + 1] = curvature[k + 1] * F.col(1);
    }

    SpaceCurve c;
    c.grid = grid;
    c.points = num::cumulative_integral<Vec3>(tangent, h);
    c.tangent = std::move(tangent);
    c.second = std::move(second);
    c.label = "frenet";
    return c;
}

std::vector<Vec3> transport_normal(std::span<const Vec3> tangent, std::span<const Vec3> accel, double h,
                                   std::span<const std::size_t> breaks, std::span<const Vec3> accel_left,
                                   const Vec3& start) {
    const std::size_t n = tangent.size();
    if (accel.size() != n || n < 2) fail(ErrorKind::Precondition, "size_mismatch", "tangent and acceleration differ");
    Vec3 m = start - start.dot(tangent[0]) * tangent[0];
    if (!(m.norm() > 1e-12)) fail(ErrorKind::Precondition, "bad_frame", "start vector is parallel to the tangent");
    m.normalize();
    constexpr double c1 = 0.5 - 0.28867513459481288225, c2 = 0.5 + 0.28867513459481288225;
    constexpr double comm = 0.14433756729740644113;  // sqrt(3)/12
    std::vector<Vec3> out(n);
    out[0] = m;
    const auto ps = num::pieces(n, breaks);
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        const bool brk = p + 1 < ps.size() && p < accel_left.size();
        auto A = [&](std::size_t i) -> Vec3 { return (i == b && brk) ? accel_left[p] : accel[i]; };
        auto at = [&](auto&& f, std::size_t k, double c) -> Vec3 {
            if (b - a + 1 < 4) return (1 - c) * f(k) + c * f(k + 1);
            const std::size_t s0 = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(k) - 1,
                                                              static_cast<std::ptrdiff_t>(a),
                                                              static_cast<std::ptrdiff_t>(b) - 3);
            const auto w = num::cubic_weights(static_cast<double>(k) + c - static_cast<double>(s0 + 1));
            return w[0] * f(s0) + w[1] * f(s0 + 1) + w[2] * f(s0 + 2) + w[3] * f(s0 + 3);
        };
        auto T = [&](std::size_t i) -> Vec3 { return tangent[i]; };
        for (std::size_t k = a; k < b; ++k) {
            // Frame angular velocity T x T' (no twist about the tangent).
            const Vec3 w1 = at(T, k, c1).cross(at(A, k, c1));
            const Vec3 w2 = at(T, k, c2).cross(at(A, k, c2));
            const Vec3 step = 0.5 * h * (w1 + w2) - comm * h * h * w1.cross(w2);
            m = rodrigues(step) * m;
            m -= m.dot(tangent[k + 1]) * tangent[k + 1];
            m.normalize();
            out[k + 1] = m;
        }
    }
    return out;
}

SpaceCurve twist(const SpaceCurve& planar, double xi, double axis_offset, double planar_tol) {
    double extent = 1.0, off_plane = 0.0;
    for (const Vec3& p : planar.points) {
        extent = std::max(extent, p.cwiseAbs().maxCoeff());
        off_plane = std::max(off_plane, std::abs(p.x()));
    }
    if (off_plane > planar_tol * extent)
        fail(ErrorKind::Precondition, "not_planar", "curve does not lie in the yz-plane");

    const auto d1 = derivatives(planar, 1);
    const auto d2 = derivatives(planar, 2);
    const std::size_t n = planar.size();
    SpaceCurve out;
    out.grid = planar.grid;
    out.breaks = planar.breaks;
    out.label = planar.label.empty() ? "twisted" : planar.label + "+twist";
    out.points.resize(n);
    out.tangent.resize(n);
    out.second.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double Y = planar.points[k].y() - axis_offset, z = planar.points[k].z();
        const double Y1 = d1[k].y(), z1 = d1[k].z(), Y2 = d2[k].y(), z2 = d2[k].z();
        const double g = xi * z * z * z;
        const double g1 = 3 * xi * z * z * z1;
        const double g2 = 6 * xi * z * z1 * z1 + 3 * xi * z * z * z2;
        const double s = std::sin(g), c = std::cos(g);
        out.points[k] = Vec3(-Y * s, Y * c, z);
        out.tangent[k] = Vec3(-Y1 * s - Y * c * g1, Y1 * c - Y * s * g1, z1);
        out.second[k] = Vec3(-Y2 * s - 2 * Y1 * c * g1 + Y * s * g1 * g1 - Y * c * g2,
                             Y2 * c - 2 * Y1 * s * g1 - Y * c * g1 * g1 - Y * s * g2, z2);
    }
    return out;
}

SpaceCurve arc_length_reparameterize(const SpaceCurve& curve, std::size_t samples) {
    const std::size_t n = curve.size();
    if (samples == 0) samples = n;
    if (samples < 2) fail(ErrorKind::Precondition, "too_few_samples", "need at least two output samples");
    const auto d1 = derivatives(curve, 1);
    const auto d2 = derivatives(curve, 2);
    const double h = curve.grid.spacing;

    std::vector<double> w(n), speed(n), accel(n);
    double mean = 0;
    for (std::size_t k = 0; k < n; ++k) {
        w[k] = curve.grid.at(k);
        speed[k] = d1[k].norm();
        mean += speed[k] / static_cast<double>(n);
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!(speed[k] > 1e-12 * mean))
            fail(ErrorKind::Numerical, "zero_speed", "curve speed vanishes; arc length is not invertible");
        accel[k] = d1[k].dot(d2[k]) / speed[k];
    }
    // Arc length by the corrected trapezoid rule (exact for cubic speed).
    std::vector<double> arc(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k)
        arc[k + 1] = arc[k] + 0.5 * h * (speed[k] + speed[k + 1]) + h * h / 12.0 * (accel[k] - accel[k + 1]);
    const num::MonotoneCubic arc_of_w(w, arc, speed);

    const double L = arc.back();
    const double dt = L / static_cast<double>(samples - 1);
    SpaceCurve out;
    out.grid = Grid{0.0, dt, samples};
    out.label = curve.label;
    out.points.resize(samples);
    out.tangent.resize(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        const double t = std::min(L, dt * static_cast<double>(j));
        const double wj = j + 1 == samples ? w.back() : arc_of_w.inverse(t);
        std::size_t k = std::min<std::size_t>(static_cast<std::size_t>((wj - w[0]) / h), n - 2);
        const double s = (wj - w[k]) / h;
        out.points[j] = num::hermite<Vec3>(curve.points[k], curve.points[k + 1], h * d1[k], h * d1[k + 1], s);
        out.tangent[j] = num::hermite<Vec3>(d1[k], d1[k + 1], h * d2[k], h * d2[k + 1], s).normalized();
    }
    for (std::size_t b : curve.breaks) {
        const double t = arc[std::min(b, n - 1)];
        const auto j = static_cast<std::size_t>(std::lround(t / dt));
        if (j > 0 && j + 1 < samples) out.breaks.push_back(j);
    }
    return out;
}

ClosureReport closure_report(const SpaceCurve& curve) {
    ClosureReport rep;
    if (curve.size() == 0) return rep;
    rep.endpoint_gap = (curve.points.back() - curve.points.front()).norm();
    Vec3 t0, t1;
    if (curve.has_tangent()) {
        t0 = curve.tangent.front();
        t1 = curve.tangent.back();
    } else if (curve.size() >= 7) {
        const auto d = derivatives(curve, 1);
        t0 = d.front();
        t1 = d.back();
    } else {
        return rep;
    }
    t0.normalize();
    t1.normalize();
    rep.tangent_gap = (t1 - t0).norm();
    rep.tangent_vs_zhat = std::atan2(t0.cross(Vec3::UnitZ()).norm(), t0.z());
    return rep;
}

bool is_closed(const ClosureReport& report, double length, double closure_tol) {
    const double tol = closure_tol * length;
    return report.endpoint_gap < tol && report.tangent_gap < tol;
}

SpaceCurve transformed(const SpaceCurve& curve, const Mat3& rotation, const Vec3& shift) {
    SpaceCurve out = curve;
    for (auto& p : out.points) p = rotation * p + shift;
    for (auto& d : out.tangent) d = rotation * d;
    for (auto& d : out.second) d = rotation * d;
    return out;
}

SpaceCurve rescaled(const SpaceCurve& curve, double factor) {
    SpaceCurve out = curve;
    out.grid.t0 /= factor;
    out.grid.spacing /= factor;
    for (auto& p : out.points) p /= factor;
    for (auto& d : out.second) d *= factor;
    return out;
}

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
    const Vec3 a = from.normalized(), b = to.normalized();
    const Vec3 axis = a.cross(b);
    const double s = axis.norm(), c = a.dot(b);
    if (s < 1e-15) {
        if (c > 0) return Mat3::Identity();
        Vec3 perp = a.cross(Vec3::UnitX());
        if (perp.norm() < 0.5) perp = a.cross(Vec3::UnitY());
        return Eigen::AngleAxisd(pi, perp.normalized()).toRotationMatrix();
    }
    return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

double rigid_alignment_rms(std::span<const Vec3> a, std::span<const Vec3> b) {
    const std::size_t n = a.size();
    Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) ca += a[i], cb += b[i];
    ca /= static_cast<double>(n);
    cb /= static_cast<double>(n);
    Mat3 H = Mat3::Zero();
    for (std::size_t i = 0; i < n; ++i) H += (a[i] - ca) * (b[i] - cb).transpose();
    Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 D = Mat3::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) D(2, 2) = -1;
    const Mat3 R = svd.matrixV() * D * svd.matrixU().transpose();
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += (R * (a[i] - ca) - (b[i] - cb)).squaredNorm();
    return std::sqrt(ss / static_cast<double>(n));
}

}  // namespace dogforge::curvekit
