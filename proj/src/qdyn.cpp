#include "dogforge/qdyn.hpp"

#include "dogforge/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace dogforge::qdyn {

namespace {

constexpr double kGauss1 = 0.5 - 0.28867513459481288225;
constexpr double kGauss2 = 0.5 + 0.28867513459481288225;
constexpr double kStepLimit = 0.1;

Unitary2 from_lane(double ar, double ai, double br, double bi) {
    Unitary2 u;
    u(0, 0) = cplx(ar, ai);
    u(1, 0) = cplx(br, bi);
    u(0, 1) = -std::conj(u(1, 0));
    u(1, 1) = std::conj(u(0, 0));
    return u;
}

// Value of a field inside piece [a, b] with the left limit used at a break end.
struct PieceView {
    const std::vector<double>& values;
    std::size_t b;
    bool end_is_break;
    double before;
    double operator()(std::size_t i) const { return (i == b && end_is_break) ? before : values[i]; }
};

double interpolate(const PieceView& f, std::size_t a, std::size_t b, std::size_t k, double c) {
    if (b - a + 1 < 4) return (1 - c) * f(k) + c * f(k + 1);
    const std::size_t start =
        std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(k) - 1, static_cast<std::ptrdiff_t>(a),
                                   static_cast<std::ptrdiff_t>(b) - 3);
    const auto w = num::cubic_weights(static_cast<double>(k) + c - static_cast<double>(start + 1));
    return w[0] * f(start) + w[1] * f(start + 1) + w[2] * f(start + 2) + w[3] * f(start + 3);
}

void check_step_size(const ControlFields& fields, const NoiseModel& noise) {
    double peak = 0;
    auto bump = [&](double om, double de) {
        peak = std::max({peak, std::abs(om) * (1 + std::abs(noise.amplitude_error)),
                         std::abs(de) + std::abs(noise.detuning)});
    };
    for (std::size_t k = 0; k < fields.size(); ++k) bump(fields.omega[k], fields.delta[k]);
    for (const auto& b : fields.breaks) bump(b.omega_before, b.delta_before);
    if (!(fields.grid.spacing * peak < kStepLimit))
        fail(ErrorKind::Precondition, "step_size", "grid too coarse for the field amplitudes");
    if (!std::isfinite(noise.detuning) || !std::isfinite(noise.amplitude_error))
        fail(ErrorKind::Precondition, "non_finite", "noise parameters must be finite");
}

}  // namespace

std::vector<std::size_t> ControlFields::break_indices() const {
    std::vector<std::size_t> out;
    for (const auto& b : breaks) out.push_back(b.index);
    return out;
}

void ControlFields::validate() const {
    const std::size_t n = omega.size();
    if (phi.size() != n || delta.size() != n || grid.count != n)
        fail(ErrorKind::Precondition, "size_mismatch", "field arrays must share the grid length");
    if (n < 2) fail(ErrorKind::Precondition, "too_few_samples", "fields need at least two samples");
    if (!(grid.spacing > 0) || !std::isfinite(grid.spacing))
        fail(ErrorKind::Precondition, "bad_grid", "grid spacing must be positive");
    for (std::size_t k = 0; k < n; ++k)
        if (!std::isfinite(omega[k]) || !std::isfinite(phi[k]) || !std::isfinite(delta[k]))
            fail(ErrorKind::Precondition, "non_finite", "non-finite field sample");
    std::size_t last = 0;
    for (const auto& b : breaks) {
        if (b.index <= last || b.index + 1 >= n)
            fail(ErrorKind::Precondition, "bad_break", "breaks must be interior and strictly increasing");
        if (!std::isfinite(b.omega_before) || !std::isfinite(b.phi_before) || !std::isfinite(b.delta_before))
            fail(ErrorKind::Precondition, "non_finite", "non-finite break value");
        last = b.index;
    }
}

Vec3 pauli_vector(double omega, double phi, double delta, const NoiseModel& noise) {
    const double a = 0.5 * omega * (1.0 + noise.amplitude_error);
    return Vec3(a * std::cos(phi), a * std::sin(phi), 0.5 * delta + noise.detuning);
}

kernels::StepTable step_table(const ControlFields& fields) {
    fields.validate();
    kernels::StepTable t;
    t.dt = fields.grid.spacing;
    const std::size_t steps = fields.size() - 1;
    for (auto* v : {&t.x1, &t.y1, &t.z1, &t.x2, &t.y2, &t.z2}) v->resize(steps);
    // The drive is interpolated in Cartesian form: the phase may turn quickly
    // where the amplitude is small, while omega*cos(phi), omega*sin(phi) stay smooth.
    const std::size_t n = fields.size();
    std::vector<double> dx(n), dy(n);
    for (std::size_t k = 0; k < n; ++k) {
        dx[k] = fields.omega[k] * std::cos(fields.phi[k]);
        dy[k] = fields.omega[k] * std::sin(fields.phi[k]);
    }
    const auto ps = num::pieces(n, fields.break_indices());
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        const bool brk = p + 1 < ps.size();
        const FieldBreak fb = brk ? fields.breaks[p] : FieldBreak{};
        const PieceView vx{dx, b, brk, fb.omega_before * std::cos(fb.phi_before)};
        const PieceView vy{dy, b, brk, fb.omega_before * std::sin(fb.phi_before)};
        const PieceView de{fields.delta, b, brk, fb.delta_before};
        for (std::size_t k = a; k < b; ++k) {
            t.x1[k] = 0.5 * interpolate(vx, a, b, k, kGauss1);
            t.y1[k] = 0.5 * interpolate(vy, a, b, k, kGauss1);
            t.z1[k] = 0.5 * interpolate(de, a, b, k, kGauss1);
            t.x2[k] = 0.5 * interpolate(vx, a, b, k, kGauss2);
            t.y2[k] = 0.5 * interpolate(vy, a, b, k, kGauss2);
            t.z2[k] = 0.5 * interpolate(de, a, b, k, kGauss2);
        }
    }
    return t;
}

EvolutionRecord propagate(const ControlFields& fields, const NoiseModel& noise) {
    const auto table = step_table(fields);
    check_step_size(fields, noise);
    EvolutionRecord rec;
    rec.grid = fields.grid;
    rec.u.reserve(fields.size());
    rec.u.push_back(Unitary2::Identity());

    const double s = 1.0 + noise.amplitude_error, dz = noise.detuning;
    const double half = 0.5 * table.dt;
    const double cross = 0.28867513459481288225 * table.dt * table.dt;
    Unitary2 u = Unitary2::Identity();
    for (std::size_t k = 0; k < table.steps(); ++k) {
        const Vec3 h1(s * table.x1[k], s * table.y1[k], table.z1[k] + dz);
        const Vec3 h2(s * table.x2[k], s * table.y2[k], table.z2[k] + dz);
        const Vec3 v = half * (h1 + h2) + cross * h2.cross(h1);
        u = su2_exp(v, 1.0) * u;
        rec.u.push_back(u);
    }
    return rec;
}

Unitary2 propagate_final(const ControlFields& fields, const NoiseModel& noise) {
    return propagate_final_batch(fields, std::span<const NoiseModel>(&noise, 1)).front();
}

std::vector<Unitary2> propagate_final_batch(const ControlFields& fields, std::span<const NoiseModel> noise,
                                            kernels::Isa isa) {
    const auto table = step_table(fields);
    std::vector<double> detuning, scale;
    for (const auto& nm : noise) {
        check_step_size(fields, nm);
        detuning.push_back(nm.detuning);
        scale.push_back(1.0 + nm.amplitude_error);
    }
    kernels::LaneStates lanes;
    kernels::su2_batch(table, detuning, scale, lanes, isa);
    std::vector<Unitary2> out;
    out.reserve(noise.size());
    for (std::size_t j = 0; j < noise.size(); ++j)
        out.push_back(from_lane(lanes.a_re[j], lanes.a_im[j], lanes.b_re[j], lanes.b_im[j]));
    return out;
}

Unitary2 su2_exp(const Vec3& h, double duration) {
    const Vec3 v = h * duration;
    const double n = v.norm();
    const double c = std::cos(n);
    const double s = n > 0 ? std::sin(n) / n : 1.0;
    Unitary2 u;
    u(0, 0) = cplx(c, -s * v.z());
    u(1, 1) = cplx(c, s * v.z());
    u(0, 1) = cplx(-s * v.y(), -s * v.x());
    u(1, 0) = cplx(s * v.y(), -s * v.x());
    return u;
}

Unitary2 propagate_segments(std::span<const Segment> segments) {
    Unitary2 u = Unitary2::Identity();
    for (const auto& seg : segments) u = su2_exp(seg.h, seg.duration) * u;
    return u;
}

curvekit::SpaceCurve error_curve(const EvolutionRecord& record, std::span<const std::size_t> breaks) {
    const std::size_t n = record.u.size();
    std::vector<Vec3> tangent(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Unitary2& u = record.u[k];
        // U^dag sz U = x sx + y sy + z sz
        const cplx a = u(0, 0), b = u(1, 0), c = u(0, 1), d = u(1, 1);
        const double z = std::norm(a) - std::norm(b);
        const cplx m01 = std::conj(a) * c - std::conj(b) * d;
        tangent[k] = Vec3(m01.real(), -m01.imag(), z);
        if (std::abs(tangent[k].norm() - 1.0) > 1e-6)
            fail(ErrorKind::Numerical, "tantrix_not_unit", "error-curve tangent lost normalization");
    }
    curvekit::SpaceCurve c;
    c.grid = record.grid;
    c.breaks.assign(breaks.begin(), breaks.end());
    c.points = num::cumulative_integral<Vec3>(tangent, record.grid.spacing, breaks);
    c.tangent = std::move(tangent);
    c.label = "error_curve";
    return c;
}

curvekit::SpaceCurve error_curve(const ControlFields& fields) {
    return error_curve(propagate(fields), fields.break_indices());
}

Vec3 magnus_a1(const ControlFields& fields) { return error_curve(fields).points.back(); }

double gate_fidelity(const Unitary2& ideal, const Unitary2& real) {
    const double norm = (real.adjoint() * real).trace().real();
    return norm / 6.0 + std::norm((ideal.adjoint() * real).trace()) / 6.0;
}

double gate_infidelity(const Unitary2& ideal, const Unitary2& real) {
    const Unitary2 v = ideal.adjoint() * real;
    return (2.0 * (std::norm(v(0, 1)) + std::norm(v(1, 0))) + std::norm(v(0, 0) - v(1, 1))) / 6.0;
}

ControlFields interaction_frame_transform(const ControlFields& fields) {
    fields.validate();
    std::vector<double> left;
    for (const auto& b : fields.breaks) left.push_back(b.delta_before);
    const auto zeta = num::cumulative_integral<double>(fields.delta, fields.grid.spacing, fields.break_indices(), left);
    ControlFields out = fields;
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.phi[k] = fields.phi[k] - zeta[k];
        out.delta[k] = 0.0;
    }
    for (auto& b : out.breaks) {
        b.phi_before -= zeta[b.index];
        b.delta_before = 0.0;
    }
    return out;
}

double mean_abs_amplitude(const ControlFields& fields) {
    std::vector<double> a(fields.size()), left;
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::abs(fields.omega[k]);
    for (const auto& b : fields.breaks) left.push_back(std::abs(b.omega_before));
    const auto F = num::cumulative_integral<double>(a, fields.grid.spacing, fields.break_indices(), left);
    return F.back() / fields.duration();
}

double unitarity_defect(const Unitary2& u) { return (u.adjoint() * u - Unitary2::Identity()).norm(); }

std::vector<double> phase_rate(const ControlFields& fields) {
    std::vector<double> left;
    for (const auto& b : fields.breaks) left.push_back(b.phi_before);
    return num::differentiate<double>(fields.phi, fields.grid.spacing, 1, fields.break_indices(), left);
}

}  // namespace dogforge::qdyn
