#include "dogforge/kernels.hpp"

#include <cmath>

namespace dogforge::kernels {

namespace {
constexpr double kCross = 0.28867513459481288225;  // sqrt(3)/6
}

void su2_batch_scalar(const StepTable& table, std::span<const double> detuning,
                      std::span<const double> scale, LaneStates& out) {
    const std::size_t lanes = detuning.size();
    out.a_re.assign(lanes, 1.0);
    out.a_im.assign(lanes, 0.0);
    out.b_re.assign(lanes, 0.0);
    out.b_im.assign(lanes, 0.0);
    const double half = 0.5 * table.dt;
    const double cross = kCross * table.dt * table.dt;

    for (std::size_t j = 0; j < lanes; ++j) {
        const double s = scale[j], dz = detuning[j];
        double ar = 1, ai = 0, br = 0, bi = 0;
        for (std::size_t k = 0; k < table.steps(); ++k) {
            const double x1 = s * table.x1[k], y1 = s * table.y1[k], z1 = table.z1[k] + dz;
            const double x2 = s * table.x2[k], y2 = s * table.y2[k], z2 = table.z2[k] + dz;
            // v = dt/2 (h1 + h2) + sqrt(3)/6 dt^2 (h2 x h1)
            const double vx = half * (x1 + x2) + cross * (y2 * z1 - z2 * y1);
            const double vy = half * (y1 + y2) + cross * (z2 * x1 - x2 * z1);
            const double vz = half * (z1 + z2) + cross * (x2 * y1 - y2 * x1);
            const double norm = std::sqrt(vx * vx + vy * vy + vz * vz);
            const double c = std::cos(norm);
            const double sn = norm > 0 ? std::sin(norm) / norm : 1.0;
            // step matrix [[p, -conj(q)], [q, conj(p)]]: p = c - i sn vz, q = sn vy - i sn vx
            const double pr = c, pi_ = -sn * vz, qr = sn * vy, qi = -sn * vx;
            const double nar = pr * ar - pi_ * ai - (qr * br + qi * bi);
            const double nai = pr * ai + pi_ * ar - (qr * bi - qi * br);
            const double nbr = qr * ar - qi * ai + (pr * br + pi_ * bi);
            const double nbi = qr * ai + qi * ar + (pr * bi - pi_ * br);
            ar = nar;
            ai = nai;
            br = nbr;
            bi = nbi;
        }
        out.a_re[j] = ar;
        out.a_im[j] = ai;
        out.b_re[j] = br;
        out.b_im[j] = bi;
    }
}

void stencil_scalar(const double* in, double* out, std::size_t count, std::span<const double> w) {
    for (std::size_t i = 0; i < count; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * in[i + j];
        out[i] = acc;
    }
}

}  // namespace dogforge::kernels
