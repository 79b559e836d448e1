#include "dogforge/holonomy.hpp"

#include "dogforge/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dogforge::holonomy {

std::vector<std::size_t> BlochPath::break_indices() const {
    std::vector<std::size_t> out;
    for (const auto& b : breaks) out.push_back(b.index);
    return out;
}

namespace {

struct PathRates {
    std::vector<double> dtheta, dphi, dalpha;
    std::vector<double> dtheta_left, dphi_left, dalpha_left;
};

PathRates path_rates(const BlochPath& path) {
    const double h = path.grid.spacing;
    const auto br = path.break_indices();
    std::vector<double> phi_l, alpha_l, theta_l;
    for (const auto& b : path.breaks) {
        phi_l.push_back(b.phi_before);
        alpha_l.push_back(b.alpha_before);
        theta_l.push_back(path.theta[b.index]);
    }
    PathRates r;
    r.dtheta = num::differentiate<double>(path.theta, h, 1, br, theta_l, &r.dtheta_left);
    r.dphi = num::differentiate<double>(path.phi, h, 1, br, phi_l, &r.dphi_left);
    r.dalpha = num::differentiate<double>(path.alpha, h, 1, br, alpha_l, &r.dalpha_left);
    return r;
}

std::vector<unsigned char> near_flag(const BlochPath& path, std::size_t reach) {
    const std::size_t n = path.size();
    std::vector<unsigned char> out(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        if (!path.pole_flag.empty() && path.pole_flag[k]) {
            const std::size_t lo = k >= reach ? k - reach : 0, hi = std::min(n - 1, k + reach);
            for (std::size_t j = lo; j <= hi; ++j) out[j] = 1;
        }
    }
    return out;
}

// Nearest-branch continuation across the samples marked ok; returns indices
// where the continued value departs from the local linear trend by more than
// a quarter turn (an unresolved jump).
std::vector<std::size_t> continue_phase(std::vector<double>& v, const std::vector<unsigned char>& ok) {
    std::vector<std::size_t> jumps;
    std::ptrdiff_t p0 = -1, p1 = -1;
    for (std::size_t q = 0; q < v.size(); ++q) {
        if (!ok[q]) continue;
        if (p1 >= 0) {
            v[q] = v[p1] + num::wrap_pi(v[q] - v[p1]);
            if (p0 >= 0) {
                const double slope = (v[p1] - v[p0]) / static_cast<double>(p1 - p0);
                const double predicted = v[p1] + slope * static_cast<double>(static_cast<std::ptrdiff_t>(q) - p1);
                if (std::abs(v[q] - predicted) > pi / 4) {
                    const std::size_t gap = q - static_cast<std::size_t>(p1);
                    jumps.push_back(gap == 1 ? q : static_cast<std::size_t>(p1) + (gap + 1) / 2);
                    p0 = -1;
                    p1 = static_cast<std::ptrdiff_t>(q);
                    continue;
                }
            }
        }
        p0 = p1;
        p1 = static_cast<std::ptrdiff_t>(q);
    }
    return jumps;
}

// Fills samples that are not ok, piece by piece, and returns the left limits at the breaks.
std::vector<double> fill_pieces(std::vector<double>& v, const std::vector<unsigned char>& ok,
                                const std::vector<std::size_t>& breaks) {
    std::vector<double> before;
    const auto ps = num::pieces(v.size(), breaks);
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        const bool has_break = p + 1 < ps.size();
        // The right piece owns the break sample, so the left piece ends one earlier.
        const std::size_t end = has_break ? b - 1 : b;
        std::vector<double> seg(v.begin() + static_cast<std::ptrdiff_t>(a), v.begin() + static_cast<std::ptrdiff_t>(end) + 1);
        std::vector<unsigned char> bad(seg.size());
        bool any_good = false;
        for (std::size_t i = 0; i < seg.size(); ++i) {
            bad[i] = !ok[a + i];
            any_good = any_good || !bad[i];
        }
        if (!any_good) fail(ErrorKind::Numerical, "pole_run", "no resolvable phase samples between pole passages");
        num::fill_flagged(seg, bad);
        std::copy(seg.begin(), seg.end(), v.begin() + static_cast<std::ptrdiff_t>(a));
        if (has_break) {
            seg.push_back(0.0);
            bad.push_back(1);
            num::fill_flagged(seg, bad);
            before.push_back(seg.back());
        }
    }
    return before;
}

}  // namespace

double parallel_transport_residual(const BlochPath& path) {
    const auto r = path_rates(path);
    const auto near = near_flag(path, 3);
    double worst = 0;
    for (std::size_t k = 1; k + 1 < path.size(); ++k) {
        if (near[k]) continue;
        const double res = r.dalpha[k] + 0.5 * (1 - std::cos(path.theta[k])) * r.dphi[k];
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

bool is_holonomic(const BlochPath& path, double pt_tol) { return parallel_transport_residual(path) < pt_tol; }

bool is_cyclic(const BlochPath& path, double angle_tol) {
    if (path.size() < 2) return false;
    const double t0 = path.theta.front(), t1 = path.theta.back();
    if (std::abs(t1 - t0) >= angle_tol) return false;
    if (t0 < angle_tol || t0 > pi - angle_tol) return true;
    return num::angle_distance(path.phi.back(), path.phi.front()) < angle_tol;
}

qdyn::ControlFields fields_from_path(const BlochPath& path, double pt_tol) {
    const double res = parallel_transport_residual(path);
    if (!(res < pt_tol))
        fail(ErrorKind::Precondition, "pt_violation",
             "path violates parallel transport (residual " + std::to_string(res) + ")");
    const auto r = path_rates(path);
    const std::size_t n = path.size();

    auto eval = [](double th, double ph, double dth, double dph, double& om, double& Ph, double& de) {
        const double sc = std::sin(th) * std::cos(th);
        om = std::sqrt(dth * dth + sc * sc * dph * dph);
        Ph = std::atan2(dth * std::cos(ph) - dph * sc * std::sin(ph), -(dth * std::sin(ph) + dph * sc * std::cos(ph)));
        de = std::sin(th) * std::sin(th) * dph;
    };

    qdyn::ControlFields f;
    f.grid = path.grid;
    f.omega.resize(n);
    f.phi.resize(n);
    f.delta.resize(n);
    std::vector<unsigned char> undefined(n, 0);
    double peak = 0;
    for (std::size_t k = 0; k < n; ++k) {
        eval(path.theta[k], path.phi[k], r.dtheta[k], r.dphi[k], f.omega[k], f.phi[k], f.delta[k]);
        peak = std::max(peak, f.omega[k]);
    }
    for (std::size_t k = 0; k < n; ++k) undefined[k] = f.omega[k] <= 1e-12 * peak;

    // Phase: unwrap within pieces, hold through zero-amplitude samples.
    const auto br = path.break_indices();
    const auto ps = num::pieces(n, br);
    double last = 0;
    bool have_last = false;
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        for (std::size_t k = a; k <= b; ++k) {
            if (k == b && p + 1 < ps.size()) break;  // right piece owns the break sample
            if (undefined[k]) {
                f.phi[k] = have_last ? last : 0.0;
                continue;
            }
            f.phi[k] = have_last ? last + num::wrap_pi(f.phi[k] - last) : f.phi[k];
            last = f.phi[k];
            have_last = true;
        }
        if (p + 1 < ps.size()) {
            const std::size_t bi = b;
            qdyn::FieldBreak fb;
            fb.index = bi;
            double Ph;
            eval(path.theta[bi], path.breaks[p].phi_before, r.dtheta_left[p], r.dphi_left[p], fb.omega_before, Ph,
                 fb.delta_before);
            fb.phi_before = have_last ? last + num::wrap_pi(Ph - last) : Ph;
            last = fb.phi_before;
            have_last = true;
            f.breaks.push_back(fb);
        }
    }
    // Leading undefined samples take the first defined phase.
    std::size_t first = 0;
    while (first < n && undefined[first]) ++first;
    if (first < n)
        for (std::size_t k = 0; k < first; ++k) f.phi[k] = f.phi[first];
    return f;
}

BlochPath bloch_path_from_evolution(const qdyn::EvolutionRecord& record, double pole_eps) {
    const std::size_t n = record.u.size();
    BlochPath path;
    path.grid = record.grid;
    path.theta.resize(n);
    path.phi.resize(n);
    path.alpha.resize(n);
    path.pole_flag.assign(n, 0);
    std::vector<unsigned char> alpha_ok(n), phi_ok(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx a = record.u[k](0, 0), b = record.u[k](1, 0);
        const double ma = std::abs(a), mb = std::abs(b);
        path.theta[k] = 2.0 * std::atan2(mb, ma);
        alpha_ok[k] = ma > pole_eps;
        phi_ok[k] = ma > pole_eps && mb > pole_eps;
        path.alpha[k] = alpha_ok[k] ? std::arg(a) : 0.0;
        path.phi[k] = phi_ok[k] ? std::arg(b) - std::arg(a) : 0.0;
        path.pole_flag[k] = !phi_ok[k];
    }
    if (std::none_of(alpha_ok.begin(), alpha_ok.end(), [](unsigned char c) { return c; }))
        fail(ErrorKind::Numerical, "pole_run", "state never leaves the south pole");

    auto ja = continue_phase(path.alpha, alpha_ok);
    auto jp = std::any_of(phi_ok.begin(), phi_ok.end(), [](unsigned char c) { return c; })
                  ? continue_phase(path.phi, phi_ok)
                  : std::vector<std::size_t>{};
    std::set<std::size_t> all(ja.begin(), ja.end());
    all.insert(jp.begin(), jp.end());
    std::vector<std::size_t> breaks;
    for (std::size_t b : all)
        if (b > 0 && b + 1 < n && (breaks.empty() || b > breaks.back() + 8)) breaks.push_back(b);

    const auto alpha_before = fill_pieces(path.alpha, alpha_ok, breaks);
    std::vector<double> phi_before(breaks.size(), 0.0);
    if (std::any_of(phi_ok.begin(), phi_ok.end(), [](unsigned char c) { return c; }))
        phi_before = fill_pieces(path.phi, phi_ok, breaks);
    for (std::size_t j = 0; j < breaks.size(); ++j)
        path.breaks.push_back(PathBreak{breaks[j], phi_before[j], alpha_before[j]});
    return path;
}

double aa_geometric_phase(const BlochPath& path, double angle_tol) {
    if (!is_cyclic(path, angle_tol)) fail(ErrorKind::Precondition, "non_cyclic", "path is not cyclic");
    const auto ps = num::pieces(path.size(), path.break_indices());
    double beta = 0;
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        const bool has_break = p + 1 < ps.size();
        for (std::size_t k = a; k < b; ++k) {
            const double phi1 = (k + 1 == b && has_break) ? path.breaks[p].phi_before : path.phi[k + 1];
            const double w = 0.5 * ((1 - std::cos(path.theta[k])) + (1 - std::cos(path.theta[k + 1])));
            beta -= 0.5 * w * (phi1 - path.phi[k]);
        }
        if (has_break) {
            const double jump = path.phi[b] - path.breaks[p].phi_before;
            beta -= 0.5 * (1 - std::cos(path.theta[b])) * jump;
        }
    }
    return beta;
}

const char* frame_name(Frame f) { return f == Frame::Lab ? "lab" : "detuning_rotating"; }

std::vector<double> energy_expectation(const qdyn::EvolutionRecord& record, const qdyn::ControlFields& fields) {
    std::vector<double> e(record.u.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        const cplx a = record.u[k](0, 0), b = record.u[k](1, 0);
        e[k] = 0.5 * fields.delta[k] * (std::norm(a) - std::norm(b)) +
               fields.omega[k] * (std::conj(a) * std::polar(1.0, -fields.phi[k]) * b).real();
    }
    return e;
}

PhaseReport dynamical_phase(const qdyn::EvolutionRecord& record, const qdyn::ControlFields& fields, Frame frame) {
    fields.validate();
    if (record.u.size() != fields.size() || !(record.grid == fields.grid))
        fail(ErrorKind::Precondition, "frame_mismatch", "record was not generated on the field grid");
    const std::size_t n = fields.size();
    const double h = fields.grid.spacing;
    const auto br = fields.break_indices();

    std::vector<double> delta_left;
    for (const auto& b : fields.breaks) delta_left.push_back(b.delta_before);
    std::vector<double> zeta(n, 0.0);
    if (frame == Frame::DetuningRotating) zeta = num::cumulative_integral<double>(fields.delta, h, br, delta_left);

    // Energy of the (possibly rotated) state under the frame Hamiltonian.
    auto energy = [&](std::size_t k, double om, double ph, double de) {
        cplx a = record.u[k](0, 0), b = record.u[k](1, 0);
        double dz = de, phase = ph;
        if (frame == Frame::DetuningRotating) {
            a *= std::polar(1.0, 0.5 * zeta[k]);
            b *= std::polar(1.0, -0.5 * zeta[k]);
            dz = 0.0;
            phase = ph - zeta[k];
        }
        return 0.5 * dz * (std::norm(a) - std::norm(b)) + om * (std::conj(a) * std::polar(1.0, -phase) * b).real();
    };
    std::vector<double> e(n), e_left;
    for (std::size_t k = 0; k < n; ++k) e[k] = energy(k, fields.omega[k], fields.phi[k], fields.delta[k]);
    for (const auto& b : fields.breaks) e_left.push_back(energy(b.index, b.omega_before, b.phi_before, b.delta_before));
    const double integral = num::cumulative_integral<double>(e, h, br, e_left).back();

    PhaseReport rep;
    rep.frame = frame;
    rep.dynamical = -integral;
    cplx a_end = record.u.back()(0, 0);
    if (frame == Frame::DetuningRotating) a_end *= std::polar(1.0, 0.5 * zeta.back());
    rep.total = std::arg(a_end);
    rep.geometric = num::wrap_2pi(rep.total - rep.dynamical);
    return rep;
}

RobustnessPhases aa_phase_robustness(const TwoLevelToy& model, double eps) {
    if (!(std::abs(eps) < 0.3)) fail(ErrorKind::Precondition, "eps_range", "perturbation must satisfy |eps| < 0.3");
    if (model.b_sq < 0 || model.b_sq > 1) fail(ErrorKind::Precondition, "bad_amplitude", "b_sq must lie in [0, 1]");
    const double gap = model.e_n - model.e_m;
    if (gap == 0.0) fail(ErrorKind::Precondition, "degenerate_levels", "levels must be non-degenerate");
    const double a_sq = 1.0 - model.b_sq;
    const double en = model.e_n * (1 - eps), em = model.e_m * (1 - eps);
    const double turn = 2 * pi * (en - em) / gap;
    RobustnessPhases out;
    out.total = -2 * pi * en / gap + std::atan2(model.b_sq * std::sin(turn), model.b_sq * std::cos(turn) + a_sq);
    out.dynamical = -2 * pi / gap * (a_sq * en + model.b_sq * em);
    out.geometric = out.total - out.dynamical;
    return out;
}

}  // namespace dogforge::holonomy
