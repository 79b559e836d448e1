#include "dogforge/qdyn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dogforge;
using namespace dogforge::qdyn;

namespace {

ControlFields constant_fields(double omega, double phi, double delta, double duration, std::size_t n) {
    ControlFields f;
    f.grid = Grid{0.0, duration / static_cast<double>(n - 1), n};
    f.omega.assign(n, omega);
    f.phi.assign(n, phi);
    f.delta.assign(n, delta);
    return f;
}

// Smooth, non-trivial fields used by several tests.
ControlFields wiggly_fields(std::size_t n) {
    ControlFields f;
    const double T = 6.0;
    f.grid = Grid{0.0, T / static_cast<double>(n - 1), n};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = f.grid.at(k);
        f.omega.push_back(1.0 + 0.5 * std::sin(t));
        f.phi.push_back(0.3 * t * t - 0.2 * t);
        f.delta.push_back(0.4 * std::cos(2 * t));
    }
    return f;
}

double max_abs_diff(const Unitary2& a, const Unitary2& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Su2Exp, MatchesMatrixExponential) {
    const Vec3 h(0.3, -0.7, 1.1);
    Unitary2 gen;
    gen << cplx(h.z(), 0), cplx(h.x(), -h.y()), cplx(h.x(), h.y()), cplx(-h.z(), 0);
    // Power series of exp(-i H t) with enough terms for |Ht| ~ 2.
    const double t = 1.4;
    Unitary2 term = Unitary2::Identity(), sum = Unitary2::Identity();
    for (int k = 1; k < 40; ++k) {
        term = term * (cplx(0, -t) * gen) / static_cast<double>(k);
        sum += term;
    }
    EXPECT_LT(max_abs_diff(su2_exp(h, t), sum), 1e-13);
}

TEST(Propagate, ConstantFieldsMatchClosedForm) {
    const auto f = constant_fields(1.3, 0.4, -0.6, 5.0, 501);
    const auto exact = su2_exp(pauli_vector(1.3, 0.4, -0.6), 5.0);
    EXPECT_LT(max_abs_diff(propagate_final(f), exact), 1e-13);
    const auto rec = propagate(f);
    EXPECT_LT(max_abs_diff(rec.u.back(), exact), 1e-13);
    NoiseModel nm{0.05, -0.02};
    EXPECT_LT(max_abs_diff(propagate_final(f, nm), su2_exp(pauli_vector(1.3, 0.4, -0.6, nm), 5.0)), 1e-13);
}

TEST(Propagate, FourthOrderConvergenceAndUnitarity) {
    const auto ref = propagate_final(wiggly_fields(16001));
    const double e1 = max_abs_diff(propagate_final(wiggly_fields(201)), ref);
    const double e2 = max_abs_diff(propagate_final(wiggly_fields(401)), ref);
    EXPECT_GT(e1 / e2, 12.0);
    EXPECT_LT(e2, 1e-7);
    const auto rec = propagate(wiggly_fields(401));
    for (const auto& u : rec.u) EXPECT_LT(unitarity_defect(u), 1e-13);
}

TEST(Propagate, BatchMatchesSingleForEveryIsa) {
    const auto f = wiggly_fields(1001);
    std::vector<NoiseModel> noise;
    for (int i = 0; i < 13; ++i) noise.push_back({0.01 * i - 0.05, 0.003 * i});
    for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
        const auto batch = propagate_final_batch(f, noise, isa);
        ASSERT_EQ(batch.size(), noise.size());
        for (std::size_t j = 0; j < noise.size(); ++j) {
            const auto rec = propagate(f, noise[j]);
            EXPECT_LT(max_abs_diff(batch[j], rec.u.back()), 1e-12);
        }
    }
}

TEST(Propagate, BreaksUseLeftLimits) {
    // A drive phase step of pi/2 halfway: x rotation then y rotation.
    const std::size_t n = 201, mid = 100;
    auto f = constant_fields(1.0, 0.0, 0.0, pi, n);
    for (std::size_t k = mid; k < n; ++k) f.phi[k] = pi / 2;
    f.breaks.push_back(FieldBreak{mid, 1.0, 0.0, 0.0});
    const auto half = f.grid.at(mid);
    const Segment segs[] = {{pauli_vector(1, 0, 0), half}, {pauli_vector(1, pi / 2, 0), pi - half}};
    EXPECT_LT(max_abs_diff(propagate_final(f), propagate_segments(segs)), 1e-13);
}

TEST(Propagate, RejectsCoarseGridAndBadInput) {
    const auto f = constant_fields(100.0, 0.0, 0.0, 10.0, 11);
    try {
        propagate_final(f);
        FAIL() << "expected step_size";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "step_size");
        EXPECT_EQ(e.kind(), ErrorKind::Precondition);
    }
    auto g = constant_fields(1.0, 0.0, 0.0, 1.0, 11);
    g.delta.pop_back();
    EXPECT_THROW(propagate_final(g), Error);
    auto h = constant_fields(1.0, 0.0, 0.0, 1.0, 11);
    h.phi[3] = std::nan("");
    EXPECT_THROW(propagate_final(h), Error);
}

TEST(ErrorCurve, SquarePulseTracesACircle) {
    const double om = 2.0;
    const auto f = constant_fields(om, 0.0, 0.0, pi, 2001);
    const auto c = error_curve(f);
    for (std::size_t k = 0; k < c.size(); ++k) {
        const Vec3& p = c.points[k];
        EXPECT_NEAR(p.x(), 0.0, 1e-12);
        // (|y| - 1/om)^2 + z^2 = 1/om^2
        EXPECT_NEAR(std::hypot(std::abs(p.y()) - 1 / om, p.z()), 1 / om, 1e-10);
        EXPECT_NEAR(c.tangent[k].norm(), 1.0, 1e-12);
    }
    // A full 2pi rotation closes the curve: the first-order detuning error vanishes.
    EXPECT_LT(magnus_a1(f).norm(), 1e-10);
}

TEST(ErrorCurve, EndpointPredictsDetuningInfidelity) {
    // 1 - F ~ (2/3) |a1|^2 dz^2 for small quasistatic detuning.
    const auto f = wiggly_fields(4001);
    const double a1 = magnus_a1(f).norm();
    const auto ideal = propagate_final(f);
    const double dz = 1e-4;
    const double inf = gate_infidelity(ideal, propagate_final(f, NoiseModel{dz, 0.0}));
    EXPECT_NEAR(inf / (dz * dz), 2.0 / 3.0 * a1 * a1, 1e-3 * a1 * a1);
}

TEST(Fidelity, InfidelityAgreesAndIsStable) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    for (int i = 0; i < 100; ++i) {
        const auto a = su2_exp(Vec3(g(rng), g(rng), g(rng)), 1.0);
        const auto b = su2_exp(Vec3(g(rng), g(rng), g(rng)), 1.0);
        const double F = gate_fidelity(a, b);
        EXPECT_GE(F, 1.0 / 3.0 - 1e-12);
        EXPECT_LE(F, 1.0 + 1e-12);
        EXPECT_NEAR(F, 1 - gate_infidelity(a, b), 1e-12);
        EXPECT_NEAR(gate_fidelity(a, a * su2_exp(Vec3(0, 0, 1), 0.0)), 1.0, 1e-14);
    }
    // Tiny rotations keep relative precision.
    const auto u = su2_exp(Vec3(0.3, 0.1, 0.2), 1.0);
    const double th = 1e-9;
    const double inf = gate_infidelity(u, u * su2_exp(Vec3(1, 0, 0), th));
    EXPECT_NEAR(inf / (th * th), 2.0 / 3.0, 1e-6);
}

TEST(Fidelity, GlobalPhaseIsIgnored) {
    const auto u = su2_exp(Vec3(0.2, 0.4, 0.6), 1.0);
    EXPECT_NEAR(gate_infidelity(u, -u), 0.0, 1e-15);
}

TEST(InteractionFrame, RemovesDetuningAndPreservesPopulations) {
    const auto f = wiggly_fields(4001);
    const auto g = interaction_frame_transform(f);
    for (double d : g.delta) EXPECT_EQ(d, 0.0);
    const auto ul = propagate_final(f), ur = propagate_final(g);
    // The frames differ by a z rotation applied on the left.
    EXPECT_NEAR(std::abs(ul(0, 0)), std::abs(ur(0, 0)), 1e-9);
    EXPECT_NEAR(std::abs(ul(1, 0)), std::abs(ur(1, 0)), 1e-9);
    const double zeta = std::arg(ur(0, 0)) - std::arg(ul(0, 0));
    const auto rotated = su2_exp(Vec3(0, 0, 0.5), -2 * zeta) * ul;
    EXPECT_LT(gate_infidelity(ur, rotated), 1e-12);
}

TEST(PhaseRate, DifferentiatesDrivePhase) {
    const auto f = wiggly_fields(2001);
    const auto r = phase_rate(f);
    for (std::size_t k = 0; k < f.size(); ++k) EXPECT_NEAR(r[k], 0.6 * f.grid.at(k) - 0.2, 1e-9);
}

TEST(MeanAmplitude, AveragesMagnitude) {
    auto f = constant_fields(-2.0, 0.0, 0.0, 3.0, 301);
    EXPECT_NEAR(mean_abs_amplitude(f), 2.0, 1e-13);
}
