#include "dogforge/dogsynth.hpp"

#include "dogforge/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace dogforge;
using namespace dogforge::dogsynth;

namespace {

const DogDesign& orange() {
    static const auto d = orange_slice_2d(pi / 2);
    return d;
}

const DogDesign& twisted() {
    static const auto d = twisted_3d(pi / 2000);
    return d;
}

curvekit::SpaceCurve yz_circle(double r, std::size_t n, double length) {
    curvekit::SpaceCurve out;
    out.grid = Grid{0.0, length / static_cast<double>(n - 1), n};
    for (std::size_t k = 0; k < n; ++k) {
        const double s = out.grid.at(k);
        out.points.emplace_back(0.0, r - r * std::cos(s / r), r * std::sin(s / r));
    }
    return out;
}

void expect_all_checks_pass(const DogDesign& d) {
    for (const auto& c : check_design(d)) EXPECT_TRUE(c.passed) << c.name << " = " << c.value << " vs " << c.threshold;
}

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "no error";
}

}  // namespace

TEST(Synthesize, CircleGivesConstantResonantDrive) {
    const double r = 2.0;
    const auto d = synthesize(yz_circle(r, 4001, 2 * pi * r));
    for (std::size_t k = 10; k + 10 < d.fields.size(); ++k) {
        EXPECT_NEAR(std::abs(d.fields.omega[k]), 1 / r, 1e-8);
        EXPECT_NEAR(d.fields.delta[k], 0.0, 1e-8);
    }
    // A full turn about a fixed axis: U = -1.
    const auto U = qdyn::propagate_final(d.fields);
    EXPECT_NEAR(U(0, 0).real(), -1.0, 1e-9);
    EXPECT_NEAR(std::abs(U(1, 0)), 0.0, 1e-9);
}

TEST(Synthesize, RejectsOpenCurve) {
    EXPECT_EQ(code_of([] { synthesize(yz_circle(1.0, 1001, pi)); }), "open_curve");
}

TEST(Synthesize, RejectsMismatchedEndTangent) {
    // Closed in position, but the tangent turns from (0,1,1/2) to (0,1,-1/2).
    curvekit::SpaceCurve raw;
    const std::size_t n = 4001;
    raw.grid = Grid{0.0, 2 * pi / (n - 1), n};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = raw.grid.at(k);
        raw.points.emplace_back(0.0, std::sin(t), std::sin(t / 2));
    }
    const auto unit = curvekit::arc_length_reparameterize(raw);
    EXPECT_EQ(code_of([&] { synthesize(unit); }), "tangent_not_zhat");
}

TEST(Synthesize, RejectsNonUnitSpeed) {
    auto c = yz_circle(1.0, 1001, 2 * pi);
    for (auto& p : c.points) p *= 1.5;
    EXPECT_EQ(code_of([&] { synthesize(c); }), "tantrix_not_unit");
}

TEST(OrangeSlice, DesignSatisfiesAllInvariants) {
    const auto& d = orange();
    expect_all_checks_pass(d);
    EXPECT_LT(d.beta_discrepancy, 1e-4);
    // Each half is a planar lobe; the second is turned about z by the phase step.
    const std::size_t half = d.error_curve.size() / 2;
    const auto pl = planarity(std::span<const Vec3>(d.error_curve.points).first(half));
    EXPECT_LT(pl.rms, 1e-9 * pl.size);
    const auto whole = planarity(d.error_curve.points);
    EXPECT_GT(whole.rms, 1e-2 * whole.size);
    // First-order detuning error cancels: the error curve closes.
    EXPECT_LT(qdyn::magnus_a1(d.fields).norm(), 1e-4 * d.error_curve.length());
}

TEST(OrangeSlice, GateDependsOnlyOnOpening) {
    const auto a = orange_slice_2d(0.8);
    const auto b = orange_slice_2d(0.8, 3.0);
    const auto Ua = qdyn::propagate_final(a.fields), Ub = qdyn::propagate_final(b.fields);
    EXPECT_LT(qdyn::gate_infidelity(Ua, Ub), 1e-9);
    EXPECT_NEAR(b.fields.duration() * 3.0, a.fields.duration(), 1e-9);
}

TEST(OrangeSlice, RejectsBadParameters) {
    EXPECT_EQ(code_of([] { orange_slice_2d(4.0); }), "phi0_range");
    EXPECT_EQ(code_of([] { orange_slice_2d(-pi); }), "phi0_range");
    EXPECT_EQ(code_of([] { orange_slice_2d(1.0, -1.0); }), "omega0_range");
}

TEST(ClosingQuadSech, LobeClosesAndAreaIsAHalfTurn) {
    const auto q = closing_quad_sech(true, true);
    EXPECT_LT(std::abs(q.lobe_gap()), 1e-9);
    EXPECT_NEAR(q.area(), pi, 1e-9);
    EXPECT_GT(q.inner_center, 10.3);
    EXPECT_LT(q.inner_center, 10.9);
}

TEST(Twisted, DesignIsThreeDimensionalAndHolonomic) {
    const auto& d = twisted();
    expect_all_checks_pass(d);
    const auto pl = planarity(d.error_curve.points);
    EXPECT_GT(pl.rms, 1e-4 * pl.size);
    EXPECT_LT(d.beta_discrepancy, 1e-3);
}

TEST(Twisted, PathPhaseConvergesToPropagatedPhase) {
    double prev = 1.0;
    for (std::size_t n : {5001u, 10001u, 20001u}) {
        const auto d = twisted_3d(pi / 2000, 1.0, TwistedOptions{n});
        EXPECT_LT(d.beta_discrepancy, prev / 2.5) << n;
        prev = d.beta_discrepancy;
    }
}

TEST(Twisted, ZeroTwistIsPlanar) {
    const auto d = twisted_3d(0.0, 1.0, TwistedOptions{8001});
    const auto pl = planarity(d.error_curve.points);
    EXPECT_LT(pl.rms, 1e-8 * pl.size);
}

TEST(Twisted, RejectsOutOfRangeTwistAndLiteralOffset) {
    EXPECT_EQ(code_of([] { twisted_3d(pi / 100); }), "xi_range");
    EXPECT_EQ(code_of([] { twisted_3d(pi / 2000, 0.0); }), "omega0_range");
    TwistedOptions literal;
    literal.bisector_offset = false;
    EXPECT_EQ(code_of([&] { twisted_3d(pi / 2000, 1.0, literal); }), "singular_detuning");
}

TEST(Rebase, ZeroShiftIsIdentity) {
    const auto& d = orange();
    const auto r = rebase_start_point(d, 0);
    EXPECT_EQ(r.fields.omega, d.fields.omega);
    EXPECT_EQ(r.fields.phi, d.fields.phi);
}

TEST(Rebase, ConjugatesTheGateAndShiftsCurvature) {
    const auto& d = twisted();
    const std::size_t start = (d.fields.size() - 1) / 2;
    const auto r = rebase_start_point(d, start);
    const auto U0 = qdyn::propagate_final(d.fields), U1 = qdyn::propagate_final(r.fields);
    // Conjugate gates share |Tr U|.
    EXPECT_NEAR(std::abs(U0.trace()), std::abs(U1.trace()), 1e-6);
    const std::size_t period = d.fields.size() - 1;
    for (std::size_t j = 100; j + 100 < r.fields.size(); j += 97) {
        const std::size_t k = (start + j) % period;
        EXPECT_NEAR(std::abs(r.fields.omega[j]), std::abs(d.fields.omega[k]), 1e-6) << j;
    }
    const auto rep = curvekit::closure_report(r.error_curve);
    EXPECT_TRUE(curvekit::is_closed(rep, r.error_curve.length()));
}

TEST(Rebase, GenericStartPointCanMakeDetuningSingular) {
    // The z' = 0 set moves with the new start tangent; off the symmetric points
    // the drive rate no longer vanishes there.
    EXPECT_EQ(code_of([] { rebase_start_point(twisted(), 3000); }), "singular_detuning");
}

TEST(Rebase, RequireZeroAmplitudeRejectsDrivenStart) {
    const auto& d = orange();
    std::size_t peak = 0;
    for (std::size_t k = 0; k < d.fields.size(); ++k)
        if (std::abs(d.fields.omega[k]) > std::abs(d.fields.omega[peak])) peak = k;
    RebaseOptions opt;
    opt.require_zero_amplitude = true;
    EXPECT_EQ(code_of([&] { rebase_start_point(d, peak, opt); }), "nonzero_start_amplitude");
    EXPECT_EQ(code_of([&] { rebase_start_point(d, d.fields.size()); }), "bad_start");
}

TEST(StandardOrangeSlice, SquareIsOpenAndFailsClosure) {
    const auto d = standard_orange_slice_design(pi / 2, "square", 1.0, 8001);
    bool closure_ok = true;
    for (const auto& c : check_design(d))
        if (c.name == "closure_endpoint") closure_ok = c.passed;
    EXPECT_FALSE(closure_ok);
    // Gap of two unit-rate pi-pulse semicircles with opening pi/2.
    EXPECT_NEAR(qdyn::magnus_a1(d.fields).norm(), 4 * std::sin(pi / 4), 1e-6);
    EXPECT_EQ(code_of([] { standard_orange_slice_fields(1.0, "gauss"); }), "bad_shape");
}

TEST(PhaseVsTwist, BranchIsContinuousAndMatchesPropagation) {
    // Steps small enough that the phase moves well under pi between neighbours.
    const std::vector<double> xis = {0.0, pi / 40000, pi / 20000, 3 * pi / 40000};
    TwistedOptions opt;
    opt.grid_points = 20001;
    const auto pts = phase_vs_twist(xis, 1.0, opt);
    ASSERT_EQ(pts.size(), xis.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(pts[i].xi, xis[i]);
        EXPECT_LT(std::abs(pts[i].beta_g - pts[i].beta_g_propagated), 1e-3);
        if (i > 0) EXPECT_LT(std::abs(pts[i].beta_g - pts[i - 1].beta_g), pi / 2);
    }
    // Roughly linear in the twist over this range.
    const double s1 = pts[1].beta_g - pts[0].beta_g, s3 = pts[3].beta_g - pts[2].beta_g;
    EXPECT_LT(std::abs(s3 - s1), 0.5 * std::abs(s1));
}

TEST(Families, NamesRoundTrip) {
    for (auto f : {Family::OrangeSlice2D, Family::Twisted3D, Family::Custom, Family::StandardOrangeSlice})
        EXPECT_EQ(family_from_name(family_name(f)), f);
    EXPECT_THROW(family_from_name("spiral"), Error);
}

TEST(RotationAngle, MatchesExponent) {
    EXPECT_NEAR(rotation_angle(qdyn::su2_exp(Vec3(0, 0.5, 0), 1.2)), 1.2, 1e-12);
    EXPECT_NEAR(rotation_angle(Unitary2::Identity()), 0.0, 1e-12);
}
