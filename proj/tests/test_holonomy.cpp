#include "dogforge/holonomy.hpp"

#include "dogforge/dogsynth.hpp"
#include "dogforge/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dogforge;
using namespace dogforge::holonomy;

namespace {

const dogsynth::DogDesign& orange_design() {
    static const auto d = dogsynth::orange_slice_2d(pi / 2);
    return d;
}

}  // namespace

TEST(BlochPath, StandardOrangeSliceIsHolonomicAndCyclic) {
    const auto f = dogsynth::standard_orange_slice_fields(pi / 3, "square", 1.0, 8001);
    const auto rec = qdyn::propagate(f);
    const auto path = bloch_path_from_evolution(rec);
    EXPECT_NEAR(path.theta.front(), 0.0, 1e-12);
    EXPECT_TRUE(is_cyclic(path));
    EXPECT_TRUE(is_holonomic(path));
    // No dynamical phase: the geometric phase is the phase of the |0> amplitude.
    const double gamma = aa_geometric_phase(path);
    EXPECT_LT(num::angle_distance(gamma, std::arg(rec.u.back()(0, 0))), 1e-6);
    // The return meridian lies at azimuth offset phi0 + pi, so the lune opening
    // is pi - phi0 and the phase is half its solid angle.
    EXPECT_NEAR(std::abs(num::wrap_pi(gamma)), pi - pi / 3, 1e-6);
}

TEST(BlochPath, GeometricPhaseOfLuneScalesWithOpening) {
    for (double phi0 : {0.2, 0.9, 1.7}) {
        const auto f = dogsynth::standard_orange_slice_fields(phi0, "square", 1.0, 4001);
        const auto path = bloch_path_from_evolution(qdyn::propagate(f));
        EXPECT_NEAR(std::abs(num::wrap_pi(aa_geometric_phase(path))), pi - phi0, 1e-6) << phi0;
    }
}

TEST(BlochPath, NonCyclicPathIsRejected) {
    // A half pi pulse ends on the equator.
    qdyn::ControlFields f;
    f.grid = Grid{0, pi / 2 / 400, 401};
    f.omega.assign(401, 1.0);
    f.phi.assign(401, 0.0);
    f.delta.assign(401, 0.0);
    const auto path = bloch_path_from_evolution(qdyn::propagate(f));
    EXPECT_FALSE(is_cyclic(path));
    try {
        aa_geometric_phase(path);
        FAIL() << "expected non_cyclic";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "non_cyclic");
    }
}

TEST(FieldsFromPath, DrivesAnalyticTransportedPath) {
    // theta rises from the pole, phi turns steadily, alpha obeys parallel transport.
    const std::size_t n = 6001;
    const double T = 6.0;
    BlochPath path;
    path.grid = Grid{0, T / (n - 1), n};
    std::vector<double> rate(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = path.grid.at(k), s = std::sin(pi * t / (2 * T));
        path.theta.push_back(1.2 * s * s);
        path.phi.push_back(0.4 + 0.8 * t - 0.05 * t * t);
        rate[k] = -0.5 * (1 - std::cos(path.theta[k])) * (0.8 - 0.1 * t);
    }
    path.alpha = num::cumulative_integral<double>(rate, path.grid.spacing);
    path.pole_flag.assign(n, 0);
    path.pole_flag[0] = 1;
    EXPECT_LT(parallel_transport_residual(path), 1e-8);

    const auto f = fields_from_path(path);
    for (double om : f.omega) EXPECT_GE(om, 0.0);
    const auto rec = qdyn::propagate(f);
    const auto back = bloch_path_from_evolution(rec);
    for (std::size_t k = 0; k < n; k += 50) {
        EXPECT_NEAR(back.theta[k], path.theta[k], 1e-7);
        if (k >= 200) {
            EXPECT_LT(num::angle_distance(back.phi[k], path.phi[k]), 1e-6) << k;
            EXPECT_LT(num::angle_distance(back.alpha[k], path.alpha[k]), 1e-7) << k;
        }
    }
    EXPECT_TRUE(is_holonomic(back));
}

TEST(FieldsFromPath, RejectsPathViolatingParallelTransport) {
    auto path = orange_design().path;
    for (std::size_t k = 0; k < path.size(); ++k) path.alpha[k] += 0.05 * path.grid.at(k);
    EXPECT_GT(parallel_transport_residual(path), 1e-2);
    try {
        fields_from_path(path);
        FAIL() << "expected pt_violation";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "pt_violation");
    }
}

TEST(DynamicalPhase, HolonomicDesignHasNoDynamicalPhase) {
    const auto& d = orange_design();
    const auto rec = qdyn::propagate(d.fields);
    const auto rep = dynamical_phase(rec, d.fields, Frame::Lab);
    EXPECT_NEAR(rep.dynamical, 0.0, 1e-6);
    EXPECT_LT(num::angle_distance(rep.geometric, rep.total), 1e-6);
    const auto e = energy_expectation(rec, d.fields);
    for (double v : e) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(DynamicalPhase, ConstantDetuningGivesExpectedShift) {
    // H = (delta/2) sz on |0>: total = dynamical = -delta T / 2, geometric 0.
    qdyn::ControlFields f;
    f.grid = Grid{0, 0.01, 301};
    f.omega.assign(301, 0.0);
    f.phi.assign(301, 0.0);
    f.delta.assign(301, 0.4);
    const auto rec = qdyn::propagate(f);
    const auto lab = dynamical_phase(rec, f, Frame::Lab);
    EXPECT_NEAR(lab.dynamical, -0.6, 1e-12);
    EXPECT_NEAR(lab.total, -0.6, 1e-12);
    EXPECT_NEAR(lab.geometric, 0.0, 1e-12);
    const auto rot = dynamical_phase(rec, f, Frame::DetuningRotating);
    EXPECT_NEAR(rot.total, 0.0, 1e-12);
    EXPECT_STREQ(frame_name(Frame::Lab), "lab");
}

TEST(DynamicalPhase, RejectsMismatchedGrid) {
    const auto& d = orange_design();
    auto rec = qdyn::propagate(d.fields);
    rec.u.pop_back();
    EXPECT_THROW(dynamical_phase(rec, d.fields, Frame::Lab), Error);
}

TEST(Robustness, GeometricPhaseIsQuadraticWhileDynamicalIsLinear) {
    const TwoLevelToy toy{1.0, 0.0, 0.3};
    const auto ref = aa_phase_robustness(toy, 0.0);
    const auto a = aa_phase_robustness(toy, 1e-3), b = aa_phase_robustness(toy, 2e-3);
    const double g1 = std::abs(a.geometric - ref.geometric), g2 = std::abs(b.geometric - ref.geometric);
    const double d1 = std::abs(a.dynamical - ref.dynamical), d2 = std::abs(b.dynamical - ref.dynamical);
    EXPECT_NEAR(d2 / d1, 2.0, 1e-9);
    EXPECT_GT(g2 / g1, 3.5);
    EXPECT_NEAR(a.total, a.geometric + a.dynamical, 1e-14);
}

TEST(Robustness, Preconditions) {
    EXPECT_THROW(aa_phase_robustness(TwoLevelToy{}, 0.5), Error);
    EXPECT_THROW(aa_phase_robustness(TwoLevelToy{1, 0, 1.5}, 0.1), Error);
    EXPECT_THROW(aa_phase_robustness(TwoLevelToy{1, 1, 0.5}, 0.1), Error);
}
