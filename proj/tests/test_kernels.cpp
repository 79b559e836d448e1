#include "dogforge/kernels.hpp"

#include "dogforge/common.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dogforge;
using namespace dogforge::kernels;

namespace {

// Independent oracle: exp(-i v.sigma) = cos|v| - i sin|v| (v/|v|).sigma, as 2x2 matrices.
Unitary2 expm_pauli(const Vec3& v) {
    const double n = v.norm();
    Unitary2 sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, cplx(0, -1), cplx(0, 1), 0;
    sz << 1, 0, 0, -1;
    const Unitary2 gen = v.x() * sx + v.y() * sy + v.z() * sz;
    if (n == 0) return Unitary2::Identity();
    return std::cos(n) * Unitary2::Identity() - cplx(0, 1) * (std::sin(n) / n) * gen;
}

StepTable random_table(std::mt19937_64& rng, std::size_t steps, double amp, double dt) {
    std::uniform_real_distribution<double> u(-amp, amp);
    StepTable t;
    t.dt = dt;
    for (auto* v : {&t.x1, &t.y1, &t.z1, &t.x2, &t.y2, &t.z2}) {
        v->resize(steps);
        for (auto& x : *v) x = u(rng);
    }
    return t;
}

Unitary2 oracle(const StepTable& t, double det, double scale) {
    Unitary2 u = Unitary2::Identity();
    const double c = std::sqrt(3.0) / 6.0 * t.dt * t.dt;
    for (std::size_t k = 0; k < t.steps(); ++k) {
        const Vec3 h1(scale * t.x1[k], scale * t.y1[k], t.z1[k] + det);
        const Vec3 h2(scale * t.x2[k], scale * t.y2[k], t.z2[k] + det);
        u = expm_pauli(0.5 * t.dt * (h1 + h2) + c * h2.cross(h1)) * u;
    }
    return u;
}

}  // namespace

TEST(Stencil, AvxMatchesScalarForAllTailLengths) {
    if (!avx2_available()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (std::size_t width : {5u, 7u, 8u}) {
        std::vector<double> w(width);
        for (auto& x : w) x = g(rng);
        for (std::size_t count = 0; count < 40; ++count) {
            std::vector<double> in(count + width - 1), a(count), b(count);
            for (auto& x : in) x = g(rng);
            stencil_scalar(in.data(), a.data(), count, w);
            stencil_avx2(in.data(), b.data(), count, w);
            for (std::size_t i = 0; i < count; ++i) EXPECT_NEAR(a[i], b[i], 1e-14 * (1 + std::abs(a[i])));
        }
    }
}

TEST(Stencil, ScalarIsDotProduct) {
    std::vector<double> in = {1, 2, 3, 4, 5, 6}, w = {1, -2, 1}, out(4);
    stencil_scalar(in.data(), out.data(), 4, w);
    for (double v : out) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Su2Batch, ScalarMatchesMatrixExponentialOracle) {
    std::mt19937_64 rng(5);
    const auto t = random_table(rng, 300, 1.0, 0.05);
    std::vector<double> det = {0.0, 0.1, -0.3}, scale = {1.0, 0.9, 1.2};
    LaneStates out;
    su2_batch_scalar(t, det, scale, out);
    for (std::size_t j = 0; j < det.size(); ++j) {
        const Unitary2 u = oracle(t, det[j], scale[j]);
        EXPECT_NEAR(out.a_re[j], u(0, 0).real(), 1e-12);
        EXPECT_NEAR(out.a_im[j], u(0, 0).imag(), 1e-12);
        EXPECT_NEAR(out.b_re[j], u(1, 0).real(), 1e-12);
        EXPECT_NEAR(out.b_im[j], u(1, 0).imag(), 1e-12);
    }
}

TEST(Su2Batch, AvxMatchesScalarAcrossLaneCountsAndLargeSteps) {
    if (!avx2_available()) GTEST_SKIP() << "AVX2 not available";
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    // Amplitude 12 with dt 0.05 pushes some steps beyond the series range.
    for (double amp : {1.0, 12.0}) {
        const auto t = random_table(rng, 500, amp, 0.05);
        for (std::size_t lanes = 1; lanes <= 19; ++lanes) {
            std::vector<double> det(lanes), scale(lanes);
            for (std::size_t j = 0; j < lanes; ++j) det[j] = u(rng), scale[j] = 1 + 0.2 * u(rng);
            LaneStates a, b;
            su2_batch_scalar(t, det, scale, a);
            su2_batch_avx2(t, det, scale, b);
            for (std::size_t j = 0; j < lanes; ++j) {
                EXPECT_NEAR(a.a_re[j], b.a_re[j], 1e-12);
                EXPECT_NEAR(a.a_im[j], b.a_im[j], 1e-12);
                EXPECT_NEAR(a.b_re[j], b.b_re[j], 1e-12);
                EXPECT_NEAR(a.b_im[j], b.b_im[j], 1e-12);
                const double norm = b.a_re[j] * b.a_re[j] + b.a_im[j] * b.a_im[j] + b.b_re[j] * b.b_re[j] +
                                    b.b_im[j] * b.b_im[j];
                EXPECT_NEAR(norm, 1.0, 1e-12);
            }
        }
    }
}

TEST(Dispatch, ReportsConsistentIsa) {
    const Isa isa = active_isa();
    if (!avx2_available()) EXPECT_EQ(isa, Isa::Scalar);
    EXPECT_STREQ(isa_name(Isa::Scalar), "scalar");
    EXPECT_STREQ(isa_name(Isa::Avx2), "avx2");
}
