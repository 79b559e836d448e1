#pragma once

// Hot loops with a scalar reference and an AVX2 variant chosen at runtime.
// Set DOGFORGE_ISA=scalar to force the reference path.

#include <cstddef>
#include <span>
#include <vector>

namespace dogforge::kernels {

enum class Isa { Scalar, Avx2 };

bool avx2_available();
Isa active_isa();
const char* isa_name(Isa isa);

// Noise-free Gauss-point generators of every propagation step, stored as the
// Pauli vector h of H = h.sigma at c = 1/2 -+ sqrt(3)/6 within the step.
struct StepTable {
    double dt = 0.0;
    std::vector<double> x1, y1, z1, x2, y2, z2;
    std::size_t steps() const { return x1.size(); }
};

// Propagates one SU(2) state per lane, U = [[a, -conj(b)], [b, conj(a)]],
// starting from the identity. Lane j scales the transverse generator by
// scale[j] and adds detuning[j] to the z component.
struct LaneStates {
    std::vector<double> a_re, a_im, b_re, b_im;
};

void su2_batch_scalar(const StepTable& table, std::span<const double> detuning,
                      std::span<const double> scale, LaneStates& out);
void su2_batch_avx2(const StepTable& table, std::span<const double> detuning,
                    std::span<const double> scale, LaneStates& out);
void su2_batch(const StepTable& table, std::span<const double> detuning,
               std::span<const double> scale, LaneStates& out, Isa isa = active_isa());

// out[i] = sum_j w[j] * in[i + j] for i in [0, count). `in` must hold
// count + w.size() - 1 values.
void stencil_scalar(const double* in, double* out, std::size_t count, std::span<const double> w);
void stencil_avx2(const double* in, double* out, std::size_t count, std::span<const double> w);
void stencil(const double* in, double* out, std::size_t count, std::span<const double> w,
             Isa isa = active_isa());

}  // namespace dogforge::kernels
