#include "dogforge/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace dogforge::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Isa active_isa() {
    static const Isa isa = [] {
        if (const char* env = std::getenv("DOGFORGE_ISA"); env && std::string_view(env) == "scalar")
            return Isa::Scalar;
        return avx2_available() ? Isa::Avx2 : Isa::Scalar;
    }();
    return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void su2_batch(const StepTable& table, std::span<const double> detuning, std::span<const double> scale,
               LaneStates& out, Isa isa) {
    if (isa == Isa::Avx2 && avx2_available())
        su2_batch_avx2(table, detuning, scale, out);
    else
        su2_batch_scalar(table, detuning, scale, out);
}

void stencil(const double* in, double* out, std::size_t count, std::span<const double> w, Isa isa) {
    if (isa == Isa::Avx2 && avx2_available())
        stencil_avx2(in, out, count, w);
    else
        stencil_scalar(in, out, count, w);
}

}  // namespace dogforge::kernels
