// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "dogforge/kernels.hpp"

#include <immintrin.h>

#include <array>
#include <cmath>

namespace dogforge::kernels {

namespace {

constexpr double kCross = 0.28867513459481288225;  // sqrt(3)/6
constexpr int kTerms = 11;

// Taylor coefficients in u = x^2 for cos(x) and sin(x)/x; exact to double
// precision for x^2 <= 0.25.
struct SeriesTable {
    std::array<double, kTerms> cos_c{}, sinc_c{};
    constexpr SeriesTable() {
        double fact = 1.0;  // (2k)!
        for (int k = 0; k < kTerms; ++k) {
            if (k > 0) fact *= (2.0 * k - 1.0) * (2.0 * k);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            cos_c[k] = sign / fact;
            sinc_c[k] = sign / (fact * (2.0 * k + 1.0));
        }
    }
};
constexpr SeriesTable kSeries{};
constexpr double kSeriesLimit = 0.25;

inline __m256d horner(const std::array<double, kTerms>& c, __m256d u) {
    __m256d acc = _mm256_set1_pd(c[kTerms - 1]);
    for (int k = kTerms - 2; k >= 0; --k) acc = _mm256_fmadd_pd(acc, u, _mm256_set1_pd(c[k]));
    return acc;
}

}  // namespace

void su2_batch_avx2(const StepTable& table, std::span<const double> detuning,
                    std::span<const double> scale, LaneStates& out) {
    const std::size_t lanes = detuning.size();
    const std::size_t packed = lanes - lanes % 4;
    // Tail lanes go through the reference path.
    if (packed < lanes) {
        LaneStates tail;
        su2_batch_scalar(table, detuning.subspan(packed), scale.subspan(packed), tail);
        out.a_re.resize(lanes);
        out.a_im.resize(lanes);
        out.b_re.resize(lanes);
        out.b_im.resize(lanes);
        for (std::size_t j = packed; j < lanes; ++j) {
            out.a_re[j] = tail.a_re[j - packed];
            out.a_im[j] = tail.a_im[j - packed];
            out.b_re[j] = tail.b_re[j - packed];
            out.b_im[j] = tail.b_im[j - packed];
        }
    } else {
        out.a_re.resize(lanes);
        out.a_im.resize(lanes);
        out.b_re.resize(lanes);
        out.b_im.resize(lanes);
    }

    const __m256d half = _mm256_set1_pd(0.5 * table.dt);
    const __m256d cross = _mm256_set1_pd(kCross * table.dt * table.dt);
    const __m256d limit = _mm256_set1_pd(kSeriesLimit);

    for (std::size_t j = 0; j < packed; j += 4) {
        const __m256d s = _mm256_loadu_pd(scale.data() + j);
        const __m256d dz = _mm256_loadu_pd(detuning.data() + j);
        __m256d ar = _mm256_set1_pd(1.0), ai = _mm256_setzero_pd();
        __m256d br = _mm256_setzero_pd(), bi = _mm256_setzero_pd();

        for (std::size_t k = 0; k < table.steps(); ++k) {
            const __m256d x1 = _mm256_mul_pd(s, _mm256_set1_pd(table.x1[k]));
            const __m256d y1 = _mm256_mul_pd(s, _mm256_set1_pd(table.y1[k]));
            const __m256d z1 = _mm256_add_pd(_mm256_set1_pd(table.z1[k]), dz);
            const __m256d x2 = _mm256_mul_pd(s, _mm256_set1_pd(table.x2[k]));
            const __m256d y2 = _mm256_mul_pd(s, _mm256_set1_pd(table.y2[k]));
            const __m256d z2 = _mm256_add_pd(_mm256_set1_pd(table.z2[k]), dz);

            const __m256d cx = _mm256_fmsub_pd(y2, z1, _mm256_mul_pd(z2, y1));
            const __m256d cy = _mm256_fmsub_pd(z2, x1, _mm256_mul_pd(x2, z1));
            const __m256d cz = _mm256_fmsub_pd(x2, y1, _mm256_mul_pd(y2, x1));
            const __m256d vx = _mm256_fmadd_pd(half, _mm256_add_pd(x1, x2), _mm256_mul_pd(cross, cx));
            const __m256d vy = _mm256_fmadd_pd(half, _mm256_add_pd(y1, y2), _mm256_mul_pd(cross, cy));
            const __m256d vz = _mm256_fmadd_pd(half, _mm256_add_pd(z1, z2), _mm256_mul_pd(cross, cz));
            const __m256d u =
                _mm256_fmadd_pd(vx, vx, _mm256_fmadd_pd(vy, vy, _mm256_mul_pd(vz, vz)));

            __m256d c, sn;
            if (_mm256_movemask_pd(_mm256_cmp_pd(u, limit, _CMP_GT_OQ)) == 0) {
                c = horner(kSeries.cos_c, u);
                sn = horner(kSeries.sinc_c, u);
            } else {
                alignas(32) double ub[4], cb[4], sb[4];
                _mm256_store_pd(ub, u);
                for (int l = 0; l < 4; ++l) {
                    const double n = std::sqrt(ub[l]);
                    cb[l] = std::cos(n);
                    sb[l] = n > 0 ? std::sin(n) / n : 1.0;
                }
                c = _mm256_load_pd(cb);
                sn = _mm256_load_pd(sb);
            }

            const __m256d pr = c;
            const __m256d pim = _mm256_mul_pd(_mm256_set1_pd(-1.0), _mm256_mul_pd(sn, vz));
            const __m256d qr = _mm256_mul_pd(sn, vy);
            const __m256d qi = _mm256_mul_pd(_mm256_set1_pd(-1.0), _mm256_mul_pd(sn, vx));

            const __m256d nar = _mm256_sub_pd(_mm256_fmsub_pd(pr, ar, _mm256_mul_pd(pim, ai)),
                                              _mm256_fmadd_pd(qr, br, _mm256_mul_pd(qi, bi)));
            const __m256d nai = _mm256_sub_pd(_mm256_fmadd_pd(pr, ai, _mm256_mul_pd(pim, ar)),
                                              _mm256_fmsub_pd(qr, bi, _mm256_mul_pd(qi, br)));
            const __m256d nbr = _mm256_add_pd(_mm256_fmsub_pd(qr, ar, _mm256_mul_pd(qi, ai)),
                                              _mm256_fmadd_pd(pr, br, _mm256_mul_pd(pim, bi)));
            const __m256d nbi = _mm256_add_pd(_mm256_fmadd_pd(qr, ai, _mm256_mul_pd(qi, ar)),
                                              _mm256_fmsub_pd(pr, bi, _mm256_mul_pd(pim, br)));
            ar = nar;
            ai = nai;
            br = nbr;
            bi = nbi;
        }
        _mm256_storeu_pd(out.a_re.data() + j, ar);
        _mm256_storeu_pd(out.a_im.data() + j, ai);
        _mm256_storeu_pd(out.b_re.data() + j, br);
        _mm256_storeu_pd(out.b_im.data() + j, bi);
    }
}

void stencil_avx2(const double* in, double* out, std::size_t count, std::span<const double> w) {
    const std::size_t packed = count - count % 4;
    for (std::size_t i = 0; i < packed; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < w.size(); ++j)
            acc = _mm256_fmadd_pd(_mm256_set1_pd(w[j]), _mm256_loadu_pd(in + i + j), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    stencil_scalar(in + packed, out + packed, count - packed, w);
}

}  // namespace dogforge::kernels
