#pragma once

// Grid calculus on uniformly sampled, piecewise-smooth data.
//
// A "break" index k marks a sample where the data may have a derivative jump:
// samples a..k and k..b are treated as separate smooth pieces that share the
// sample k. Stencils never straddle a break.

#include "dogforge/common.hpp"

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace dogforge::num {

// Inclusive [first, last] index ranges of the smooth pieces of an n-sample array.
std::vector<std::pair<std::size_t, std::size_t>> pieces(std::size_t n, std::span<const std::size_t> breaks);

// Finite-difference weights (Fornberg) for derivative `order` at x=0 using
// samples at the given offsets (unit spacing).
std::vector<double> fd_weights(std::span<const double> offsets, int order);

// Derivative of sampled data, 4th-order accurate in the interior and at piece
// ends (one-sided stencils). At a break sample the right piece wins. Left
// limits of the data at breaks may be supplied in `left_in`; left limits of the
// derivative are written to `left_out` when requested.
template <class T>
std::vector<T> differentiate(std::span<const T> f, double h, int order,
                             std::span<const std::size_t> breaks = {},
                             std::span<const T> left_in = {},
                             std::vector<T>* left_out = nullptr);

// Running integral F_k = int_{t_0}^{t_k} f, 4th order per piece. `left_at_breaks`
// optionally supplies left-limit integrand values at the breaks.
template <class T>
std::vector<T> cumulative_integral(std::span<const T> f, double h,
                                   std::span<const std::size_t> breaks = {},
                                   std::span<const T> left_at_breaks = {});

// Weights of the cubic through samples at -1, 0, 1, 2 evaluated at c in [0,1].
std::array<double, 4> cubic_weights(double c);

// Cubic Hermite interpolant with Fritsch-Carlson limited slopes; monotone
// whenever the data are. Inverse evaluation assumes strictly increasing data.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes);
    double operator()(double x) const;
    double derivative(double x) const;
    double inverse(double y) const;
    const std::vector<double>& knots() const { return x_; }

private:
    std::size_t locate(double x) const;
    std::vector<double> x_, y_, m_;
};

// Cubic Hermite evaluation on [0,1] for value pair p0,p1 and scaled slopes m0,m1.
template <class T>
T hermite(const T& p0, const T& p1, const T& m0, const T& m1, double s) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
}

struct LinearFit {
    double slope = 0, intercept = 0, r_squared = 0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Removes 2*pi jumps between consecutive samples.
std::vector<double> unwrap(std::span<const double> angle);
// Maps to (-pi, pi].
double wrap_pi(double a);
// Maps to (-2pi, 2pi] keeping the sign of the input where possible.
double wrap_2pi(double a);
// Distance between two angles on the circle, in [0, pi].
double angle_distance(double a, double b);

// Replaces flagged samples with a least-squares cubic through up to `support`
// unflagged neighbours on each side. Runs of flags at the array ends are
// extrapolated from the interior.
void fill_flagged(std::vector<double>& values, std::span<const unsigned char> flagged, std::size_t support = 4);

double gudermannian(double x);

}  // namespace dogforge::num
