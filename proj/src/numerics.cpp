#include "dogforge/numerics.hpp"

#include "dogforge/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dogforge::num {

std::vector<std::pair<std::size_t, std::size_t>> pieces(std::size_t n, std::span<const std::size_t> breaks) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (n == 0) return out;
    std::size_t a = 0;
    for (std::size_t b : breaks) {
        if (b <= a || b >= n - 1) continue;
        out.emplace_back(a, b);
        a = b;
    }
    out.emplace_back(a, n - 1);
    return out;
}

std::vector<double> fd_weights(std::span<const double> offsets, int order) {
    // Fornberg's recursion for weights at x0 = 0.
    const std::size_t n = offsets.size();
    const int m = order;
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = offsets[0];
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[i];
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

namespace {

struct Stencils {
    int order;
    int half;                     // centred half-width
    std::vector<double> centred;  // unit-spacing weights
};

const Stencils& stencils_for(int order) {
    static const std::array<Stencils, 3> table = [] {
        std::array<Stencils, 3> t;
        for (int o = 1; o <= 3; ++o) {
            const int half = o == 3 ? 3 : 2;
            std::vector<double> off;
            for (int j = -half; j <= half; ++j) off.push_back(j);
            t[o - 1] = Stencils{o, half, fd_weights(off, o)};
        }
        return t;
    }();
    return table.at(order - 1);
}

// Derivative of one smooth piece f[0..len) into out[0..len).
void differentiate_piece(const double* f, double* out, std::size_t len, double h, int order) {
    const Stencils& st = stencils_for(order);
    const std::size_t half = st.half;
    const std::size_t width = order + 4;
    const double scale = 1.0 / std::pow(h, order);
    if (len > 2 * half) {
        kernels::stencil(f, out + half, len - 2 * half, st.centred);
        for (std::size_t i = half; i + half < len; ++i) out[i] *= scale;
    }
    for (std::size_t i = 0; i < len; ++i) {
        if (i >= half && i + half < len) continue;
        const std::size_t start =
            std::min<std::size_t>(i >= width / 2 ? i - width / 2 : 0, len - width);
        std::vector<double> off(width);
        for (std::size_t j = 0; j < width; ++j)
            off[j] = static_cast<double>(start + j) - static_cast<double>(i);
        const auto w = fd_weights(off, order);
        double acc = 0;
        for (std::size_t j = 0; j < width; ++j) acc += w[j] * f[start + j];
        out[i] = acc * scale;
    }
}

std::vector<double> differentiate_scalar(std::span<const double> f, double h, int order,
                                         std::span<const std::size_t> breaks, std::span<const double> left_in,
                                         std::vector<double>* left) {
    if (order < 1 || order > 3)
        fail(ErrorKind::Precondition, "bad_order", "derivative order must be 1, 2 or 3");
    const std::size_t n = f.size();
    if (n < 7) fail(ErrorKind::Precondition, "too_few_samples", "at least 7 samples are required");
    std::vector<double> out(n);
    const auto ps = pieces(n, breaks);
    if (left) left->clear();
    std::vector<double> tmp, src;
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        const std::size_t len = b - a + 1;
        if (len < static_cast<std::size_t>(order + 4))
            fail(ErrorKind::Precondition, "too_few_samples", "smooth piece too short for the derivative stencil");
        tmp.assign(len, 0.0);
        src.assign(f.begin() + static_cast<std::ptrdiff_t>(a), f.begin() + static_cast<std::ptrdiff_t>(b) + 1);
        if (p + 1 < ps.size() && p < left_in.size()) src.back() = left_in[p];
        differentiate_piece(src.data(), tmp.data(), len, h, order);
        std::copy(tmp.begin(), tmp.end(), out.begin() + static_cast<std::ptrdiff_t>(a));
        if (left && p + 1 < ps.size()) left->push_back(tmp.back());
    }
    return out;
}

template <class T>
struct Parts;
template <>
struct Parts<double> {
    static constexpr int dim = 1;
    static double get(const double& v, int) { return v; }
    static void set(double& v, int, double x) { v = x; }
    static double zero() { return 0.0; }
};
template <>
struct Parts<Vec3> {
    static constexpr int dim = 3;
    static double get(const Vec3& v, int c) { return v[c]; }
    static void set(Vec3& v, int c, double x) { v[c] = x; }
    static Vec3 zero() { return Vec3::Zero(); }
};

}  // namespace

template <class T>
std::vector<T> differentiate(std::span<const T> f, double h, int order, std::span<const std::size_t> breaks,
                             std::span<const T> left_in, std::vector<T>* left_at_breaks) {
    using P = Parts<T>;
    std::vector<T> out(f.size(), P::zero());
    if (left_at_breaks) left_at_breaks->clear();
    std::vector<double> comp(f.size()), left, lin(left_in.size());
    for (int c = 0; c < P::dim; ++c) {
        for (std::size_t i = 0; i < f.size(); ++i) comp[i] = P::get(f[i], c);
        for (std::size_t i = 0; i < left_in.size(); ++i) lin[i] = P::get(left_in[i], c);
        const auto d = differentiate_scalar(comp, h, order, breaks, lin, left_at_breaks ? &left : nullptr);
        for (std::size_t i = 0; i < f.size(); ++i) P::set(out[i], c, d[i]);
        if (left_at_breaks) {
            left_at_breaks->resize(left.size(), P::zero());
            for (std::size_t j = 0; j < left.size(); ++j) P::set((*left_at_breaks)[j], c, left[j]);
        }
    }
    return out;
}

template <class T>
std::vector<T> cumulative_integral(std::span<const T> f, double h, std::span<const std::size_t> breaks,
                                   std::span<const T> left_at_breaks) {
    using P = Parts<T>;
    const std::size_t n = f.size();
    std::vector<T> out(n, P::zero());
    if (n < 2) return out;
    const auto ps = pieces(n, breaks);
    T acc = P::zero();
    for (std::size_t p = 0; p < ps.size(); ++p) {
        const auto [a, b] = ps[p];
        const bool has_left = p + 1 < ps.size() && p < left_at_breaks.size();
        auto val = [&](std::size_t i) -> T {
            if (i == b && has_left) return left_at_breaks[p];
            return f[i];
        };
        const std::size_t len = b - a + 1;
        for (std::size_t k = a; k < b; ++k) {
            T inc;
            if (len < 4) {
                inc = 0.5 * h * (val(k) + val(k + 1));
            } else if (k == a) {
                inc = (h / 24.0) * (9.0 * val(k) + 19.0 * val(k + 1) - 5.0 * val(k + 2) + val(k + 3));
            } else if (k + 1 == b) {
                inc = (h / 24.0) * (9.0 * val(k + 1) + 19.0 * val(k) - 5.0 * val(k - 1) + val(k - 2));
            } else {
                inc = (h / 24.0) * (-val(k - 1) + 13.0 * val(k) + 13.0 * val(k + 1) - val(k + 2));
            }
            acc = acc + inc;
            out[k + 1] = acc;
        }
    }
    return out;
}

template std::vector<double> differentiate<double>(std::span<const double>, double, int, std::span<const std::size_t>,
                                                   std::span<const double>, std::vector<double>*);
template std::vector<Vec3> differentiate<Vec3>(std::span<const Vec3>, double, int, std::span<const std::size_t>,
                                               std::span<const Vec3>, std::vector<Vec3>*);
template std::vector<double> cumulative_integral<double>(std::span<const double>, double,
                                                         std::span<const std::size_t>, std::span<const double>);
template std::vector<Vec3> cumulative_integral<Vec3>(std::span<const Vec3>, double, std::span<const std::size_t>,
                                                     std::span<const Vec3>);

std::array<double, 4> cubic_weights(double c) {
    // Lagrange basis on nodes -1, 0, 1, 2.
    return {-c * (c - 1) * (c - 2) / 6.0, (c + 1) * (c - 1) * (c - 2) / 2.0, -(c + 1) * c * (c - 2) / 2.0,
            (c + 1) * c * (c - 1) / 6.0};
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y, std::vector<double> slopes)
    : x_(std::move(x)), y_(std::move(y)), m_(std::move(slopes)) {
    if (x_.size() < 2 || y_.size() != x_.size() || m_.size() != x_.size())
        fail(ErrorKind::Precondition, "bad_interpolant", "interpolant needs matching arrays of length >= 2");
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
        const double d = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
        if (d == 0.0) {
            m_[k] = m_[k + 1] = 0.0;
            continue;
        }
        double a = m_[k] / d, b = m_[k + 1] / d;
        if (a < 0) m_[k] = a = 0;
        if (b < 0) m_[k + 1] = b = 0;
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double t = 3.0 / std::sqrt(r2);
            m_[k] = t * a * d;
            m_[k + 1] = t * b * d;
        }
    }
}

std::size_t MonotoneCubic::locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t k = locate(x);
    const double dx = x_[k + 1] - x_[k];
    return hermite(y_[k], y_[k + 1], m_[k] * dx, m_[k + 1] * dx, (x - x_[k]) / dx);
}

double MonotoneCubic::derivative(double x) const {
    const std::size_t k = locate(x);
    const double dx = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / dx, s2 = s * s;
    const double dp = (6 * s2 - 6 * s) * y_[k] + (3 * s2 - 4 * s + 1) * m_[k] * dx + (-6 * s2 + 6 * s) * y_[k + 1] +
                      (3 * s2 - 2 * s) * m_[k + 1] * dx;
    return dp / dx;
}

double MonotoneCubic::inverse(double y) const {
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t k = it == y_.begin() ? 0 : static_cast<std::size_t>(it - y_.begin()) - 1;
    k = std::min(k, y_.size() - 2);
    const double dx = x_[k + 1] - x_[k];
    double lo = 0.0, hi = 1.0;
    double s = (y_[k + 1] != y_[k]) ? std::clamp((y - y_[k]) / (y_[k + 1] - y_[k]), 0.0, 1.0) : 0.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double x = x_[k] + s * dx;
        const double r = (*this)(x)-y;
        if (r > 0)
            hi = s;
        else
            lo = s;
        const double d = derivative(x) * dx;
        double next = d > 0 ? s - r / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) < 1e-16) {
            s = next;
            break;
        }
        s = next;
    }
    return x_[k] + s * dx;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::vector<double> unwrap(std::span<const double> angle) {
    std::vector<double> out(angle.begin(), angle.end());
    double shift = 0;
    for (std::size_t i = 1; i < angle.size(); ++i) {
        const double d = angle[i] - angle[i - 1];
        shift -= 2 * pi * std::round(d / (2 * pi));
        out[i] = angle[i] + shift;
    }
    return out;
}

double wrap_pi(double a) {
    double r = std::remainder(a, 2 * pi);
    if (r <= -pi) r += 2 * pi;
    return r;
}

double wrap_2pi(double a) {
    double r = std::fmod(a, 4 * pi);
    if (r > 2 * pi) r -= 4 * pi;
    if (r <= -2 * pi) r += 4 * pi;
    return r;
}

double angle_distance(double a, double b) { return std::abs(wrap_pi(a - b)); }

void fill_flagged(std::vector<double>& values, std::span<const unsigned char> flagged, std::size_t support) {
    const std::size_t n = values.size();
    std::size_t i = 0;
    while (i < n) {
        if (!flagged[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && flagged[j]) ++j;  // run [i, j)
        std::vector<std::size_t> idx;
        for (std::size_t k = i, taken = 0; k-- > 0 && taken < support;)
            if (!flagged[k]) idx.push_back(k), ++taken;
        for (std::size_t k = j, taken = 0; k < n && taken < support; ++k)
            if (!flagged[k]) idx.push_back(k), ++taken;
        if (idx.empty()) fail(ErrorKind::Numerical, "no_support", "no unflagged samples to fill from");
        const int deg = static_cast<int>(std::min<std::size_t>(3, idx.size() - 1));
        const double centre = 0.5 * (static_cast<double>(i) + static_cast<double>(j - 1));
        Eigen::MatrixXd A(idx.size(), deg + 1);
        Eigen::VectorXd rhs(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const double x = static_cast<double>(idx[r]) - centre;
            double p = 1;
            for (int c = 0; c <= deg; ++c) A(r, c) = p, p *= x;
            rhs(r) = values[idx[r]];
        }
        const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
        for (std::size_t k = i; k < j; ++k) {
            const double x = static_cast<double>(k) - centre;
            double p = 1, v = 0;
            for (int c = 0; c <= deg; ++c) v += coef(c) * p, p *= x;
            values[k] = v;
        }
        i = j;
    }
}

double gudermannian(double x) { return 2.0 * std::atan(std::tanh(0.5 * x)); }

}  // namespace dogforge::num
