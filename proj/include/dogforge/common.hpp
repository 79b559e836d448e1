#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dogforge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using cplx = std::complex<double>;
using Unitary2 = Eigen::Matrix2cd;

inline constexpr double pi = 3.14159265358979323846;

// Failure classes map onto CLI exit codes.
enum class ErrorKind { Parse, Precondition, Numerical, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}
    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string code, const std::string& message) {
    throw Error(kind, std::move(code), message);
}

// Numerical tolerances shared by all modules. Defaults are the calibrated
// values; callers may override per run.
struct Tolerances {
    double tantrix = 1e-6;        // relative deviation of |dr/dt| from 1
    double closure = 1e-4;        // endpoint gap relative to curve length
    double kappa_floor = 1e-9;    // |r' x r''| below which torsion is undefined
    double pt = 1e-6;             // parallel-transport residual, rad per unit time
    double angle = 1e-6;          // cyclicity of Bloch paths, rad
    double area = 1e-3;           // net rotation of a half sequence, rad
    std::size_t straight_run_max = 16;
};

// Uniform sampling grid t_k = t0 + k*spacing, k = 0..count-1.
struct Grid {
    double t0 = 0.0;
    double spacing = 1.0;
    std::size_t count = 0;

    double at(std::size_t k) const { return t0 + spacing * static_cast<double>(k); }
    double span() const { return count > 0 ? spacing * static_cast<double>(count - 1) : 0.0; }
    bool operator==(const Grid&) const = default;
};

}  // namespace dogforge
