#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace homogl {

using Complex = std::complex<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Symmetric 2x2 matrix (a11, a12; a12, a22).
struct Mat2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }

    double eig_min() const {
        const double tr = a11 + a22;
        const double disc = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
        return 0.5 * (tr - disc);
    }
    double eig_max() const {
        const double tr = a11 + a22;
        const double disc = std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12);
        return 0.5 * (tr + disc);
    }
};

inline Mat2 operator+(Mat2 a, Mat2 b) { return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22}; }
inline Mat2 operator*(double s, Mat2 a) { return {s * a.a11, s * a.a12, s * a.a22}; }

/// z1 ∧ z2 = Re(z1) Im(z2) − Im(z1) Re(z2), the R²-cross product of complex values.
inline double wedge(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Base error for all toolkit failures.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Linear or nonlinear solve failed; carries the final residual.
class SolveError : public Error {
  public:
    SolveError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

}  // namespace homogl
