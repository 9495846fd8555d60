#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace qpg {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cplx kI{0.0, 1.0};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double norm() const { return std::hypot(x, y); }
  double angle() const { return std::atan2(y, x); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

inline Vec2 rotate(Vec2 v, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Failure of a factorization or iteration, or non-finite results.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer power of a unit-modulus phase; exact for |n| <= 2.
inline cplx phase_pow(cplx alpha, int n) {
  cplx r{1.0, 0.0};
  const cplx b = n >= 0 ? alpha : 1.0 / alpha;
  for (int i = 0; i < std::abs(n); ++i) r *= b;
  return r;
}

}  // namespace qpg
