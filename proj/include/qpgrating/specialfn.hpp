#pragma once

// Integer-order cylinder functions of real argument and the cylindrical
// waves built from them.
//
// Supported range: |n| <= 200, 0 <= x <= 1e4. Requests outside it throw
// std::domain_error.

#include <array>
#include <span>

#include "qpgrating/types.hpp"

namespace qpg {

inline constexpr int kMaxBesselOrder = 200;
inline constexpr double kMaxBesselArg = 1.0e4;

struct BesselJY01 {
  double j0, j1, y0, y1;
};

/// J0, J1, Y0, Y1 at x > 0 (J-only at x == 0, Y set to -inf).
BesselJY01 bessel_jy01(double x);

double bessel_j(int n, double x);
double bessel_y(int n, double x);
cplx hankel1(int n, double x);

/// J_0..J_nmax at x >= 0 into out[0..nmax].
void bessel_j_array(int nmax, double x, std::span<double> out);
/// H^(1)_0..H^(1)_nmax at x > 0 into out[0..nmax].
void hankel1_array(int nmax, double x, std::span<cplx> out);

/// H^(1)_1(x) + 2i/(pi x): the part of H1 left after removing its pole,
/// evaluated without cancellation for small x.
cplx hankel1_1_nonsingular(double x);

/// Value and gradient of a cylindrical wave at a target point.
struct WaveValue {
  cplx value;
  std::array<cplx, 2> gradient;
};

/// Cylindrical wave Z_n(k r) e^{i n theta} about a center, Z = J or H^(1).
struct CylWave {
  enum class Kind { regular, outgoing };
  Kind kind;
  int order;
  double k;
  Vec2 center;

  WaveValue operator()(Vec2 target) const;
};

/// J_n(k r) e^{i n theta}, (r, theta) polar coordinates of target - center.
WaveValue eval_regular_wave(int n, double k, Vec2 center, Vec2 target);
/// H^(1)_n(k r) e^{i n theta}; target == center is a domain error.
WaveValue eval_outgoing_wave(int n, double k, Vec2 center, Vec2 target);

/// All orders -p..p at once. Index n + p of each span holds order n; dx/dy
/// may be empty when gradients are not wanted.
void regular_waves(int p, double k, Vec2 rel, std::span<cplx> val, std::span<cplx> dx = {},
                   std::span<cplx> dy = {});
void outgoing_waves(int p, double k, Vec2 rel, std::span<cplx> val, std::span<cplx> dx = {},
                    std::span<cplx> dy = {});

}  // namespace qpg
