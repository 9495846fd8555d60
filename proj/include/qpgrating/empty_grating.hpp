#pragma once

// The periodized system for the grating without inclusions. Unknowns, in
// order: [mu1; sigma1] on the upper interface, [mu2; sigma2] on the lower
// interface, J-expansion coefficients of layers 2, 1, 3, then the upward
// (c) and downward (d) Rayleigh-Bloch amplitudes.

#include <array>
#include <cstdint>
#include <vector>

#include "qpgrating/geometry.hpp"
#include "qpgrating/types.hpp"

namespace qpg {

struct UnknownLayout {
  int n1 = 0, n2 = 0;  ///< interface node counts
  int q = 0;           ///< J-expansion order
  int rb = 0;          ///< Rayleigh-Bloch order

  int jsize() const { return 2 * q + 1; }
  int rbsize() const { return 2 * rb + 1; }
  int nu1() const { return 0; }
  int nu2() const { return 2 * n1; }
  int a2() const { return 2 * n1 + 2 * n2; }
  int a1() const { return a2() + jsize(); }
  int a3() const { return a1() + jsize(); }
  int c() const { return a3() + jsize(); }
  int d() const { return c() + rbsize(); }
  int total() const { return d() + rbsize(); }
};

/// Row blocks: interface jumps, wall discrepancies (layer 2, 1, 3), lids.
/// Each block stores value rows followed by normal-derivative rows.
struct RowLayout {
  int gamma1 = 0, gamma2 = 0, wall2 = 0, wall1 = 0, wall3 = 0, lid_u = 0, lid_d = 0, total = 0;
  int n1 = 0, n2 = 0, nw2 = 0, nw1 = 0, nw3 = 0, nu = 0, nd = 0;  ///< nodes per block
};

struct GratingGeometry {
  DiscretizedCurve gamma1, gamma2;
  WallsAndLids walls;
  std::array<Vec2, 3> centers;  ///< J-expansion centers of layers 1, 2, 3
  double y0 = 0.0;
};

GratingGeometry build_geometry(const ProblemConfig& cfg);

/// +sqrt(k^2 - kappa_n^2), positive real or positive imaginary.
cplx vertical_wavenumber(double k, double kappa_n);
double kappa_n(const ProblemConfig& cfg, int n);

struct EmptySystem {
  UnknownLayout layout;
  RowLayout rows;
  CMat A;                      ///< row- and column-scaled
  Eigen::VectorXd col_scale;   ///< physical unknown = scaled unknown * col_scale
  Eigen::VectorXd row_scale;   ///< scaled row = physical row * row_scale
  CVec f;  ///< physical (unscaled) right-hand side
  double eps = 1e-10;
  CMat U, V;
  Eigen::VectorXd sigma;
  bool factorized = false;
};

EmptySystem assemble_empty_system(const ProblemConfig& cfg, const GratingGeometry& geo);

/// Thin SVD of the scaled matrix (LAPACK zgesdd).
void factorize(EmptySystem& sys);

/// V Sigma^+ U^* g with Sigma^+ = min(1/sigma_j, 1/eps). Takes g in
/// physical row units and returns physical unknowns.
CVec apply_pinv(const EmptySystem& sys, const CVec& g);

/// A times a physical unknown vector.
CVec apply_physical(const EmptySystem& sys, const CVec& alpha);

struct EmptySolution {
  CVec alpha;
  double residual = 0.0;  ///< |A alpha - f| / |f|
};

EmptySolution solve_empty(const ProblemConfig& cfg, const GratingGeometry& geo, EmptySystem& sys);

/// Plane wave exp(i k1 (cos t x + sin t y)) and its gradient.
cplx incident_field(const ProblemConfig& cfg, Vec2 x);
std::array<cplx, 2> incident_gradient(const ProblemConfig& cfg, Vec2 x);

/// Layer index (1, 2, 3) of a point from the interface graphs.
int layer_of(const ProblemConfig& cfg, Vec2 x);

enum : std::uint8_t { kMaskNone = 0, kMaskNearCurve = 1, kMaskParticle = 2 };

struct FieldSample {
  std::vector<cplx> value;
  std::vector<int> layer;
  std::vector<std::uint8_t> mask;
};

/// Scattered field of the empty-grating representation (plus the incident
/// wave in layer 1 when requested). Beyond the lids the Rayleigh-Bloch sums
/// are used unless representation_only is set.
FieldSample eval_empty_field(const ProblemConfig& cfg, const GratingGeometry& geo, const UnknownLayout& layout,
                             const CVec& alpha, const std::vector<Vec2>& points, bool add_incident = true,
                             bool representation_only = false);

/// sum_n c_n exp(i kappa_n x + i k_{1,n}(y - y0)) for y >= y0, and the
/// mirrored sum with d_n below -y0.
cplx eval_rayleigh_bloch(const ProblemConfig& cfg, const UnknownLayout& layout, const CVec& alpha, double y0, Vec2 x);

}  // namespace qpg
