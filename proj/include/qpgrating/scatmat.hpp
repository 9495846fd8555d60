#pragma once

// Single-particle scattering matrix: the map from incoming regular-wave
// coefficients a_n (J_n(k2 r) e^{in theta}) to outgoing coefficients
// b_l (H_l(k2 r) e^{il theta}) about the particle center.

#include <vector>

#include "qpgrating/geometry.hpp"
#include "qpgrating/types.hpp"

namespace qpg {

/// Transmission densities on a particle boundary: exterior scattered field
/// S^{k2} sigma + D^{k2} mu, interior field S^{kp} sigma + D^{kp} mu.
struct MullerDensities {
  CVec mu, sigma;
  double residual = 0.0;  ///< relative residual of the discrete system
};

/// LU-factorized transmission system for one closed curve.
class ParticleSolver {
 public:
  ParticleSolver(DiscretizedCurve curve, double k2, double kp, int alpert_order = 16);

  /// Densities for an incident field given by its values and normal
  /// derivatives at the curve nodes.
  MullerDensities solve(const CVec& u_inc, const CVec& dn_inc) const;

  const DiscretizedCurve& curve() const { return curve_; }
  double k2() const { return k2_; }
  double kp() const { return kp_; }

 private:
  DiscretizedCurve curve_;
  double k2_, kp_;
  CMat a_;
  Eigen::PartialPivLU<CMat> lu_;
};

/// Convenience wrapper around ParticleSolver.
MullerDensities solve_muller_particle(const DiscretizedCurve& curve, double k2, double kp, const CVec& u_inc,
                                      const CVec& dn_inc);

/// Field of densities at off-curve points: k = k2 outside, kp inside.
std::vector<cplx> eval_particle_field(const DiscretizedCurve& curve, const MullerDensities& dens, double k,
                                      const std::vector<Vec2>& points);

struct ScatteringMatrix {
  int p = 0;
  double k2 = 0.0, kp = 0.0;
  ParticleShape shape;
  int nodes = 0;
  CMat s;                       ///< (2p+1)^2, entry (l + p, n + p)
  std::vector<MullerDensities> columns;  ///< densities for J_n incidence, reference frame

  cplx at(int l, int n) const { return s(l + p, n + p); }
};

/// Column n from the densities of J_n(k2 r) e^{in theta} incidence:
///   s_ln = (i/4) int J_l(k2|y|) e^{-il theta_y} sigma_n + d/dn_y[J_l e^{-il theta_y}] mu_n ds_y.
ScatteringMatrix scattering_matrix(const ParticleShape& shape, double k2, double kp, int p, int nodes,
                                   bool keep_densities = false);

/// Entrywise e^{i phi (l - n)} s_ln.
ScatteringMatrix rotate_scattering_matrix(const ScatteringMatrix& s, double phi);

/// Matrix of a particle placed at angle phi: the frame change gives
/// e^{-i phi (l - n)} s_ln.
CMat placed_scattering_matrix(const ScatteringMatrix& s, double phi);

/// Separation-of-variables coefficient of a disk of radius R: J_n incidence
/// produces s_n H_n outside.
cplx disk_scattering_coefficient(int n, double radius, double k2, double kp);

/// Interior/exterior field of a particle at (center, rotation) for global
/// incoming coefficients a, using the stored reference densities.
MullerDensities particle_densities(const ScatteringMatrix& s, double rotation, const CVec& incoming);

}  // namespace qpg
