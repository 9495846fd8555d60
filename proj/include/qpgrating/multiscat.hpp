#pragma once

// Translation operators between cylindrical-wave expansions and the blocks
// coupling particle multipoles to the periodized layer unknowns.
//
// Expansions of order p are stored as vectors of length 2p+1, entry n + p
// holding the coefficient of Z_n(k r) e^{in theta}.

#include <vector>

#include "qpgrating/empty_grating.hpp"
#include "qpgrating/geometry.hpp"
#include "qpgrating/types.hpp"

namespace qpg {

/// (2p+1)^2 matrix taking outgoing coefficients about `from` to regular
/// coefficients about `to`:  a_v = sum_n H_{n-v}(k rho) e^{i(n-v) phi} b_n,
/// (rho, phi) the polar form of to - from.
CMat m2l_matrix(Vec2 from, Vec2 to, double k, int p);

/// Throws std::domain_error when the two disks of radius r_from, r_to overlap.
CVec m2l_translate(const CVec& beta, Vec2 from, Vec2 to, double k, int p, double r_from, double r_to);

/// Regular re-expansion about `to` of a regular expansion of order p_in
/// about `from`:  a_v = sum_n g_n J_{n-v}(k rho) e^{i(n-v) phi}.
CMat l2l_matrix(Vec2 from, Vec2 to, double k, int p_in, int p_out);
CVec l2l_translate(const CVec& gamma, Vec2 from, Vec2 to, double k, int p_out);

/// Jacobi-Anger coefficients of exp(ik (cos psi, sin psi) . x) about center:
/// e^{ik.c} i^n e^{-in psi}.
CVec plane_wave_local_coeffs(double psi, double k, Vec2 center, int p);

cplx eval_regular_expansion(const CVec& a, Vec2 center, double k, Vec2 x);
cplx eval_outgoing_expansion(const CVec& b, Vec2 center, double k, Vec2 x);

/// Particle centers with the periodization data for the middle layer.
struct ParticleArray {
  std::vector<Vec2> centers;
  std::vector<double> rotations;
  double radius = 0.0;
  int p = 10;
  double k = 0.0;     ///< background wavenumber
  cplx alpha = 1.0;   ///< Bloch phase
  int copies = 0;     ///< images l = -P..P at (l d, 0)
  double period = 1.0;

  int count() const { return static_cast<int>(centers.size()); }
  int block() const { return 2 * p + 1; }
  int size() const { return count() * block(); }
};

ParticleArray make_particle_array(const ProblemConfig& cfg, const ParticleSet& set);

/// Dense all-pairs translation including phased images. Pair data are the
/// Toeplitz symbols t_q = sum_l alpha^l H_q(k rho_l) e^{iq phi_l}, q = -2p..2p,
/// so one pair costs (2p+1)^2 per application.
class TranslationOperator {
 public:
  explicit TranslationOperator(const ParticleArray& arr);
  /// Incoming contributions at every particle from all other particles and
  /// from every image l != 0 of every particle (including its own).
  CVec apply(const CVec& beta) const;

 private:
  int m_ = 0, p_ = 0;
  std::vector<cplx> symbols_;  ///< (target, source, q); empty for large arrays
  ParticleArray arr_;          ///< kept when symbols are recomputed per apply
};

CVec apply_T(const ParticleArray& arr, const CVec& beta);

/// Incoming coefficients at each particle produced by the middle-layer part
/// of the empty-grating representation: Gamma_1 and Gamma_2 densities at k2
/// with phased copies, and the layer-2 J expansion. Columns are the physical
/// unknowns [nu1, nu2, a2] (the leading columns of the unknown layout).
CMat source_to_local_block(const ParticleArray& arr, const GratingGeometry& geo, const UnknownLayout& layout);

/// Values and normal derivatives of the phased particle multipole sums at the
/// rows of the empty system (physical row units): minus on Gamma_1 rows
/// (they hold u1 - u2), plus on Gamma_2 rows, and the layer-2 wall
/// discrepancy alpha u(L) - u(R) in its cancelled form. Only the leading
/// rows [Gamma_1, Gamma_2, wall_2] are returned; the rest vanish.
CMat multipole_to_targets_block(const ParticleArray& arr, const GratingGeometry& geo, const RowLayout& rows);

/// Wall-discrepancy rows evaluated without cancellation: alpha * sum_l over
/// -P..P at L minus the same at R. Only valid when no wall node lies inside
/// a particle disk copy; used to check the cancelled form.
CMat multipole_wall_rows_direct(const ParticleArray& arr, const DiscretizedCurve& left, const DiscretizedCurve& right);

/// Phased sum of all particle outgoing expansions at a point.
cplx eval_particle_multipoles(const ParticleArray& arr, const CVec& beta, Vec2 x);

}  // namespace qpg
