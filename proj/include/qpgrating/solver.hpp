#pragma once

// Coupled grating + inclusion solve. The layer unknowns are eliminated with
// the regularized pseudoinverse of the empty system, leaving
//   (I - S T + S B A^+ C) beta = S B A^+ f
// for the outgoing particle coefficients; B here is the positive map from
// layer unknowns to particle incoming coefficients.

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "qpgrating/empty_grating.hpp"
#include "qpgrating/multiscat.hpp"
#include "qpgrating/scatmat.hpp"

namespace qpg {

using LinearOperator = std::function<CVec(const CVec&)>;

struct GmresResult {
  CVec x;
  int iterations = 0;
  double residual = 0.0;          ///< final relative residual
  std::vector<double> history;    ///< relative residual after each iteration
  bool converged = false;
};

/// Unrestarted GMRES (modified Gram-Schmidt Arnoldi, Givens rotations),
/// zero initial guess.
GmresResult gmres(const LinearOperator& op, const CVec& rhs, double tol, int maxit);

struct Timings {
  double assembly = 0.0;
  double factorization = 0.0;
  double scatmat = 0.0;
  double coupling = 0.0;
  double gmres = 0.0;
  double total = 0.0;
};

/// Everything needed to apply the Schur operator and evaluate fields.
struct CoupledProblem {
  ProblemConfig cfg;
  GratingGeometry geo;
  EmptySystem sys;
  ParticleSet particles;
  ParticleArray arr;
  std::optional<ScatteringMatrix> smat;
  std::vector<CMat> placed;     ///< per-particle matrices in the global frame
  std::optional<TranslationOperator> T;
  CMat B;  ///< [particles] x [nu1, nu2, a2]
  CMat C;  ///< [Gamma_1, Gamma_2, wall_2 rows] x [particles]
  bool coupled = true;  ///< false zeroes B and C (free multi-particle system)
  Timings timings;

  int particle_unknowns() const { return arr.size(); }
  /// Layer unknowns to particle incoming coefficients.
  CVec apply_B(const CVec& alpha) const;
  /// Particle coefficients to full-length physical rows of the empty system.
  CVec apply_C(const CVec& beta) const;
  /// Block-diagonal scattering matrices.
  CVec apply_S(const CVec& a) const;
  CVec apply_T(const CVec& beta) const;
};

struct SetupOptions {
  bool coupled = true;
  /// A precomputed matrix for this shape and these wavenumbers (skips the
  /// particle solves; it must carry densities for interior fields).
  const ScatteringMatrix* smat = nullptr;
};

std::shared_ptr<CoupledProblem> prepare_problem(const ProblemConfig& cfg, const SetupOptions& opt = {});

/// beta - S T beta + S B A^+ C beta.
CVec apply_schur_operator(const CoupledProblem& pb, const CVec& beta);
/// S B A^+ f.
CVec schur_rhs(const CoupledProblem& pb);

struct Solution {
  std::shared_ptr<const CoupledProblem> problem;
  CVec beta;
  CVec alpha;  ///< physical empty-system unknowns
  int iterations = 0;
  double gmres_residual = 0.0;
  std::vector<double> history;
  bool converged = true;
  double coupled_residual = 0.0;  ///< full rectangular system, relative to |f|
  double wall_discrepancy = 0.0;  ///< |alpha u(L) - u(R)| at fresh wall points
  double flux_error = 0.0;
  CVec incoming;  ///< per-particle incoming coefficients B alpha + T beta
};

/// Residual of [A C; -S B, I - S T][alpha; beta] = [f; 0], relative to |f|.
double coupled_residual(const CoupledProblem& pb, const CVec& alpha, const CVec& beta);

Solution solve_prepared(std::shared_ptr<CoupledProblem> pb);
Solution solve_full(const ProblemConfig& cfg, const SetupOptions& opt = {});

}  // namespace qpg
