#pragma once

// Helmholtz layer potentials G_k(x, y) = (i/4) H0(k|x - y|) and the boundary
// operators built from them:
//   S: G,  D: dG/dn_y,  N: dG/dn_x,  T: d2G/dn_x dn_y.

#include <array>
#include <utility>
#include <vector>

#include "qpgrating/geometry.hpp"
#include "qpgrating/quadrature.hpp"
#include "qpgrating/types.hpp"

namespace qpg {

struct KernelValues {
  cplx g, dny, dnx, dnxny;
};

/// All four kernels at x != y (std::domain_error otherwise).
KernelValues greens_kernel(double k, Vec2 x, Vec2 y, Vec2 nx, Vec2 ny);

enum OpMask : unsigned { kOpS = 1u, kOpD = 2u, kOpN = 4u, kOpT = 8u };

struct OperatorSet {
  CMat S, D, N, T;  ///< empty unless requested
};

/// Target points with optional normals (needed for N and T).
struct Targets {
  std::vector<Vec2> points;
  std::vector<Vec2> normals;

  static Targets of(const DiscretizedCurve& c) { return {c.nodes, c.normals}; }
  std::size_t size() const { return points.size(); }
};

/// A translated copy of a source curve: shift index l and complex weight.
using CopyWeights = std::vector<std::pair<int, cplx>>;

/// alpha^l for l = -P..P.
CopyWeights phased_copies(cplx alpha, int copies);

/// Wall-discrepancy weights: alpha Op(x_L) - Op(x_L + d) summed over the
/// copies -P..P reduces to alpha^{P+1} Op_P(x_L) - alpha^{-P} Op_{-P-1}(x_L).
CopyWeights wall_copies(cplx alpha, int copies);

/// Sum over copies of weight * Op(targets, source translated by l times the
/// curve's period shift). Plain smooth quadrature: targets must stay away
/// from every copy of the source curve.
OperatorSet copy_operators(const DiscretizedCurve& src, const Targets& tgt, double k, unsigned which,
                           const CopyWeights& weights);

/// Phased near-field sum sum_{l=-P..P} alpha^l Op. When the target is the
/// source curve itself only log-singular differences are possible; use
/// muller_self_block. Requesting a lone self operator throws UnsupportedKernel.
OperatorSet boundary_operator_matrices(const DiscretizedCurve& src, const Targets& tgt, double k, unsigned which,
                                       cplx alpha, int copies, bool same_curve = false);

/// Self-interaction difference (Op^{k_plus} - Op^{k_minus}) on one curve.
OperatorSet difference_self_operators(const DiscretizedCurve& curve, double k_plus, double k_minus, cplx alpha,
                                      int copies, const CorrectionRule& rule);

/// The transmission block mapping [mu; sigma] to the jumps in value and
/// normal derivative across the curve:
///   [[I + dD, dS], [dT, -I + dN]],  d = (k_plus side) - (k_minus side),
/// with the normal pointing into the k_plus side.
CMat muller_self_block(const DiscretizedCurve& curve, double k_plus, double k_minus, cplx alpha, int copies,
                       const CorrectionRule& rule);

struct FieldValues {
  std::vector<cplx> value;
  std::vector<std::array<cplx, 2>> gradient;
};

/// S sigma + D mu (either density may be empty) with their gradients at
/// off-curve targets, summed over copies -P..P with weights alpha^l.
FieldValues eval_layer_potentials(const DiscretizedCurve& src, const std::vector<cplx>& sigma,
                                  const std::vector<cplx>& mu, double k, const std::vector<Vec2>& targets,
                                  cplx alpha = 1.0, int copies = 0);

}  // namespace qpg
