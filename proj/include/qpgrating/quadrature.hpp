#pragma once

// Gauss-Legendre rules and locally corrected trapezoid (Nystrom) matrices
// for log-singular kernels on equispaced periodic grids.

#include <stdexcept>
#include <utility>
#include <vector>

#include "qpgrating/geometry.hpp"
#include "qpgrating/parallel.hpp"
#include "qpgrating/types.hpp"

namespace qpg {

/// Nodes and weights of the n-point Gauss-Legendre rule on [a, b].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// An auxiliary node t_i + shift*h of a correction rule, with the Lagrange
/// stencil that interpolates the density there from grid offsets i + offsets[q].
struct AuxNode {
  double shift;
  double weight;
  std::vector<int> offsets;
  std::vector<double> lagrange;
};

/// Periodic two-sided end correction for log-singular integrands:
///   h sum_{|j-i| >= skip} f(t_j) + h sum_k w_k [f(t_i + x_k h) + f(t_i - x_k h)].
struct CorrectionRule {
  int order = 0;
  int skip = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<AuxNode> aux;  ///< both signs of every node, with stencils
};

/// Rules of order 2, 8 and 16; anything else throws std::invalid_argument.
const CorrectionRule& alpert_rule(int order);

enum class Singularity { log, hypersingular };

class UnsupportedKernel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RuleSelfTest {
  std::vector<int> sizes;
  std::vector<double> errors;  ///< log-model error per grid size
  double smooth_error = 0.0;   ///< smooth-model error at the largest size
  double observed_order = 0.0; ///< fitted over sizes whose error is above roundoff
  double max_error = 0.0;
};

/// Applies the rule to periodic model integrands g(t) + h(t) log|2 sin(pi(t - t0))|
/// on [0, 1) with closed-form integrals.
RuleSelfTest correction_rule_selftest(const CorrectionRule& rule, std::vector<int> sizes = {32, 64, 128});

namespace detail {
inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
}  // namespace detail

/// Self-interaction matrix of a log-singular kernel on a closed or
/// quasi-periodic curve.
///
/// kernel(i, diff, n_y) returns K(x_i, y) with diff = x_i - y and n_y the
/// unit normal at y. For periodic_phase curves the source is the union of
/// copies l = -copies..copies weighted by alpha^l; density values past the
/// ends of the base period pick up alpha^{floor(g/N)}. With copies == 0 a
/// single period centered on each target is used.
template <class Kernel>
CMat nystrom_selfmatrix(const Kernel& kernel, Singularity cls, const DiscretizedCurve& curve, cplx alpha,
                        int copies, const CorrectionRule& rule) {
  if (cls != Singularity::log)
    throw UnsupportedKernel("only log-singular kernels have self-interaction corrections");
  if (curve.closure == Closure::open || !curve.param)
    throw UnsupportedKernel("self-interaction needs a closed or periodic parametrized curve");
  const int n = static_cast<int>(curve.size());
  const bool periodic = curve.closure == Closure::periodic_phase;
  const int pc = periodic ? copies : 0;
  if (n < 2 * rule.skip + 1) throw std::invalid_argument("too few nodes for the correction rule");
  const auto& par = *curve.param;
  const double h = curve.h;
  const Vec2 shift = par.period_shift();

  // Source index g runs over [-pc*n, (pc+1)*n) for periodic curves with
  // copies, otherwise over one period centered on the target. Index g maps
  // to node g mod n translated by floor(g/n) periods.
  auto wrap = [&](int g) {
    const int m = detail::floor_div(g, n);
    return std::pair<int, int>{g - m * n, m};
  };
  auto phase = [&](int m) { return periodic ? phase_pow(alpha, m) : cplx(1.0); };

  CMat a = CMat::Zero(n, n);
  ExceptionSlot err;
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) err.run([&] {
    const Vec2 xi = curve.nodes[i];
    int lo = i - n / 2, hi = lo + n;
    if (pc > 0) {
      lo = -pc * n;
      hi = (pc + 1) * n;
    }
    for (int g = lo; g < hi; ++g) {
      if (std::abs(g - i) < rule.skip) continue;
      const auto [j, m] = wrap(g);
      const Vec2 y = curve.nodes[j] + shift * static_cast<double>(m);
      a(i, j) += phase(m) * kernel(i, xi - y, curve.normals[j]) * (curve.speeds[j] * h);
    }
    const double ti = curve.t[i];
    for (const auto& ax : rule.aux) {
      const double dt = ax.shift * h;
      const double t = ti + dt;
      const Vec2 diff = -par.chord(ti, dt);
      const cplx kv = kernel(i, diff, par.normal(t)) * (par.speed(t) * h * ax.weight);
      for (std::size_t q = 0; q < ax.offsets.size(); ++q) {
        const auto [j, m] = wrap(i + ax.offsets[q]);
        a(i, j) += kv * ax.lagrange[q] * phase(m);
      }
    }
  });
  err.rethrow();
  return a;
}

}  // namespace qpg
