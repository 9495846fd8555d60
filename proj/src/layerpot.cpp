#include "qpgrating/layerpot.hpp"

#include <stdexcept>

#include "qpgrating/specialfn.hpp"

namespace qpg {

namespace {

constexpr cplx kQuarterI{0.0, 0.25};

// k H1(kr) + 2i/(pi r): the Hankel part of the double-layer kernel with its
// k-independent pole removed.
cplx k_r1(double k, double r) { return k * hankel1_1_nonsingular(k * r); }

cplx h0(double k, double r) {
  const BesselJY01 b = bessel_jy01(k * r);
  return {b.j0, b.y0};
}

struct PlainEval {
  double k;
  unsigned which;

  void operator()(Vec2 d, Vec2 nx, Vec2 ny, cplx* out) const {
    const double r = d.norm();
    const BesselJY01 b = bessel_jy01(k * r);
    const cplx H0{b.j0, b.y0}, H1{b.j1, b.y1};
    const double dy = dot(ny, d) / r, dx = dot(nx, d) / r;
    if (which & kOpS) out[0] = kQuarterI * H0;
    if (which & kOpD) out[1] = kQuarterI * k * H1 * dy;
    if (which & kOpN) out[2] = -kQuarterI * k * H1 * dx;
    if (which & kOpT) out[3] = kQuarterI * ((k * k * H0 - 2.0 * k * H1 / r) * dx * dy + k * H1 * dot(nx, ny) / r);
  }
};

// Kernels safe for r -> 0 along a smooth curve. With kb > 0 the result is
// the difference Op^{ka} - Op^{kb}; with kb == 0 it is the single-k operator
// (the Laplace parts that cancel in differences are added back).
struct SelfEval {
  double ka, kb;
  unsigned which;

  void operator()(Vec2 d, Vec2 nx, Vec2 ny, cplx* out) const {
    const double r = d.norm();
    if (r == 0.0) throw std::domain_error("coincident source and target");
    const double dy = dot(ny, d) / r, dx = dot(nx, d) / r;
    const bool diff = kb > 0.0;
    cplx r1 = (which & (kOpD | kOpN | kOpT)) ? k_r1(ka, r) : cplx{};
    if (diff && (which & (kOpD | kOpN | kOpT))) r1 -= k_r1(kb, r);
    if (which & kOpS) out[0] = kQuarterI * (diff ? h0(ka, r) - h0(kb, r) : h0(ka, r));
    if (which & kOpD) out[1] = kQuarterI * r1 * dy + (diff ? 0.0 : dy / (2.0 * kPi * r));
    if (which & kOpN) out[2] = -kQuarterI * r1 * dx - (diff ? 0.0 : dx / (2.0 * kPi * r));
    if (which & kOpT) {
      if (!diff) throw UnsupportedKernel("hypersingular operator on its own curve");
      const double c = dx * dy, e = dot(nx, ny);
      out[3] = kQuarterI * ((ka * ka * h0(ka, r) - kb * kb * h0(kb, r)) * c + r1 * (e - 2.0 * c) / r);
    }
  }
};

Vec2 copy_shift(const DiscretizedCurve& src, int l) {
  if (l == 0) return {};
  if (src.closure != Closure::periodic_phase || !src.param)
    throw std::invalid_argument("translated copies need a periodic source curve");
  return src.param->period_shift() * static_cast<double>(l);
}

void alloc(OperatorSet& ops, unsigned which, Eigen::Index rows, Eigen::Index cols) {
  if (which & kOpS) ops.S = CMat::Zero(rows, cols);
  if (which & kOpD) ops.D = CMat::Zero(rows, cols);
  if (which & kOpN) ops.N = CMat::Zero(rows, cols);
  if (which & kOpT) ops.T = CMat::Zero(rows, cols);
}

OperatorSet self_operators(const DiscretizedCurve& curve, double ka, double kb, unsigned which, cplx alpha,
                           int copies, const CorrectionRule& rule) {
  OperatorSet ops;
  const std::array<unsigned, 4> masks{kOpS, kOpD, kOpN, kOpT};
  std::array<CMat*, 4> dst{&ops.S, &ops.D, &ops.N, &ops.T};
  for (int q = 0; q < 4; ++q) {
    if (!(which & masks[q])) continue;
    const SelfEval one{ka, kb, masks[q]};
    auto kern = [&](int i, Vec2 d, Vec2 ny) {
      cplx out[4];
      one(d, curve.normals[i], ny, out);
      return out[q];
    };
    *dst[q] = nystrom_selfmatrix(kern, Singularity::log, curve, alpha, copies, rule);
  }
  return ops;
}

}  // namespace

KernelValues greens_kernel(double k, Vec2 x, Vec2 y, Vec2 nx, Vec2 ny) {
  const Vec2 d = x - y;
  if (d.norm() == 0.0) throw std::domain_error("greens_kernel: coincident points");
  cplx out[4];
  PlainEval{k, kOpS | kOpD | kOpN | kOpT}(d, nx, ny, out);
  return {out[0], out[1], out[2], out[3]};
}

CopyWeights phased_copies(cplx alpha, int copies) {
  CopyWeights w;
  for (int l = -copies; l <= copies; ++l) w.emplace_back(l, phase_pow(alpha, l));
  return w;
}

CopyWeights wall_copies(cplx alpha, int copies) {
  return {{copies, phase_pow(alpha, copies + 1)}, {-copies - 1, -phase_pow(alpha, -copies)}};
}

OperatorSet copy_operators(const DiscretizedCurve& src, const Targets& tgt, double k, unsigned which,
                           const CopyWeights& weights) {
  if ((which & (kOpN | kOpT)) && tgt.normals.size() != tgt.points.size())
    throw std::invalid_argument("normal-derivative operators need target normals");
  const auto m = static_cast<Eigen::Index>(tgt.size()), n = static_cast<Eigen::Index>(src.size());
  OperatorSet ops;
  alloc(ops, which, m, n);
  const PlainEval ev{k, which};
  std::vector<Vec2> shifts;
  for (const auto& [l, w] : weights) shifts.push_back(copy_shift(src, l));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec2 x = tgt.points[i];
    const Vec2 nx = tgt.normals.empty() ? Vec2{} : tgt.normals[i];
    for (std::size_t c = 0; c < weights.size(); ++c) {
      const cplx w = weights[c].second;
      for (Eigen::Index j = 0; j < n; ++j) {
        cplx out[4];
        ev(x - (src.nodes[j] + shifts[c]), nx, src.normals[j], out);
        const double wj = src.weights[j];
        if (which & kOpS) ops.S(i, j) += w * wj * out[0];
        if (which & kOpD) ops.D(i, j) += w * wj * out[1];
        if (which & kOpN) ops.N(i, j) += w * wj * out[2];
        if (which & kOpT) ops.T(i, j) += w * wj * out[3];
      }
    }
  }
  return ops;
}

OperatorSet boundary_operator_matrices(const DiscretizedCurve& src, const Targets& tgt, double k, unsigned which,
                                       cplx alpha, int copies, bool same_curve) {
  if (!same_curve) return copy_operators(src, tgt, k, which, phased_copies(alpha, copies));
  if (which & kOpT) throw UnsupportedKernel("hypersingular operator on its own curve; use a difference");
  return self_operators(src, k, 0.0, which, alpha, copies, alpert_rule(16));
}

OperatorSet difference_self_operators(const DiscretizedCurve& curve, double k_plus, double k_minus, cplx alpha,
                                      int copies, const CorrectionRule& rule) {
  if (!(k_plus > 0.0) || !(k_minus > 0.0)) throw std::invalid_argument("wavenumbers must be positive");
  return self_operators(curve, k_plus, k_minus, kOpS | kOpD | kOpN | kOpT, alpha, copies, rule);
}

CMat muller_self_block(const DiscretizedCurve& curve, double k_plus, double k_minus, cplx alpha, int copies,
                       const CorrectionRule& rule) {
  const auto n = static_cast<Eigen::Index>(curve.size());
  CMat a(2 * n, 2 * n);
  if (k_plus == k_minus) {
    a.setZero();
  } else {
    const OperatorSet d = difference_self_operators(curve, k_plus, k_minus, alpha, copies, rule);
    a.topLeftCorner(n, n) = d.D;
    a.topRightCorner(n, n) = d.S;
    a.bottomLeftCorner(n, n) = d.T;
    a.bottomRightCorner(n, n) = d.N;
  }
  a.topLeftCorner(n, n).diagonal().array() += 1.0;
  a.bottomRightCorner(n, n).diagonal().array() -= 1.0;
  return a;
}

FieldValues eval_layer_potentials(const DiscretizedCurve& src, const std::vector<cplx>& sigma,
                                  const std::vector<cplx>& mu, double k, const std::vector<Vec2>& targets,
                                  cplx alpha, int copies) {
  const std::size_t n = src.size();
  if ((!sigma.empty() && sigma.size() != n) || (!mu.empty() && mu.size() != n))
    throw std::invalid_argument("density length does not match the source curve");
  FieldValues f;
  f.value.assign(targets.size(), 0.0);
  f.gradient.assign(targets.size(), {cplx{}, cplx{}});
  const CopyWeights weights = phased_copies(alpha, copies);
  std::vector<Vec2> shifts;
  for (const auto& [l, w] : weights) shifts.push_back(copy_shift(src, l));
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < targets.size(); ++t) {
    cplx v{}, gx{}, gy{};
    for (std::size_t c = 0; c < weights.size(); ++c) {
      const cplx w = weights[c].second;
      for (std::size_t j = 0; j < n; ++j) {
        const Vec2 d = targets[t] - (src.nodes[j] + shifts[c]);
        const double r = d.norm();
        const BesselJY01 b = bessel_jy01(k * r);
        const cplx H0{b.j0, b.y0}, H1{b.j1, b.y1};
        const double wj = src.weights[j];
        if (!sigma.empty()) {
          const cplx s = w * wj * sigma[j];
          v += s * kQuarterI * H0;
          const cplx g = -s * kQuarterI * k * H1 / r;
          gx += g * d.x;
          gy += g * d.y;
        }
        if (!mu.empty()) {
          const Vec2 ny = src.normals[j];
          const double dn = dot(ny, d);
          const cplx m = w * wj * mu[j] * kQuarterI * k;
          v += m * H1 * dn / r;
          const cplx radial = m * (k * H0 - 2.0 * H1 / r) * dn / (r * r);
          const cplx tang = m * H1 / r;
          gx += radial * d.x + tang * ny.x;
          gy += radial * d.y + tang * ny.y;
        }
      }
    }
    f.value[t] = v;
    f.gradient[t] = {gx, gy};
  }
  return f;
}

}  // namespace qpg
