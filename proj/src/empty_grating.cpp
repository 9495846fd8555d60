#include "qpgrating/empty_grating.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "qpgrating/layerpot.hpp"
#include "qpgrating/quadrature.hpp"
#include "qpgrating/specialfn.hpp"

namespace qpg {

namespace {

// Writes sign * [[D S], [T N]] of a source curve into the rows of a target
// block (m value rows then m derivative rows) and the columns [mu; sigma].
void put_potentials(CMat& a, int r0, int c0, const OperatorSet& ops, double sign) {
  const auto m = ops.S.rows(), n = ops.S.cols();
  a.block(r0, c0, m, n) += sign * ops.D;
  a.block(r0, c0 + n, m, n) += sign * ops.S;
  a.block(r0 + m, c0, m, n) += sign * ops.T;
  a.block(r0 + m, c0 + n, m, n) += sign * ops.N;
}

// Regular-wave values and normal derivatives sum_t w_t J_n(k|x_t - c|) e^{in theta}
// at each target row, for n = -q..q, as value rows then derivative rows.
void put_jwaves(CMat& a, int r0, int c0, const std::vector<const Targets*>& tgts, const std::vector<cplx>& w,
                double k, Vec2 center, int q, double sign) {
  const auto m = static_cast<int>(tgts[0]->size());
  const int nj = 2 * q + 1;
  std::vector<cplx> val(nj), dx(nj), dy(nj);
  for (int i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < tgts.size(); ++s) {
      const Targets& t = *tgts[s];
      regular_waves(q, k, t.points[i] - center, val, dx, dy);
      const Vec2 nrm = t.normals[i];
      for (int j = 0; j < nj; ++j) {
        a(r0 + i, c0 + j) += sign * w[s] * val[j];
        a(r0 + m + i, c0 + j) += sign * w[s] * (nrm.x * dx[j] + nrm.y * dy[j]);
      }
    }
  }
}

Targets wall_targets(const DiscretizedCurve& c) { return Targets::of(c); }

double curve_spacing(const DiscretizedCurve& c) {
  double h = 0.0;
  for (double w : c.weights) h = std::max(h, w);
  return h;
}

}  // namespace

cplx vertical_wavenumber(double k, double kn) {
  const double s = k * k - kn * kn;
  return s >= 0.0 ? cplx(std::sqrt(s), 0.0) : cplx(0.0, std::sqrt(-s));
}

double kappa_n(const ProblemConfig& cfg, int n) { return cfg.kappa() + 2.0 * kPi * n / cfg.period; }

GratingGeometry build_geometry(const ProblemConfig& cfg) {
  GratingGeometry g;
  g.y0 = cfg.resolved_y0();
  g.gamma1 = sample_interface(cfg.upper, cfg.interface_nodes, cfg.period);
  g.gamma2 = sample_interface(cfg.lower, cfg.interface_nodes, cfg.period);
  g.walls = sample_walls_and_lids(cfg);
  g.centers[0] = {0.0, 0.5 * (g.y0 + cfg.upper.max_height(cfg.period))};
  g.centers[1] = {0.0, 0.5 * (cfg.upper.mean + cfg.lower.mean)};
  g.centers[2] = {0.0, 0.5 * (-g.y0 + cfg.lower.min_height(cfg.period))};
  return g;
}

cplx incident_field(const ProblemConfig& cfg, Vec2 x) {
  return std::exp(kI * cfg.k1 * (std::cos(cfg.theta) * x.x + std::sin(cfg.theta) * x.y));
}

std::array<cplx, 2> incident_gradient(const ProblemConfig& cfg, Vec2 x) {
  const cplx u = incident_field(cfg, x);
  return {kI * cfg.k1 * std::cos(cfg.theta) * u, kI * cfg.k1 * std::sin(cfg.theta) * u};
}

int layer_of(const ProblemConfig& cfg, Vec2 x) {
  if (x.y > cfg.upper.height(x.x, cfg.period)) return 1;
  if (x.y < cfg.lower.height(x.x, cfg.period)) return 3;
  return 2;
}

EmptySystem assemble_empty_system(const ProblemConfig& cfg, const GratingGeometry& geo) {
  EmptySystem sys;
  UnknownLayout& L = sys.layout;
  L.n1 = static_cast<int>(geo.gamma1.size());
  L.n2 = static_cast<int>(geo.gamma2.size());
  L.q = cfg.j_order;
  L.rb = cfg.rb_order;

  RowLayout& R = sys.rows;
  R.n1 = L.n1;
  R.n2 = L.n2;
  R.nw2 = static_cast<int>(geo.walls.left[1].size());
  R.nw1 = static_cast<int>(geo.walls.left[0].size());
  R.nw3 = static_cast<int>(geo.walls.left[2].size());
  R.nu = static_cast<int>(geo.walls.upper_lid.size());
  R.nd = static_cast<int>(geo.walls.lower_lid.size());
  R.gamma1 = 0;
  R.gamma2 = R.gamma1 + 2 * R.n1;
  R.wall2 = R.gamma2 + 2 * R.n2;
  R.wall1 = R.wall2 + 2 * R.nw2;
  R.wall3 = R.wall1 + 2 * R.nw1;
  R.lid_u = R.wall3 + 2 * R.nw3;
  R.lid_d = R.lid_u + 2 * R.nu;
  R.total = R.lid_d + 2 * R.nd;

  const cplx alpha = cfg.bloch_phase();
  const int P = cfg.copies;
  const double k1 = cfg.k1, k2 = cfg.k2, k3 = cfg.k3;
  const CorrectionRule& rule = alpert_rule(cfg.alpert_order);
  const auto& g1 = geo.gamma1;
  const auto& g2 = geo.gamma2;
  const Targets t1 = Targets::of(g1), t2 = Targets::of(g2);
  const auto& W = geo.walls;

  CMat& A = sys.A;
  A = CMat::Zero(R.total, L.total());

  // Interface transmission rows.
  A.block(R.gamma1, L.nu1(), 2 * L.n1, 2 * L.n1) = muller_self_block(g1, k1, k2, alpha, P, rule);
  put_potentials(A, R.gamma1, L.nu2(), boundary_operator_matrices(g2, t1, k2, kOpS | kOpD | kOpN | kOpT, alpha, P),
                 -1.0);
  put_jwaves(A, R.gamma1, L.a2(), {&t1}, {1.0}, k2, geo.centers[1], L.q, -1.0);
  put_jwaves(A, R.gamma1, L.a1(), {&t1}, {1.0}, k1, geo.centers[0], L.q, 1.0);

  A.block(R.gamma2, L.nu2(), 2 * L.n2, 2 * L.n2) = muller_self_block(g2, k2, k3, alpha, P, rule);
  put_potentials(A, R.gamma2, L.nu1(), boundary_operator_matrices(g1, t2, k2, kOpS | kOpD | kOpN | kOpT, alpha, P),
                 1.0);
  put_jwaves(A, R.gamma2, L.a2(), {&t2}, {1.0}, k2, geo.centers[1], L.q, 1.0);
  put_jwaves(A, R.gamma2, L.a3(), {&t2}, {1.0}, k3, geo.centers[2], L.q, -1.0);

  // Wall discrepancies alpha u(L) - u(R) and the same for d/dx.
  const CopyWeights wc = wall_copies(alpha, P);
  const unsigned all = kOpS | kOpD | kOpN | kOpT;
  {
    const Targets tl = wall_targets(W.left[1]), tr = wall_targets(W.right[1]);
    put_potentials(A, R.wall2, L.nu1(), copy_operators(g1, tl, k2, all, wc), 1.0);
    put_potentials(A, R.wall2, L.nu2(), copy_operators(g2, tl, k2, all, wc), 1.0);
    put_jwaves(A, R.wall2, L.a2(), {&tl, &tr}, {alpha, -1.0}, k2, geo.centers[1], L.q, 1.0);
  }
  {
    const Targets tl = wall_targets(W.left[0]), tr = wall_targets(W.right[0]);
    put_potentials(A, R.wall1, L.nu1(), copy_operators(g1, tl, k1, all, wc), 1.0);
    put_jwaves(A, R.wall1, L.a1(), {&tl, &tr}, {alpha, -1.0}, k1, geo.centers[0], L.q, 1.0);
  }
  {
    const Targets tl = wall_targets(W.left[2]), tr = wall_targets(W.right[2]);
    put_potentials(A, R.wall3, L.nu2(), copy_operators(g2, tl, k3, all, wc), 1.0);
    put_jwaves(A, R.wall3, L.a3(), {&tl, &tr}, {alpha, -1.0}, k3, geo.centers[2], L.q, 1.0);
  }

  // Lids: representation minus Rayleigh-Bloch sums, values and d/dy.
  {
    const Targets tu = Targets::of(W.upper_lid);
    put_potentials(A, R.lid_u, L.nu1(), boundary_operator_matrices(g1, tu, k1, all, alpha, P), 1.0);
    put_jwaves(A, R.lid_u, L.a1(), {&tu}, {1.0}, k1, geo.centers[0], L.q, 1.0);
    const Targets td = Targets::of(W.lower_lid);
    put_potentials(A, R.lid_d, L.nu2(), boundary_operator_matrices(g2, td, k3, all, alpha, P), 1.0);
    put_jwaves(A, R.lid_d, L.a3(), {&td}, {1.0}, k3, geo.centers[2], L.q, 1.0);
    for (int n = -L.rb; n <= L.rb; ++n) {
      const double kn = kappa_n(cfg, n);
      const cplx k1n = vertical_wavenumber(k1, kn), k3n = vertical_wavenumber(k3, kn);
      for (int i = 0; i < R.nu; ++i) {
        const cplx e = std::exp(kI * kn * W.upper_lid.nodes[i].x);
        A(R.lid_u + i, L.c() + n + L.rb) = -e;
        A(R.lid_u + R.nu + i, L.c() + n + L.rb) = -kI * k1n * e;
      }
      for (int i = 0; i < R.nd; ++i) {
        const cplx e = std::exp(kI * kn * W.lower_lid.nodes[i].x);
        A(R.lid_d + i, L.d() + n + L.rb) = -e;
        A(R.lid_d + R.nd + i, L.d() + n + L.rb) = kI * k3n * e;
      }
    }
  }

  // Incident data on the upper interface.
  sys.f = CVec::Zero(R.total);
  for (int i = 0; i < L.n1; ++i) {
    const Vec2 x = g1.nodes[i];
    const auto grad = incident_gradient(cfg, x);
    sys.f(R.gamma1 + i) = -incident_field(cfg, x);
    sys.f(R.gamma1 + L.n1 + i) = -(g1.normals[i].x * grad[0] + g1.normals[i].y * grad[1]);
  }

  sys.col_scale = Eigen::VectorXd::Ones(L.total());
  if (cfg.column_scaling) {
    for (int j = L.a2(); j < L.total(); ++j) {
      const double s = A.col(j).cwiseAbs().maxCoeff();
      if (s > 0.0) {
        sys.col_scale(j) = 1.0 / s;
        A.col(j) *= sys.col_scale(j);
      }
    }
  }
  sys.row_scale = Eigen::VectorXd::Ones(R.total);
  if (cfg.row_scaling) {
    for (int i = 0; i < R.total; ++i) {
      const double s = A.row(i).cwiseAbs().maxCoeff();
      if (s > 0.0) {
        sys.row_scale(i) = 1.0 / s;
        A.row(i) *= sys.row_scale(i);
      }
    }
  }
  sys.eps = cfg.regularization;
  return sys;
}

void factorize(EmptySystem& sys) {
  const auto m = static_cast<lapack_int>(sys.A.rows()), n = static_cast<lapack_int>(sys.A.cols());
  const lapack_int mn = std::min(m, n);
  CMat a = sys.A;
  sys.U.resize(m, mn);
  CMat vt(mn, n);
  sys.sigma.resize(mn);
  const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, sys.sigma.data(), sys.U.data(),
                                         m, vt.data(), mn);
  if (info != 0) throw NumericalError("SVD did not converge (zgesdd info " + std::to_string(info) + ")");
  sys.V = vt.adjoint();
  sys.factorized = true;
}

CVec apply_pinv(const EmptySystem& sys, const CVec& g) {
  if (!sys.factorized) throw std::logic_error("apply_pinv: system not factorized");
  CVec t = sys.U.adjoint() * g.cwiseProduct(sys.row_scale);
  for (Eigen::Index j = 0; j < t.size(); ++j) t(j) *= std::min(1.0 / sys.sigma(j), 1.0 / sys.eps);
  CVec z = sys.V * t;
  return z.cwiseProduct(sys.col_scale);
}

CVec apply_physical(const EmptySystem& sys, const CVec& alpha) {
  return (sys.A * alpha.cwiseQuotient(sys.col_scale)).cwiseQuotient(sys.row_scale);
}

EmptySolution solve_empty(const ProblemConfig& cfg, const GratingGeometry& geo, EmptySystem& sys) {
  (void)cfg;
  (void)geo;
  if (!sys.factorized) factorize(sys);
  EmptySolution s;
  s.alpha = apply_pinv(sys, sys.f);
  s.residual = (apply_physical(sys, s.alpha) - sys.f).norm() / sys.f.norm();
  return s;
}

cplx eval_rayleigh_bloch(const ProblemConfig& cfg, const UnknownLayout& L, const CVec& alpha, double y0, Vec2 x) {
  cplx u{};
  const bool up = x.y >= 0.0;
  for (int n = -L.rb; n <= L.rb; ++n) {
    const double kn = kappa_n(cfg, n);
    if (up) {
      u += alpha(L.c() + n + L.rb) * std::exp(kI * kn * x.x + kI * vertical_wavenumber(cfg.k1, kn) * (x.y - y0));
    } else {
      u += alpha(L.d() + n + L.rb) * std::exp(kI * kn * x.x - kI * vertical_wavenumber(cfg.k3, kn) * (x.y + y0));
    }
  }
  return u;
}

FieldSample eval_empty_field(const ProblemConfig& cfg, const GratingGeometry& geo, const UnknownLayout& L,
                             const CVec& alpha, const std::vector<Vec2>& points, bool add_incident,
                             bool representation_only) {
  const std::size_t np = points.size();
  FieldSample out;
  out.value.assign(np, 0.0);
  out.layer.assign(np, 0);
  out.mask.assign(np, kMaskNone);
  const double d = cfg.period;
  const double h1 = 5.0 * curve_spacing(geo.gamma1), h2 = 5.0 * curve_spacing(geo.gamma2);

  std::array<std::vector<std::size_t>, 3> idx;
  for (std::size_t i = 0; i < np; ++i) {
    const Vec2 x = points[i];
    out.layer[i] = layer_of(cfg, x);
    if (distance_to_profile(cfg.upper, d, x) < h1 || distance_to_profile(cfg.lower, d, x) < h2) {
      out.mask[i] = kMaskNearCurve;
      continue;
    }
    if (!representation_only && std::abs(x.y) > geo.y0) {
      out.value[i] = eval_rayleigh_bloch(cfg, L, alpha, geo.y0, x);
      if (add_incident && out.layer[i] == 1) out.value[i] += incident_field(cfg, x);
      continue;
    }
    idx[out.layer[i] - 1].push_back(i);
  }

  auto density = [&](int off, int n) {
    std::vector<cplx> mu(alpha.data() + off, alpha.data() + off + n);
    std::vector<cplx> sigma(alpha.data() + off + n, alpha.data() + off + 2 * n);
    return std::pair{mu, sigma};
  };
  const auto [mu1, sigma1] = density(L.nu1(), L.n1);
  const auto [mu2, sigma2] = density(L.nu2(), L.n2);
  const cplx a = cfg.bloch_phase();
  const int P = cfg.copies;
  const std::array<double, 3> ks{cfg.k1, cfg.k2, cfg.k3};
  const std::array<int, 3> joff{L.a1(), L.a2(), L.a3()};

  for (int layer = 0; layer < 3; ++layer) {
    if (idx[layer].empty()) continue;
    std::vector<Vec2> pts;
    for (auto i : idx[layer]) pts.push_back(points[i]);
    std::vector<cplx> acc(pts.size(), 0.0);
    const double k = ks[layer];
    if (layer <= 1) {
      const FieldValues f = eval_layer_potentials(geo.gamma1, sigma1, mu1, k, pts, a, P);
      for (std::size_t t = 0; t < pts.size(); ++t) acc[t] += f.value[t];
    }
    if (layer >= 1) {
      const FieldValues f = eval_layer_potentials(geo.gamma2, sigma2, mu2, k, pts, a, P);
      for (std::size_t t = 0; t < pts.size(); ++t) acc[t] += f.value[t];
    }
    std::vector<cplx> w(L.jsize());
    for (std::size_t t = 0; t < pts.size(); ++t) {
      regular_waves(L.q, k, pts[t] - geo.centers[layer], w);
      for (int j = 0; j < L.jsize(); ++j) acc[t] += alpha(joff[layer] + j) * w[j];
      const std::size_t i = idx[layer][t];
      out.value[i] = acc[t];
      if (add_incident && layer == 0) out.value[i] += incident_field(cfg, pts[t]);
    }
  }
  return out;
}

}  // namespace qpg
