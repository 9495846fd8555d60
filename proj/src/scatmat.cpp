#include "qpgrating/scatmat.hpp"

#include <stdexcept>

#include "qpgrating/layerpot.hpp"
#include "qpgrating/quadrature.hpp"
#include "qpgrating/specialfn.hpp"

namespace qpg {

ParticleSolver::ParticleSolver(DiscretizedCurve curve, double k2, double kp, int alpert_order)
    : curve_(std::move(curve)), k2_(k2), kp_(kp) {
  if (curve_.closure != Closure::closed) throw std::invalid_argument("particle boundary must be a closed curve");
  if (!(k2 > 0.0) || !(kp > 0.0)) throw std::invalid_argument("wavenumbers must be positive");
  // Normal is outward, so the exterior (k2) is the plus side.
  a_ = muller_self_block(curve_, k2, kp, 1.0, 0, alpert_rule(alpert_order));
  lu_.compute(a_);
  if (!a_.allFinite() || lu_.rcond() < 1e-14) throw NumericalError("particle transmission system is singular");
}

MullerDensities ParticleSolver::solve(const CVec& u_inc, const CVec& dn_inc) const {
  const auto n = static_cast<Eigen::Index>(curve_.size());
  if (u_inc.size() != n || dn_inc.size() != n) throw std::invalid_argument("incident trace length mismatch");
  CVec rhs(2 * n);
  rhs << -u_inc, -dn_inc;
  const CVec x = lu_.solve(rhs);
  MullerDensities d;
  d.mu = x.head(n);
  d.sigma = x.tail(n);
  d.residual = (a_ * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  return d;
}

MullerDensities solve_muller_particle(const DiscretizedCurve& curve, double k2, double kp, const CVec& u_inc,
                                      const CVec& dn_inc) {
  return ParticleSolver(curve, k2, kp).solve(u_inc, dn_inc);
}

std::vector<cplx> eval_particle_field(const DiscretizedCurve& curve, const MullerDensities& dens, double k,
                                      const std::vector<Vec2>& points) {
  const std::vector<cplx> mu(dens.mu.data(), dens.mu.data() + dens.mu.size());
  const std::vector<cplx> sigma(dens.sigma.data(), dens.sigma.data() + dens.sigma.size());
  return eval_layer_potentials(curve, sigma, mu, k, points).value;
}

ScatteringMatrix scattering_matrix(const ParticleShape& shape, double k2, double kp, int p, int nodes,
                                   bool keep_densities) {
  shape.validate();
  if (p < 0) throw std::invalid_argument("negative truncation order");
  ScatteringMatrix out;
  out.p = p;
  out.k2 = k2;
  out.kp = kp;
  out.shape = shape;
  out.nodes = nodes;
  const int m = 2 * p + 1;
  out.s = CMat::Zero(m, m);
  if (keep_densities) out.columns.resize(m);

  const ParticleSolver solver(sample_particle(shape, {0.0, 0.0}, 0.0, nodes), k2, kp);
  const DiscretizedCurve& c = solver.curve();
  const auto nn = static_cast<Eigen::Index>(c.size());

  // Regular waves at the nodes: wave(i, n + p) = J_n e^{in theta}, and its
  // normal derivative.
  CMat wave(nn, m), dwave(nn, m);
  std::vector<cplx> val(m), dx(m), dy(m);
  for (Eigen::Index i = 0; i < nn; ++i) {
    regular_waves(p, k2, c.nodes[i], val, dx, dy);
    for (int j = 0; j < m; ++j) {
      wave(i, j) = val[j];
      dwave(i, j) = c.normals[i].x * dx[j] + c.normals[i].y * dy[j];
    }
  }

#pragma omp parallel for schedule(dynamic)
  for (int n = -p; n <= p; ++n) {
    const MullerDensities d = solver.solve(wave.col(n + p), dwave.col(n + p));
    for (int l = -p; l <= p; ++l) {
      // J_l e^{-il theta} = (-1)^l J_{-l} e^{-il theta}
      const double sgn = (l % 2 == 0) ? 1.0 : -1.0;
      cplx acc{};
      for (Eigen::Index i = 0; i < nn; ++i)
        acc += c.weights[i] * (wave(i, -l + p) * d.sigma(i) + dwave(i, -l + p) * d.mu(i));
      out.s(l + p, n + p) = cplx(0.0, 0.25) * sgn * acc;
    }
    if (keep_densities) out.columns[n + p] = d;
  }
  if (!out.s.allFinite()) throw NumericalError("non-finite scattering matrix entries");
  return out;
}

ScatteringMatrix rotate_scattering_matrix(const ScatteringMatrix& s, double phi) {
  ScatteringMatrix r = s;
  for (int l = -s.p; l <= s.p; ++l)
    for (int n = -s.p; n <= s.p; ++n) r.s(l + s.p, n + s.p) *= std::polar(1.0, phi * (l - n));
  return r;
}

CMat placed_scattering_matrix(const ScatteringMatrix& s, double phi) { return rotate_scattering_matrix(s, -phi).s; }

cplx disk_scattering_coefficient(int n, double radius, double k2, double kp) {
  const double x = k2 * radius, xp = kp * radius;
  const double j = bessel_j(n, x), jp = bessel_j(n, xp);
  const double dj = 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
  const double djp = 0.5 * (bessel_j(n - 1, xp) - bessel_j(n + 1, xp));
  const cplx h = hankel1(n, x);
  const cplx dh = 0.5 * (hankel1(n - 1, x) - hankel1(n + 1, x));
  return (k2 * dj * jp - kp * djp * j) / (kp * djp * h - k2 * dh * jp);
}

MullerDensities particle_densities(const ScatteringMatrix& s, double rotation, const CVec& incoming) {
  if (s.columns.empty()) throw std::logic_error("scattering matrix was built without densities");
  MullerDensities d;
  d.mu = CVec::Zero(s.columns[0].mu.size());
  d.sigma = CVec::Zero(s.columns[0].sigma.size());
  for (int n = -s.p; n <= s.p; ++n) {
    const cplx a = std::polar(1.0, n * rotation) * incoming(n + s.p);
    d.mu += a * s.columns[n + s.p].mu;
    d.sigma += a * s.columns[n + s.p].sigma;
  }
  return d;
}

}  // namespace qpg
