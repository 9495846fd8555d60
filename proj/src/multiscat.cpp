#include "qpgrating/multiscat.hpp"

#include <stdexcept>

#include "qpgrating/layerpot.hpp"
#include "qpgrating/parallel.hpp"
#include "qpgrating/specialfn.hpp"

namespace qpg {

namespace {

constexpr cplx kQuarterI{0.0, 0.25};

// Beyond this many particles the pair symbols are recomputed on every
// application instead of being stored.
constexpr int kMaxStoredParticles = 400;

double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }

// t_q = sum over copies of w_l H_q(k rho_l) e^{iq phi_l}, q = -2p..2p.
void pair_symbol(const ParticleArray& arr, int target, int source, cplx* out) {
  const int p2 = 2 * arr.p, ns = 2 * p2 + 1;
  std::vector<cplx> v(ns);
  for (int q = 0; q < ns; ++q) out[q] = 0.0;
  for (int l = -arr.copies; l <= arr.copies; ++l) {
    if (l == 0 && source == target) continue;
    const Vec2 src = arr.centers[source] + Vec2{l * arr.period, 0.0};
    const Vec2 rel = arr.centers[target] - src;
    if (rel.norm() <= 2.0 * arr.radius)
      throw std::domain_error("particle disks overlap (particles " + std::to_string(source) + ", " +
                              std::to_string(target) + ")");
    outgoing_waves(p2, arr.k, rel, v);
    const cplx w = phase_pow(arr.alpha, l);
    for (int q = 0; q < ns; ++q) out[q] += w * v[q];
  }
}

// a_v += sum_n t_{n-v} b_n
void toeplitz_apply(int p, const cplx* t, const cplx* b, cplx* a) {
  const int p2 = 2 * p;
  for (int v = -p; v <= p; ++v) {
    cplx acc{};
    for (int n = -p; n <= p; ++n) acc += t[n - v + p2] * b[n + p];
    a[v + p] += acc;
  }
}

}  // namespace

CMat m2l_matrix(Vec2 from, Vec2 to, double k, int p) {
  const int m = 2 * p + 1;
  std::vector<cplx> v(2 * (2 * p) + 1);
  outgoing_waves(2 * p, k, to - from, v);
  CMat t(m, m);
  for (int nu = -p; nu <= p; ++nu)
    for (int n = -p; n <= p; ++n) t(nu + p, n + p) = v[n - nu + 2 * p];
  return t;
}

CVec m2l_translate(const CVec& beta, Vec2 from, Vec2 to, double k, int p, double r_from, double r_to) {
  if ((to - from).norm() <= r_from + r_to) throw std::domain_error("m2l_translate: disks overlap");
  if (beta.size() != 2 * p + 1) throw std::invalid_argument("m2l_translate: coefficient length");
  return m2l_matrix(from, to, k, p) * beta;
}

CMat l2l_matrix(Vec2 from, Vec2 to, double k, int p_in, int p_out) {
  const int s = p_in + p_out;
  std::vector<cplx> v(2 * s + 1);
  regular_waves(s, k, to - from, v);
  CMat t(2 * p_out + 1, 2 * p_in + 1);
  for (int nu = -p_out; nu <= p_out; ++nu)
    for (int n = -p_in; n <= p_in; ++n) t(nu + p_out, n + p_in) = v[n - nu + s];
  return t;
}

CVec l2l_translate(const CVec& gamma, Vec2 from, Vec2 to, double k, int p_out) {
  const auto p_in = static_cast<int>((gamma.size() - 1) / 2);
  return l2l_matrix(from, to, k, p_in, p_out) * gamma;
}

CVec plane_wave_local_coeffs(double psi, double k, Vec2 center, int p) {
  CVec a(2 * p + 1);
  const cplx base = std::exp(kI * k * (std::cos(psi) * center.x + std::sin(psi) * center.y));
  for (int n = -p; n <= p; ++n) a(n + p) = base * phase_pow(kI, n) * std::polar(1.0, -n * psi);
  return a;
}

cplx eval_regular_expansion(const CVec& a, Vec2 center, double k, Vec2 x) {
  const auto p = static_cast<int>((a.size() - 1) / 2);
  std::vector<cplx> v(a.size());
  regular_waves(p, k, x - center, v);
  cplx u{};
  for (Eigen::Index j = 0; j < a.size(); ++j) u += a(j) * v[j];
  return u;
}

cplx eval_outgoing_expansion(const CVec& b, Vec2 center, double k, Vec2 x) {
  const auto p = static_cast<int>((b.size() - 1) / 2);
  std::vector<cplx> v(b.size());
  outgoing_waves(p, k, x - center, v);
  cplx u{};
  for (Eigen::Index j = 0; j < b.size(); ++j) u += b(j) * v[j];
  return u;
}

ParticleArray make_particle_array(const ProblemConfig& cfg, const ParticleSet& set) {
  ParticleArray arr;
  for (const auto& pl : set.placements) {
    arr.centers.push_back(pl.center);
    arr.rotations.push_back(pl.rotation);
  }
  arr.radius = set.radius;
  arr.p = cfg.multipole_order;
  arr.k = cfg.k2;
  arr.alpha = cfg.bloch_phase();
  arr.copies = cfg.copies;
  arr.period = cfg.period;
  return arr;
}

TranslationOperator::TranslationOperator(const ParticleArray& arr) : m_(arr.count()), p_(arr.p) {
  const int ns = 4 * p_ + 1;
  if (m_ > kMaxStoredParticles) {
    arr_ = arr;
    // Still validate the geometry once.
    std::vector<cplx> t(ns);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) pair_symbol(arr, i, j, t.data());
    return;
  }
  symbols_.assign(static_cast<std::size_t>(m_) * m_ * ns, 0.0);
  ExceptionSlot err;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < m_; ++i)
    err.run([&] {
      for (int j = 0; j < m_; ++j) pair_symbol(arr, i, j, &symbols_[(static_cast<std::size_t>(i) * m_ + j) * ns]);
    });
  err.rethrow();
}

CVec TranslationOperator::apply(const CVec& beta) const {
  const int b = 2 * p_ + 1, ns = 4 * p_ + 1;
  if (beta.size() != static_cast<Eigen::Index>(m_) * b) throw std::invalid_argument("apply_T: coefficient length");
  CVec out = CVec::Zero(beta.size());
  const bool stored = !symbols_.empty() || m_ == 0;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m_; ++i) {
    std::vector<cplx> t(stored ? 0 : ns);
    for (int j = 0; j < m_; ++j) {
      const cplx* sym;
      if (stored) {
        sym = &symbols_[(static_cast<std::size_t>(i) * m_ + j) * ns];
      } else {
        pair_symbol(arr_, i, j, t.data());
        sym = t.data();
      }
      toeplitz_apply(p_, sym, beta.data() + static_cast<Eigen::Index>(j) * b, out.data() + static_cast<Eigen::Index>(i) * b);
    }
  }
  return out;
}

CVec apply_T(const ParticleArray& arr, const CVec& beta) { return TranslationOperator(arr).apply(beta); }

CMat source_to_local_block(const ParticleArray& arr, const GratingGeometry& geo, const UnknownLayout& L) {
  const int b = arr.block(), p = arr.p;
  CMat B = CMat::Zero(arr.size(), L.a2() + L.jsize());
  const std::array<const DiscretizedCurve*, 2> curves{&geo.gamma1, &geo.gamma2};
  const std::array<int, 2> offs{L.nu1(), L.nu2()};

  ExceptionSlot err;
#pragma omp parallel for schedule(dynamic)
  for (int m = 0; m < arr.count(); ++m) err.run([&] {
    const Vec2 c = arr.centers[m];
    const int r0 = m * b;
    std::vector<cplx> val(b), dx(b), dy(b);
    for (int s = 0; s < 2; ++s) {
      const DiscretizedCurve& g = *curves[s];
      const int n = static_cast<int>(g.size());
      for (int l = -arr.copies; l <= arr.copies; ++l) {
        const cplx wl = kQuarterI * phase_pow(arr.alpha, l);
        const Vec2 shift{l * arr.period, 0.0};
        for (int j = 0; j < n; ++j) {
          const Vec2 rel = g.nodes[j] + shift - c;
          if (rel.norm() <= arr.radius)
            throw std::domain_error("interface node inside particle disk " + std::to_string(m));
          outgoing_waves(p, arr.k, rel, val, dx, dy);
          const Vec2 ny = g.normals[j];
          const cplx w = wl * g.weights[j];
          // G = (i/4) sum_v H_v(k|y-c|) e^{-iv theta_{y-c}} J_v(k|x-c|) e^{iv theta_{x-c}},
          // with H_v e^{-iv theta} = (-1)^v H_{-v} e^{-iv theta}.
          for (int v = -p; v <= p; ++v) {
            const int q = -v + p;
            const cplx sv = w * parity(v);
            B(r0 + v + p, offs[s] + n + j) += sv * val[q];
            B(r0 + v + p, offs[s] + j) += sv * (ny.x * dx[q] + ny.y * dy[q]);
          }
        }
      }
    }
    B.block(r0, L.a2(), b, L.jsize()) = l2l_matrix(geo.centers[1], c, arr.k, L.q, p);
  });
  err.rethrow();
  return B;
}

namespace {

// Writes sign * sum_w w * [values; normal derivatives] of the outgoing waves
// of every particle copy into rows r0.. (m value rows then m derivative rows).
void put_multipoles(CMat& C, int r0, const ParticleArray& arr, const DiscretizedCurve& tgt, const CopyWeights& wts,
                    double sign, bool check) {
  const int b = arr.block(), p = arr.p;
  const int nt = static_cast<int>(tgt.size());
  ExceptionSlot err;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nt; ++i) err.run([&] {
    std::vector<cplx> val(b), dx(b), dy(b);
    const Vec2 x = tgt.nodes[i], nx = tgt.normals[i];
    for (int m = 0; m < arr.count(); ++m) {
      for (const auto& [l, w] : wts) {
        const Vec2 rel = x - (arr.centers[m] + Vec2{l * arr.period, 0.0});
        if (check && rel.norm() <= arr.radius)
          throw std::domain_error("interface node inside particle disk " + std::to_string(m));
        outgoing_waves(p, arr.k, rel, val, dx, dy);
        const cplx sw = sign * w;
        for (int n = 0; n < b; ++n) {
          C(r0 + i, m * b + n) += sw * val[n];
          C(r0 + nt + i, m * b + n) += sw * (nx.x * dx[n] + nx.y * dy[n]);
        }
      }
    }
  });
  err.rethrow();
}

}  // namespace

CMat multipole_to_targets_block(const ParticleArray& arr, const GratingGeometry& geo, const RowLayout& R) {
  CMat C = CMat::Zero(R.wall1, arr.size());
  const CopyWeights near = phased_copies(arr.alpha, arr.copies);
  put_multipoles(C, R.gamma1, arr, geo.gamma1, near, -1.0, true);
  put_multipoles(C, R.gamma2, arr, geo.gamma2, near, 1.0, true);
  put_multipoles(C, R.wall2, arr, geo.walls.left[1], wall_copies(arr.alpha, arr.copies), 1.0, false);
  return C;
}

CMat multipole_wall_rows_direct(const ParticleArray& arr, const DiscretizedCurve& left, const DiscretizedCurve& right) {
  CMat C = CMat::Zero(2 * static_cast<Eigen::Index>(left.size()), arr.size());
  CopyWeights wl = phased_copies(arr.alpha, arr.copies);
  for (auto& [l, w] : wl) w *= arr.alpha;
  put_multipoles(C, 0, arr, left, wl, 1.0, true);
  put_multipoles(C, 0, arr, right, phased_copies(arr.alpha, arr.copies), -1.0, true);
  return C;
}

cplx eval_particle_multipoles(const ParticleArray& arr, const CVec& beta, Vec2 x) {
  const int b = arr.block();
  cplx u{};
  std::vector<cplx> v(b);
  for (int m = 0; m < arr.count(); ++m) {
    for (int l = -arr.copies; l <= arr.copies; ++l) {
      outgoing_waves(arr.p, arr.k, x - (arr.centers[m] + Vec2{l * arr.period, 0.0}), v);
      const cplx w = phase_pow(arr.alpha, l);
      for (int n = 0; n < b; ++n) u += w * beta(m * b + n) * v[n];
    }
  }
  return u;
}

}  // namespace qpg
