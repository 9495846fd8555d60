#include <doctest.h>

#include <functional>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include "qpgrating/multiscat.hpp"
#include "qpgrating/scatmat.hpp"
#include "qpgrating/specialfn.hpp"

using namespace qpg;
namespace bm = boost::math;

namespace {

const ParticleShape kPar1{0.0309, 0.0103, 3};

cplx boost_h(int n, double x) { return {bm::cyl_bessel_j(n, x), bm::cyl_neumann(n, x)}; }
cplx boost_dh(int n, double x) { return {bm::cyl_bessel_j_prime(n, x), bm::cyl_neumann_prime(n, x)}; }

// Outside: J_n(k2 r) + s H_n(k2 r); inside: c J_n(kp r). Value and radial
// derivative continuous at r = R.
cplx disk_oracle(int n, double radius, double k2, double kp) {
  const double j = bm::cyl_bessel_j(n, k2 * radius), dj = bm::cyl_bessel_j_prime(n, k2 * radius);
  const double jp = bm::cyl_bessel_j(n, kp * radius), djp = bm::cyl_bessel_j_prime(n, kp * radius);
  const cplx h = boost_h(n, k2 * radius), dh = boost_dh(n, k2 * radius);
  return (k2 * dj * jp - kp * j * djp) / (kp * h * djp - k2 * dh * jp);
}

CVec traces(const DiscretizedCurve& c, const std::function<WaveValue(Vec2)>& f, CVec& dn) {
  const auto n = static_cast<Eigen::Index>(c.size());
  CVec u(n);
  dn.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const WaveValue w = f(c.nodes[i]);
    u(i) = w.value;
    dn(i) = c.normals[i].x * w.gradient[0] + c.normals[i].y * w.gradient[1];
  }
  return u;
}

WaveValue plane_wave(double k, double psi, Vec2 x) {
  const cplx v = std::exp(cplx(0.0, k * (std::cos(psi) * x.x + std::sin(psi) * x.y)));
  return {v, {kI * k * std::cos(psi) * v, kI * k * std::sin(psi) * v}};
}

}  // namespace

TEST_CASE("disk scattering matrix matches separation of variables") {
  const double radius = 0.05, k2 = 8.0, kp = 30.0;
  const ScatteringMatrix s = scattering_matrix({radius, 0.0, 3}, k2, kp, 10, 300);
  REQUIRE(s.s.rows() == 21);
  for (int l = -10; l <= 10; ++l)
    for (int n = -10; n <= 10; ++n) {
      CAPTURE(l);
      CAPTURE(n);
      const cplx ref = l == n ? disk_oracle(n, radius, k2, kp) : cplx{};
      CHECK(std::abs(s.at(l, n) - ref) <= 1e-10);
    }
  for (int n = -10; n <= 10; ++n)
    CHECK(std::abs(disk_scattering_coefficient(n, radius, k2, kp) - disk_oracle(n, radius, k2, kp)) <= 1e-14);
}

TEST_CASE("scattering matrix predicts the directly computed scattered field") {
  const double k2 = 8.0, kp = 30.0, psi = -1.1;
  const ScatteringMatrix s = scattering_matrix(kPar1, k2, kp, 10, 300);
  const DiscretizedCurve c = sample_particle(kPar1, {0.0, 0.0}, 0.0, 300);
  CVec dn;
  const CVec u = traces(c, [&](Vec2 x) { return plane_wave(k2, psi, x); }, dn);
  const MullerDensities d = solve_muller_particle(c, k2, kp, u, dn);
  const CVec b = s.s * plane_wave_local_coeffs(psi, k2, {0.0, 0.0}, 10);
  std::vector<Vec2> probes;
  for (int i = 0; i < 20; ++i) {
    const double r = 0.1 + 0.02 * i, t = 0.37 * i;
    probes.push_back({r * std::cos(t), r * std::sin(t)});
  }
  const auto direct = eval_particle_field(c, d, k2, probes);
  double scale = 0.0;
  for (const cplx& v : direct) scale = std::max(scale, std::abs(v));
  CHECK(scale > 1e-4);
  for (std::size_t i = 0; i < probes.size(); ++i)
    CHECK(std::abs(eval_outgoing_expansion(b, {0.0, 0.0}, k2, probes[i]) - direct[i]) <= 1e-8);
}

TEST_CASE("mirror symmetry of the trefoil") {
  // r(t) = a1 + a2 cos(a3 t) is even in t; reflection y -> -y maps
  // J_n e^{in theta} to (-1)^n J_{-n} e^{-in theta}.
  const ScatteringMatrix s = scattering_matrix(kPar1, 8.0, 30.0, 10, 300);
  double scale = s.s.cwiseAbs().maxCoeff();
  for (int l = -10; l <= 10; ++l)
    for (int n = -10; n <= 10; ++n) {
      const double sign = ((l + n) % 2 == 0) ? 1.0 : -1.0;
      CHECK(std::abs(s.at(-l, -n) - sign * s.at(l, n)) <= 1e-12 * scale);
    }
}

TEST_CASE("truncation decay at the default size") {
  const ScatteringMatrix s = scattering_matrix(kPar1, 8.0, 30.0, 10, 300);
  CHECK(std::abs(s.at(10, 10)) / s.s.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(std::abs(s.at(-10, -10)) / s.s.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("rotation phases") {
  const ScatteringMatrix s = scattering_matrix(kPar1, 8.0, 30.0, 6, 300);
  CHECK((rotate_scattering_matrix(s, 0.0).s - s.s).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rotate_scattering_matrix(s, 2.0 * kPi).s - s.s).cwiseAbs().maxCoeff() <= 1e-14);
  const ScatteringMatrix disk = scattering_matrix({0.04, 0.0, 3}, 8.0, 30.0, 6, 300);
  CHECK((rotate_scattering_matrix(disk, 1.234).s - disk.s).cwiseAbs().maxCoeff() <= 1e-15);

  SUBCASE("placed matrix equals the matrix of the physically rotated particle") {
    const double phi = 0.7, k2 = 8.0, kp = 30.0;
    const int p = 6;
    const DiscretizedCurve c = sample_particle(kPar1, {0.0, 0.0}, phi, 300);
    const ParticleSolver solver(c, k2, kp);
    const CMat placed = placed_scattering_matrix(s, phi);
    for (int n = -p; n <= p; ++n) {
      CVec dn;
      const CVec u = traces(c, [&](Vec2 x) { return eval_regular_wave(n, k2, {0.0, 0.0}, x); }, dn);
      const MullerDensities d = solver.solve(u, dn);
      for (int l = -p; l <= p; ++l) {
        // J_l(k r) e^{-il theta} = (-1)^l J_{-l}(k r) e^{-il theta}
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        cplx acc{};
        for (std::size_t i = 0; i < c.size(); ++i) {
          const WaveValue w = eval_regular_wave(-l, k2, {0.0, 0.0}, c.nodes[i]);
          const cplx dnw = c.normals[i].x * w.gradient[0] + c.normals[i].y * w.gradient[1];
          acc += c.weights[i] * (w.value * d.sigma(static_cast<Eigen::Index>(i)) + dnw * d.mu(static_cast<Eigen::Index>(i)));
        }
        CAPTURE(l);
        CAPTURE(n);
        CHECK(std::abs(0.25 * kI * sign * acc - placed(l + p, n + p)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("single-particle transmission solver") {
  SUBCASE("no contrast scatters nothing") {
    const DiscretizedCurve c = sample_particle(kPar1, {0.0, 0.0}, 0.3, 300);
    CVec dn;
    const CVec u = traces(c, [](Vec2 x) { return plane_wave(8.0, 0.4, x); }, dn);
    const MullerDensities d = solve_muller_particle(c, 8.0, 8.0, u, dn);
    std::vector<Vec2> probes;
    for (int i = 0; i < 12; ++i) probes.push_back({0.2 * std::cos(0.5 * i), 0.2 * std::sin(0.5 * i)});
    for (const cplx& v : eval_particle_field(c, d, 8.0, probes)) CHECK(std::abs(v) <= 1e-10);
  }
  SUBCASE("disk of radius 0.5 under J0 incidence") {
    const double radius = 0.5, k2 = 8.0, kp = 30.0;
    const DiscretizedCurve c = sample_particle({radius, 0.0, 1}, {0.0, 0.0}, 0.0, 300);
    CVec dn;
    const CVec u = traces(c, [&](Vec2 x) { return eval_regular_wave(0, k2, {0.0, 0.0}, x); }, dn);
    const MullerDensities d = solve_muller_particle(c, k2, kp, u, dn);
    CHECK(d.residual <= 1e-12);
    const cplx s0 = disk_oracle(0, radius, k2, kp);
    std::vector<Vec2> probes;
    for (int i = 0; i < 16; ++i) probes.push_back({std::cos(0.4 * i), std::sin(0.4 * i)});
    const auto v = eval_particle_field(c, d, k2, probes);
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(std::abs(v[i] - s0 * boost_h(0, k2)) <= 1e-10);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(ParticleSolver(sample_interface({1.0, {}, {}}, 32, 1.0), 8.0, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(ParticleSolver(sample_particle(kPar1, {0.0, 0.0}, 0.0, 64), 0.0, 30.0), std::invalid_argument);
    CHECK_THROWS_AS(scattering_matrix(kPar1, 8.0, 30.0, -1, 64), std::invalid_argument);
  }
}

TEST_CASE("a lossless particle in free space conserves flux") {
  // Net flux of the total field through a circle enclosing the particle.
  const ParticleShape shape{0.3, 0.1, 3};
  const double k2 = 8.0, kp = 12.0, psi = 0.6;
  const int p = 24;
  const ScatteringMatrix s = scattering_matrix(shape, k2, kp, p, 400);
  const CVec b = s.s * plane_wave_local_coeffs(psi, k2, {0.0, 0.0}, p);
  const double r = 1.0;
  const int n = 400;
  double net = 0.0, scattered = 0.0;
  std::vector<cplx> val(2 * p + 1), dx(2 * p + 1), dy(2 * p + 1);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    const Vec2 x{r * std::cos(t), r * std::sin(t)};
    outgoing_waves(p, k2, x, val, dx, dy);
    cplx us{}, dus{};
    for (int j = 0; j < 2 * p + 1; ++j) {
      us += b(j) * val[j];
      dus += b(j) * (std::cos(t) * dx[j] + std::sin(t) * dy[j]);
    }
    const WaveValue inc = plane_wave(k2, psi, x);
    const cplx u = inc.value + us;
    const cplx du = dus + std::cos(t) * inc.gradient[0] + std::sin(t) * inc.gradient[1];
    net += std::imag(std::conj(u) * du) * 2.0 * kPi * r / n;
    scattered += std::imag(std::conj(us) * dus) * 2.0 * kPi * r / n;
  }
  CHECK(scattered > 1e-3);
  CHECK(std::abs(net) <= 1e-8 * scattered);
}
