#include <doctest.h>

#include <random>

#include "qpgrating/empty_grating.hpp"
#include "qpgrating/layerpot.hpp"
#include "qpgrating/multiscat.hpp"
#include "qpgrating/specialfn.hpp"

using namespace qpg;

namespace {

CVec random_vector(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CVec v(n);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v;
}

std::vector<Vec2> disk_points(Vec2 c, double r, int n = 20) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n + 0.1;
    pts.push_back(c + Vec2{r * std::cos(t), r * std::sin(t)});
  }
  return pts;
}

double m2l_monopole_error(double sep, double radius, double frac, int p) {
  const double k = 8.0;
  const Vec2 from{0.0, 0.0}, to{sep * radius, 0.3 * radius};
  CVec beta = CVec::Zero(2 * p + 1);
  beta(p) = 1.0;
  const CVec a = m2l_translate(beta, from, to, k, p, radius, radius);
  double err = 0.0;
  for (const Vec2& x : disk_points(to, frac * radius))
    err = std::max(err, std::abs(eval_regular_expansion(a, to, k, x) - hankel1(0, k * (x - from).norm())));
  return err;
}

// Outgoing coefficients with the decay of a small scatterer's response,
// |J_n(kR) / H_n(kR)|; unweighted random high orders are not re-expandable
// at order p.
CVec physical_beta(int count, int p, double k, double radius, unsigned seed) {
  CVec b = random_vector(static_cast<Eigen::Index>(count) * (2 * p + 1), seed);
  for (int m = 0; m < count; ++m)
    for (int n = -p; n <= p; ++n) b(m * (2 * p + 1) + n + p) *= std::abs(bessel_j(n, k * radius) / hankel1(n, k * radius));
  return b;
}

ParticleArray array_at(const std::vector<Vec2>& centers, double radius, int p, double k, cplx alpha, int copies) {
  ParticleArray arr;
  arr.centers = centers;
  arr.rotations.assign(centers.size(), 0.0);
  arr.radius = radius;
  arr.p = p;
  arr.k = k;
  arr.alpha = alpha;
  arr.copies = copies;
  arr.period = 1.0;
  return arr;
}

// Outgoing field of every particle copy except the target's own l = 0 term.
cplx field_of_others(const ParticleArray& arr, const CVec& beta, int target, Vec2 x) {
  const int b = arr.block();
  cplx u{};
  for (int m = 0; m < arr.count(); ++m)
    for (int l = -arr.copies; l <= arr.copies; ++l) {
      if (m == target && l == 0) continue;
      const CVec bm = beta.segment(m * b, b);
      u += phase_pow(arr.alpha, l) * eval_outgoing_expansion(bm, arr.centers[m] + Vec2{l * arr.period, 0.0}, arr.k, x);
    }
  return u;
}

}  // namespace

TEST_CASE("multipole to local translation of a monopole") {
  const double radius = 0.0412;
  // Interior disk points at p = 10; the whole disk at higher order.
  CHECK(m2l_monopole_error(3.0, radius, 0.5, 10) <= 1e-9);
  CHECK(m2l_monopole_error(3.0, radius, 1.0, 30) <= 1e-9);
  CHECK(m2l_monopole_error(2.05, radius, 1.0, 10) > m2l_monopole_error(4.0, radius, 1.0, 10));
  CHECK_THROWS_AS(m2l_translate(CVec::Zero(21), {0.0, 0.0}, {0.05, 0.0}, 8.0, 10, radius, radius), std::domain_error);
  CHECK_THROWS_AS(m2l_translate(CVec::Zero(5), {0.0, 0.0}, {1.0, 0.0}, 8.0, 10, radius, radius), std::invalid_argument);
}

TEST_CASE("multipole to local translation of a general expansion") {
  const int p = 10;
  const double k = 8.0, radius = 0.0412;
  const Vec2 from{0.1, -0.2}, to{0.35, -0.05};
  const CVec beta = physical_beta(1, p, k, radius, 3);
  const CVec a = m2l_translate(beta, from, to, k, p, radius, radius);
  for (const Vec2& x : disk_points(to, radius)) {
    const cplx ref = eval_outgoing_expansion(beta, from, k, x);
    CHECK(std::abs(eval_regular_expansion(a, to, k, x) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("local to local translation") {
  SUBCASE("identity at zero shift") {
    const CVec g = random_vector(21, 5);
    CHECK((l2l_translate(g, {0.2, 0.1}, {0.2, 0.1}, 7.0, 10) - g).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("plane-wave closure") {
    // k |x_l - x_m| = 2; the input order is large enough that the
    // truncated input tail is negligible.
    const double k = 10.0, psi = 0.8;
    const Vec2 xm{0.1, 0.3}, xl = xm + Vec2{0.2 * std::cos(1.1), 0.2 * std::sin(1.1)};
    const CVec g = plane_wave_local_coeffs(psi, k, xm, 45);
    const CVec out = l2l_translate(g, xm, xl, k, 20);
    const CVec ref = plane_wave_local_coeffs(psi, k, xl, 20);
    CHECK((out - ref).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("a single J0 re-expanded") {
    const double k = 8.0;
    const Vec2 xm{0.0, 0.0}, xl{0.15, -0.1};
    CVec g = CVec::Zero(1);
    g(0) = 1.0;
    const CVec out = l2l_translate(g, xm, xl, k, 20);
    for (const Vec2& x : disk_points(xl, 0.05))
      CHECK(std::abs(eval_regular_expansion(out, xl, k, x) - bessel_j(0, k * x.norm())) <= 1e-12);
  }
}

TEST_CASE("plane-wave local coefficients") {
  const double k = 10.0, psi = -0.7;
  const Vec2 c{0.2, -0.4};
  const CVec a = plane_wave_local_coeffs(psi, k, c, 10);
  const cplx at_center = std::exp(kI * k * (std::cos(psi) * c.x + std::sin(psi) * c.y));
  CHECK(std::abs(a(10) - at_center) <= 1e-15);
  const CVec rot = plane_wave_local_coeffs(psi + 0.3, k, {0.0, 0.0}, 10);
  const CVec base = plane_wave_local_coeffs(psi, k, {0.0, 0.0}, 10);
  for (int n = -10; n <= 10; ++n) CHECK(std::abs(rot(n + 10) - std::polar(1.0, -0.3 * n) * base(n + 10)) <= 1e-15);
  double err = 0.0;
  for (double r : {0.01, 0.03, 0.05})
    for (const Vec2& x : disk_points(c, r))
      err = std::max(err, std::abs(eval_regular_expansion(a, c, k, x) -
                                   std::exp(kI * k * (std::cos(psi) * x.x + std::sin(psi) * x.y))));
  CHECK(err <= 1e-12);
}

TEST_CASE("grating coupling blocks") {
  ProblemConfig cfg;
  cfg.k2 = 8.0;
  cfg.placements = {{{0.05, 0.0}, 0.3}, {{-0.3, 0.4}, 1.2}, {{0.42, -0.5}, 2.0}};
  const ParticleSet set = make_particles(cfg);
  const ParticleArray arr = make_particle_array(cfg, set);
  const GratingGeometry geo = build_geometry(cfg);
  const EmptySystem sys = assemble_empty_system(cfg, geo);
  const UnknownLayout& L = sys.layout;
  const cplx alpha = cfg.bloch_phase();

  SUBCASE("source-to-local agrees with direct layer-potential evaluation") {
    const CMat B = source_to_local_block(arr, geo, L);
    REQUIRE(B.rows() == arr.size());
    REQUIRE(B.cols() == L.a2() + L.jsize());
    CVec nu = random_vector(B.cols(), 11);
    nu.tail(L.jsize()).setZero();
    nu.segment(L.a2(), 9) = random_vector(9, 12);
    const CVec a = B * nu;
    auto slice = [&](int off, int n) { return std::vector<cplx>(nu.data() + off, nu.data() + off + n); };
    for (int m = 0; m < arr.count(); ++m) {
      const std::vector<Vec2> pts = disk_points(arr.centers[m], arr.radius);
      const FieldValues f1 = eval_layer_potentials(geo.gamma1, slice(L.nu1() + L.n1, L.n1), slice(L.nu1(), L.n1),
                                                   cfg.k2, pts, alpha, cfg.copies);
      const FieldValues f2 = eval_layer_potentials(geo.gamma2, slice(L.nu2() + L.n2, L.n2), slice(L.nu2(), L.n2),
                                                   cfg.k2, pts, alpha, cfg.copies);
      const CVec am = a.segment(m * arr.block(), arr.block());
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const cplx j = eval_regular_expansion(nu.segment(L.a2(), L.jsize()), geo.centers[1], cfg.k2, pts[i]);
        const cplx ref = f1.value[i] + f2.value[i] + j;
        CAPTURE(m);
        CHECK(std::abs(eval_regular_expansion(am, arr.centers[m], cfg.k2, pts[i]) - ref) <= 1e-9);
      }
    }
  }

  SUBCASE("layer-2 J-expansion columns re-expand the regular field") {
    const CMat B = source_to_local_block(arr, geo, L);
    const CVec g = random_vector(L.jsize(), 13);
    const CVec a = B.rightCols(L.jsize()) * g;
    for (int m = 0; m < arr.count(); ++m) {
      const CVec am = a.segment(m * arr.block(), arr.block());
      CHECK((am - l2l_translate(g, geo.centers[1], arr.centers[m], cfg.k2, arr.p)).cwiseAbs().maxCoeff() <= 1e-12);
      for (const Vec2& x : disk_points(arr.centers[m], arr.radius)) {
        const cplx ref = eval_regular_expansion(g, geo.centers[1], cfg.k2, x);
        CHECK(std::abs(eval_regular_expansion(am, arr.centers[m], cfg.k2, x) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
      }
    }
  }

  SUBCASE("multipole-to-target rows agree with direct summation") {
    const CMat C = multipole_to_targets_block(arr, geo, sys.rows);
    const CVec beta = random_vector(arr.size(), 17);
    const CVec r = C * beta;
    const int b = arr.block();
    auto direct = [&](const DiscretizedCurve& c, int i) {
      cplx v{}, dn{};
      for (int m = 0; m < arr.count(); ++m)
        for (int l = -arr.copies; l <= arr.copies; ++l)
          for (int n = -arr.p; n <= arr.p; ++n) {
            const WaveValue w = eval_outgoing_wave(n, cfg.k2, arr.centers[m] + Vec2{l * arr.period, 0.0}, c.nodes[i]);
            const cplx coef = phase_pow(alpha, l) * beta(m * b + n + arr.p);
            v += coef * w.value;
            dn += coef * (c.normals[i].x * w.gradient[0] + c.normals[i].y * w.gradient[1]);
          }
      return std::pair{v, dn};
    };
    const RowLayout& R = sys.rows;
    for (int i = 0; i < R.n1; i += 7) {
      const auto [v, dn] = direct(geo.gamma1, i);
      CHECK(std::abs(r(R.gamma1 + i) + v) <= 1e-12 * std::max(1.0, std::abs(v)));
      CHECK(std::abs(r(R.gamma1 + R.n1 + i) + dn) <= 1e-12 * std::max(1.0, std::abs(dn)));
    }
    for (int i = 0; i < R.n2; i += 7) {
      const auto [v, dn] = direct(geo.gamma2, i);
      CHECK(std::abs(r(R.gamma2 + i) - v) <= 1e-12 * std::max(1.0, std::abs(v)));
      CHECK(std::abs(r(R.gamma2 + R.n2 + i) - dn) <= 1e-12 * std::max(1.0, std::abs(dn)));
    }
  }

  SUBCASE("wall rows equal the uncancelled phased difference") {
    const CMat C = multipole_to_targets_block(arr, geo, sys.rows);
    const CMat D = multipole_wall_rows_direct(arr, geo.walls.left[1], geo.walls.right[1]);
    const int nw = 2 * sys.rows.nw2;
    REQUIRE(D.rows() == nw);
    const CMat cw = C.middleRows(sys.rows.wall2, nw);
    // Roundoff is relative to the largest single term before cancellation.
    double scale = 0.0;
    for (const DiscretizedCurve* w : {&geo.walls.left[1], &geo.walls.right[1]})
      for (std::size_t i = 0; i < w->size(); ++i)
        for (int m = 0; m < arr.count(); ++m)
          for (int l = -arr.copies; l <= arr.copies; ++l)
            for (int n = -arr.p; n <= arr.p; ++n) {
              const WaveValue v = eval_outgoing_wave(n, cfg.k2, arr.centers[m] + Vec2{l * arr.period, 0.0}, w->nodes[i]);
              scale = std::max({scale, std::abs(v.value), std::abs(v.gradient[0])});
            }
    CHECK((cw - D).cwiseAbs().maxCoeff() <= 1e-14 * scale);
    CHECK(C.middleRows(sys.rows.wall2, nw).allFinite());
  }

  SUBCASE("reciprocity between source-to-local and multipole-to-target") {
    // Without images, the monopole coefficient induced at a center by a unit
    // single-layer density at node y and the monopole field at y coincide up
    // to the (i/4) w_y factor and the row sign.
    ParticleArray one = arr;
    one.copies = 0;
    const CMat B = source_to_local_block(one, geo, L);
    const CMat C = multipole_to_targets_block(one, geo, sys.rows);
    const int p = one.p;
    for (int j = 0; j < L.n1; j += 11) {
      const cplx lhs = B(p, L.nu1() + L.n1 + j);
      const cplx rhs = -0.25 * kI * geo.gamma1.weights[j] * C(sys.rows.gamma1 + j, p);
      CHECK(std::abs(lhs - rhs) <= 1e-15 * std::max(1.0, std::abs(lhs)));
    }
  }

  SUBCASE("particle overlapping an interface copy is rejected") {
    ParticleArray bad = arr;
    bad.centers[0] = {0.0, 1.0};
    CHECK_THROWS_AS(source_to_local_block(bad, geo, L), std::domain_error);
    CHECK_THROWS_AS(multipole_to_targets_block(bad, geo, sys.rows), std::domain_error);
  }
}

TEST_CASE("translation among particles and their images") {
  const double radius = 0.0412, k = 8.0;
  const int p = 10;
  SUBCASE("a lone particle without images receives nothing") {
    const ParticleArray arr = array_at({{0.1, 0.2}}, radius, p, k, 1.0, 0);
    CHECK(apply_T(arr, random_vector(arr.size(), 1)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("two particles") {
    const ParticleArray arr = array_at({{0.0, 0.0}, {0.3, 0.1}}, radius, p, k, 1.0, 0);
    CVec beta = CVec::Zero(arr.size());
    beta.tail(arr.block()) = physical_beta(1, p, k, radius, 2);
    const CVec a = apply_T(arr, beta);
    CHECK(a.tail(arr.block()).cwiseAbs().maxCoeff() == 0.0);
    for (const Vec2& x : disk_points(arr.centers[0], radius)) {
      const cplx ref = eval_outgoing_expansion(beta.tail(arr.block()), arr.centers[1], k, x);
      CHECK(std::abs(eval_regular_expansion(a.head(arr.block()), arr.centers[0], k, x) - ref) <= 1e-9);
    }
  }
  SUBCASE("a single particle sees its own phased images") {
    const cplx alpha = std::polar(1.0, 0.9);
    const ParticleArray arr = array_at({{0.1, -0.2}}, radius, p, k, alpha, 1);
    const CVec beta = physical_beta(1, p, k, radius, 4);
    const CVec a = apply_T(arr, beta);
    for (const Vec2& x : disk_points(arr.centers[0], radius)) {
      const cplx ref = alpha * eval_outgoing_expansion(beta, arr.centers[0] + Vec2{1.0, 0.0}, k, x) +
                       std::conj(alpha) * eval_outgoing_expansion(beta, arr.centers[0] - Vec2{1.0, 0.0}, k, x);
      CHECK(std::abs(eval_regular_expansion(a, arr.centers[0], k, x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
  SUBCASE("random coefficients on a periodized array") {
    const cplx alpha = std::polar(1.0, -2.1);
    const ParticleArray arr =
        array_at({{0.0, 0.0}, {0.25, 0.3}, {-0.3, -0.2}, {0.45, -0.4}, {-0.44, 0.5}}, radius, p, k, alpha, 1);
    const CVec beta = physical_beta(arr.count(), p, k, radius, 9);
    const CVec a = apply_T(arr, beta);
    const TranslationOperator op(arr);
    CHECK((op.apply(beta) - a).cwiseAbs().maxCoeff() == 0.0);
    for (int m = 0; m < arr.count(); ++m)
      for (const Vec2& x : disk_points(arr.centers[m], radius)) {
        const cplx ref = field_of_others(arr, beta, m, x);
        CAPTURE(m);
        CHECK(std::abs(eval_regular_expansion(a.segment(m * arr.block(), arr.block()), arr.centers[m], k, x) - ref) <=
              1e-8 * std::max(1.0, std::abs(ref)));
      }
  }
  SUBCASE("overlapping particles are rejected") {
    const ParticleArray arr = array_at({{0.0, 0.0}, {0.05, 0.0}}, radius, p, k, 1.0, 0);
    CHECK_THROWS_AS(apply_T(arr, CVec::Zero(arr.size())), std::domain_error);
  }
}
