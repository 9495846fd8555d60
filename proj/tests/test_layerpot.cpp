#include <doctest.h>

#include "qpgrating/layerpot.hpp"
#include "qpgrating/specialfn.hpp"

using namespace qpg;

namespace {

cplx sigma_fn(double t) { return std::exp(std::cos(t)) + kI * std::sin(2.0 * t); }
cplx mu_fn(double t) { return std::cos(t) + 0.5 * kI * std::exp(std::sin(3.0 * t)); }

std::vector<cplx> sample(const DiscretizedCurve& c, cplx (*f)(double)) {
  std::vector<cplx> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = f(c.t[i]);
  return v;
}

cplx normal_component(const std::array<cplx, 2>& g, Vec2 n) { return g[0] * n.x + g[1] * n.y; }

}  // namespace

TEST_CASE("Green's kernel values") {
  const KernelValues kv = greens_kernel(1.0, {1.0, 0.0}, {0.0, 0.0}, {0, 1}, {0, 1});
  CHECK(std::abs(kv.g - 0.25 * kI * hankel1(0, 1.0)) < 1e-16);
  // n_y perpendicular to x - y.
  CHECK(std::abs(kv.dny) < 1e-16);
  CHECK(std::abs(kv.dnx) < 1e-16);

  const Vec2 x{0.3, 0.7}, y{-0.2, 0.1};
  const Vec2 nx = rotate({1, 0}, 0.4), ny = rotate({1, 0}, 2.1);
  const double k = 6.0;
  const KernelValues a = greens_kernel(k, x, y, nx, ny), b = greens_kernel(k, y, x, ny, nx);
  CHECK(std::abs(a.g - b.g) < 1e-16);
  CHECK(std::abs(a.dny - b.dnx) < 1e-15);

  const double h = 1e-5;
  auto g = [&](Vec2 p, Vec2 q) { return greens_kernel(k, p, q, nx, ny).g; };
  auto dny = [&](Vec2 p) { return greens_kernel(k, p, y, nx, ny).dny; };
  const cplx fd_dny = (g(x, y + h * ny) - g(x, y - h * ny)) / (2 * h);
  const cplx fd_dnx = (g(x + h * nx, y) - g(x - h * nx, y)) / (2 * h);
  const cplx fd_dnxny = (dny(x + h * nx) - dny(x - h * nx)) / (2 * h);
  CHECK(std::abs(fd_dny - a.dny) <= 1e-6 * std::abs(a.dny));
  CHECK(std::abs(fd_dnx - a.dnx) <= 1e-6 * std::abs(a.dnx));
  CHECK(std::abs(fd_dnxny - a.dnxny) <= 1e-6 * std::abs(a.dnxny));
  CHECK_THROWS_AS(greens_kernel(k, x, x, nx, ny), std::domain_error);
}

TEST_CASE("layer potentials off the curve") {
  SUBCASE("single layer of a constant on the unit circle at its center") {
    const DiscretizedCurve c = sample_particle({1.0, 0.0, 1}, {0.0, 0.0}, 0.0, 128);
    const FieldValues f = eval_layer_potentials(c, std::vector<cplx>(128, 1.0), {}, 5.0, {{0.0, 0.0}});
    CHECK(std::abs(f.value[0] - 0.5 * kI * kPi * hankel1(0, 5.0)) < 1e-13);
  }
  SUBCASE("Gauss identity in the Laplace limit") {
    const DiscretizedCurve c = sample_particle({1.0, 0.3, 5}, {0.1, -0.2}, 0.3, 400);
    const std::vector<cplx> one(c.size(), 1.0);
    const FieldValues f = eval_layer_potentials(c, {}, one, 1e-6, {{0.1, -0.2}, {0.4, 0.1}, {3.0, 1.0}, {-2.0, 0.5}});
    CHECK(std::abs(f.value[0] + 1.0) < 1e-6);
    CHECK(std::abs(f.value[1] + 1.0) < 1e-6);
    CHECK(std::abs(f.value[2]) < 1e-6);
    CHECK(std::abs(f.value[3]) < 1e-6);
  }
  SUBCASE("linearity and gradients") {
    const DiscretizedCurve c = sample_particle({0.8, 0.1, 3}, {0.0, 0.0}, 0.0, 200);
    const auto s1 = sample(c, sigma_fn), s2 = sample(c, mu_fn);
    std::vector<cplx> mix(c.size());
    const cplx a{0.3, -1.2}, b{2.0, 0.5};
    for (std::size_t i = 0; i < c.size(); ++i) mix[i] = a * s1[i] + b * s2[i];
    const std::vector<Vec2> tg{{1.5, 0.2}, {0.1, 0.1}, {-0.3, 1.7}};
    const double k = 7.0;
    const FieldValues f1 = eval_layer_potentials(c, s1, s1, k, tg), f2 = eval_layer_potentials(c, s2, s2, k, tg);
    const FieldValues fm = eval_layer_potentials(c, mix, mix, k, tg);
    for (std::size_t i = 0; i < tg.size(); ++i)
      CHECK(std::abs(fm.value[i] - (a * f1.value[i] + b * f2.value[i])) <= 1e-13 * (1 + std::abs(fm.value[i])));
    // Finite-difference gradient and Helmholtz residual.
    const double h = 1e-3;
    for (const Vec2& x : tg) {
      auto u = [&](Vec2 p) { return eval_layer_potentials(c, s1, s2, k, {p}).value[0]; };
      const FieldValues g = eval_layer_potentials(c, s1, s2, k, {x});
      const cplx dx = (u(x + Vec2{h, 0}) - u(x - Vec2{h, 0})) / (2 * h);
      const double scale = std::abs(g.gradient[0][0]) + std::abs(g.gradient[0][1]);
      CHECK(std::abs(dx - g.gradient[0][0]) <= 1e-4 * scale);
      const cplx lap = (u(x + Vec2{h, 0}) + u(x - Vec2{h, 0}) + u(x + Vec2{0, h}) + u(x - Vec2{0, h}) - 4.0 * u(x)) / (h * h);
      CHECK(std::abs(lap + k * k * u(x)) <= 1e-4 * k * k * std::abs(u(x)));
    }
  }
}

TEST_CASE("phased copy sums") {
  const DiscretizedCurve src = sample_interface({-1.0, {}, {0.1}}, 60, 1.0);
  const DiscretizedCurve tgt_curve = sample_interface({1.0, {0.1}, {}}, 40, 1.0);
  const Targets tgt = Targets::of(tgt_curve);
  const double k = 5.0;
  const unsigned all = kOpS | kOpD | kOpN;
  SUBCASE("no copies is the plain operator") {
    const OperatorSet a = boundary_operator_matrices(src, tgt, k, all, std::polar(1.0, 0.7), 0);
    const OperatorSet b = copy_operators(src, tgt, k, all, {{0, 1.0}});
    CHECK((a.S - b.S).norm() == 0.0);
    CHECK((a.D - b.D).norm() == 0.0);
  }
  SUBCASE("unit phase with one copy each side") {
    const OperatorSet a = boundary_operator_matrices(src, tgt, k, all, 1.0, 1);
    CMat s = CMat::Zero(tgt.size(), src.size()), n = s;
    for (int l = -1; l <= 1; ++l) {
      const OperatorSet b = copy_operators(src, tgt, k, all, {{l, 1.0}});
      s += b.S;
      n += b.N;
    }
    CHECK((a.S - s).norm() <= 1e-14 * s.norm());
    CHECK((a.N - n).norm() <= 1e-14 * n.norm());
  }
  SUBCASE("general phase weights each copy by alpha^l") {
    const cplx alpha = std::polar(1.0, -1.3);
    const OperatorSet a = boundary_operator_matrices(src, tgt, k, kOpD, alpha, 1);
    CMat d = CMat::Zero(tgt.size(), src.size());
    for (int l = -1; l <= 1; ++l) d += phase_pow(alpha, l) * copy_operators(src, tgt, k, kOpD, {{l, 1.0}}).D;
    CHECK((a.D - d).norm() <= 1e-14 * d.norm());
  }
  SUBCASE("lone hypersingular self operator is rejected") {
    CHECK_THROWS_AS(boundary_operator_matrices(src, Targets::of(src), k, kOpT, 1.0, 1, true), UnsupportedKernel);
  }
}

TEST_CASE("jump relations") {
  const ParticleShape shape{1.0, 0.2, 3};
  const double k = 3.0;
  const DiscretizedCurve coarse = sample_particle(shape, {0.0, 0.0}, 0.0, 256);
  const DiscretizedCurve fine = sample_particle(shape, {0.0, 0.0}, 0.0, 256 * 160);
  const auto sig_c = sample(coarse, sigma_fn), mu_c = sample(coarse, mu_fn);
  const auto sig_f = sample(fine, sigma_fn), mu_f = sample(fine, mu_fn);
  const OperatorSet on = boundary_operator_matrices(coarse, Targets::of(coarse), k, kOpS | kOpD | kOpN, 1.0, 0, true);
  const CVec sig = Eigen::Map<const CVec>(sig_c.data(), 256), mu = Eigen::Map<const CVec>(mu_c.data(), 256);
  const CVec s_on = on.S * sig, n_on = on.N * sig, d_on = on.D * mu;
  const double delta = 1e-3;
  for (int i : {0, 37, 100, 201}) {
    const Vec2 x = coarse.nodes[i], nx = coarse.normals[i];
    // Cubic extrapolation to zero distance from 1..4 delta on each side.
    auto limit = [&](double side, bool single, bool deriv) {
      std::vector<Vec2> pts;
      for (int j = 1; j <= 4; ++j) pts.push_back(x + (side * j * delta) * nx);
      const FieldValues f = single ? eval_layer_potentials(fine, sig_f, {}, k, pts)
                                   : eval_layer_potentials(fine, {}, mu_f, k, pts);
      std::array<cplx, 4> u;
      for (int j = 0; j < 4; ++j) u[j] = deriv ? normal_component(f.gradient[j], nx) : f.value[j];
      return 4.0 * u[0] - 6.0 * u[1] + 4.0 * u[2] - u[3];
    };
    CAPTURE(i);
    // S continuous.
    CHECK(std::abs(limit(+1, true, false) - s_on(i)) <= 1e-8);
    CHECK(std::abs(limit(-1, true, false) - s_on(i)) <= 1e-8);
    // Normal derivative of S jumps by -sigma across to the exterior.
    CHECK(std::abs(limit(+1, true, true) - (n_on(i) - 0.5 * sig(i))) <= 1e-8);
    CHECK(std::abs(limit(-1, true, true) - (n_on(i) + 0.5 * sig(i))) <= 1e-8);
    // D jumps by +mu.
    CHECK(std::abs(limit(+1, false, false) - (d_on(i) + 0.5 * mu(i))) <= 1e-8);
    CHECK(std::abs(limit(-1, false, false) - (d_on(i) - 0.5 * mu(i))) <= 1e-8);
    // Normal derivative of D is continuous.
    const cplx tp = limit(+1, false, true), tm = limit(-1, false, true);
    CHECK(std::abs(tp - tm) <= 1e-8 * std::max(1.0, std::abs(tp)));
  }
}

TEST_CASE("circle eigenvalues of the on-curve operators") {
  const int n = 256;
  const double ka = 5.0, kb = 3.0;
  const DiscretizedCurve c = sample_particle({1.0, 0.0, 1}, {0.3, -0.2}, 0.7, n);
  const OperatorSet diff = difference_self_operators(c, ka, kb, 1.0, 0, alpert_rule(16));
  const OperatorSet single = boundary_operator_matrices(c, Targets::of(c), ka, kOpS | kOpD | kOpN, 1.0, 0, true);
  auto jp = [](int m, double x) { return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x)); };
  auto hp = [](int m, double x) { return 0.5 * (hankel1(m - 1, x) - hankel1(m + 1, x)); };
  // Principal-value eigenvalues on the unit circle.
  auto lam = [&](int which, int m, double k) -> cplx {
    switch (which) {
      case 0: return 0.5 * kI * kPi * bessel_j(m, k) * hankel1(m, k);
      case 1: return 0.5 * kI * kPi * k * bessel_j(m, k) * hp(m, k) + 0.5;
      case 2: return 0.5 * kI * kPi * k * jp(m, k) * hankel1(m, k) - 0.5;
      default: return 0.5 * kI * kPi * k * k * jp(m, k) * hp(m, k);
    }
  };
  const CMat* dm[4] = {&diff.S, &diff.D, &diff.N, &diff.T};
  const CMat* sm[3] = {&single.S, &single.D, &single.N};
  for (int m = -8; m <= 8; ++m) {
    CVec v(n);
    for (int j = 0; j < n; ++j) v(j) = std::polar(1.0, m * c.t[j]);
    CAPTURE(m);
    for (int q = 0; q < 4; ++q) {
      const cplx l = lam(q, m, ka) - lam(q, m, kb);
      CHECK((*dm[q] * v - l * v).cwiseAbs().maxCoeff() <= 1e-10);
    }
    for (int q = 0; q < 3; ++q) CHECK((*sm[q] * v - lam(q, m, ka) * v).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("Green's representation of an interior solution vanishes outside") {
  const DiscretizedCurve c = sample_particle({0.5, 0.0, 1}, {0.2, 0.1}, 0.0, 200);
  const double k = 8.0;
  for (int order : {0, 3, -5}) {
    std::vector<cplx> u(c.size()), dn(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const WaveValue w = eval_regular_wave(order, k, {0.25, 0.05}, c.nodes[i]);
      u[i] = w.value;
      dn[i] = normal_component(w.gradient, c.normals[i]);
    }
    std::vector<cplx> minus_u(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) minus_u[i] = -u[i];
    const std::vector<Vec2> out{{1.2, 0.1}, {0.2, 1.0}, {-0.6, -0.4}};
    const FieldValues f = eval_layer_potentials(c, dn, minus_u, k, out);
    for (const cplx v : f.value) CHECK(std::abs(v) <= 1e-10);
    // Inside it reproduces the field.
    const FieldValues g = eval_layer_potentials(c, dn, minus_u, k, {{0.3, 0.0}});
    CHECK(std::abs(g.value[0] - eval_regular_wave(order, k, {0.25, 0.05}, {0.3, 0.0}).value) <= 1e-10);
  }
}
