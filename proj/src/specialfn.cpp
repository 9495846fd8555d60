#include "qpgrating/specialfn.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpg {

namespace {

constexpr double kEuler = 0.57721566490153286060651209008240243;
constexpr double kEps = 1.0e-16;
constexpr double kTiny = 1.0e-300;

void check_order(int n) {
  if (std::abs(n) > kMaxBesselOrder)
    throw std::domain_error("Bessel order " + std::to_string(n) + " outside |n| <= 200");
}

void check_arg(double x) {
  if (!(x >= 0.0) || x > kMaxBesselArg)
    throw std::domain_error("Bessel argument " + std::to_string(x) + " outside [0, 1e4]");
}

// Ascending series; used for x < 2 where every term is smaller than the
// previous one after the first few.
BesselJY01 series01(double x) {
  const double q = 0.25 * x * x;
  const double lg = std::log(0.5 * x) + kEuler;

  // J0, and the harmonic-weighted sum entering Y0.
  double term = 1.0, j0 = 1.0, s0 = 0.0, harmonic = 0.0;
  for (int k = 1; k < 60; ++k) {
    term *= -q / (double(k) * k);
    harmonic += 1.0 / k;
    j0 += term;
    s0 -= term * harmonic;
    if (std::abs(term) < 1e-18 * std::abs(j0) && std::abs(term * harmonic) < 1e-18) break;
  }
  // J1 = sum (-q)^k (x/2) / (k!(k+1)!), Y1 regular part uses psi(k+1)+psi(k+2).
  double t1 = 0.5 * x, j1 = t1;
  double psi1 = -kEuler, psi2 = 1.0 - kEuler;  // psi(1), psi(2)
  double s1 = (psi1 + psi2) * t1;
  for (int k = 1; k < 60; ++k) {
    t1 *= -q / (double(k) * (k + 1));
    psi1 += 1.0 / k;
    psi2 += 1.0 / (k + 1);
    j1 += t1;
    s1 += (psi1 + psi2) * t1;
    if (std::abs(t1) < 1e-18 * std::abs(j1)) break;
  }
  BesselJY01 r;
  r.j0 = j0;
  r.j1 = j1;
  r.y0 = (2.0 / kPi) * (lg * j0 + s0);
  r.y1 = -2.0 / (kPi * x) + (2.0 / kPi) * std::log(0.5 * x) * j1 - s1 / kPi;
  return r;
}

// Steed's method: CF1 for J0'/J0, CF2 for (J0'+iY0')/(J0+iY0), closed by
// the Wronskian.
BesselJY01 steed01(double x) {
  const double xi = 1.0 / x, xi2 = 2.0 * xi, w = xi2 / kPi;
  int isign = 1;
  double h = kTiny, b = 0.0, d = 0.0, c = h;
  for (int i = 0; i < 100000; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b - 1.0 / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) <= kEps) break;
  }
  const double f = h;

  double a = 0.25, p = -0.5 * xi, q = 1.0;
  const double br = 2.0 * x;
  double bi = 2.0;
  double fact = a * xi / (p * p + q * q);
  double cr = br + q * fact, ci = bi + p * fact;
  double den = br * br + bi * bi;
  double dr = br / den, di = -bi / den;
  double dlr = cr * dr - ci * di, dli = cr * di + ci * dr;
  double tmp = p * dlr - q * dli;
  q = p * dli + q * dlr;
  p = tmp;
  for (int i = 1; i < 100000; ++i) {
    a += 2 * i;
    bi += 2.0;
    dr = a * dr + br;
    di = a * di + bi;
    if (std::abs(dr) + std::abs(di) < kTiny) dr = kTiny;
    fact = a / (cr * cr + ci * ci);
    cr = br + cr * fact;
    ci = bi - ci * fact;
    if (std::abs(cr) + std::abs(ci) < kTiny) cr = kTiny;
    den = dr * dr + di * di;
    dr /= den;
    di /= -den;
    dlr = cr * dr - ci * di;
    dli = cr * di + ci * dr;
    tmp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = tmp;
    if (std::abs(dlr - 1.0) + std::abs(dli) <= kEps) break;
  }
  const double gam = (p - f) / q;
  double j0 = std::sqrt(w / ((p - f) * gam + q));
  if (isign < 0) j0 = -j0;
  const double y0 = j0 * gam;
  const double y0p = y0 * (p + q / gam);
  return {j0, -f * j0, y0, -y0p};
}

// Hankel's asymptotic expansion, accurate to roundoff for x >= 25.
BesselJY01 asymptotic01(double x) {
  auto pq = [x](double mu, double& P, double& Q) {
    P = 1.0;
    Q = 0.0;
    double term = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 200; ++k) {
      const double odd = 2.0 * k - 1.0;
      term *= (mu - odd * odd) / (k * 8.0 * x);
      if (std::abs(term) > prev) break;
      prev = std::abs(term);
      if (k % 2 == 0)
        P += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
      else
        Q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * term;
      if (std::abs(term) < 1e-17) break;
    }
  };
  double p0, q0, p1, q1;
  pq(0.0, p0, q0);
  pq(4.0, p1, q1);
  const double s = std::sin(x), c = std::cos(x);
  const double amp = std::sqrt(2.0 / (kPi * x));
  const double r2 = std::sqrt(0.5);
  // chi0 = x - pi/4, chi1 = x - 3pi/4
  const double c0 = r2 * (c + s), s0 = r2 * (s - c);
  const double c1 = r2 * (s - c), s1 = -r2 * (s + c);
  return {amp * (p0 * c0 - q0 * s0), amp * (p1 * c1 - q1 * s1), amp * (p0 * s0 + q0 * c0),
          amp * (p1 * s1 + q1 * c1)};
}

// J_0..J_nmax by backward recurrence, normalized against exact J0, J1.
void miller(int nmax, double x, double j0, double j1, std::span<double> out) {
  const double top = std::max<double>(nmax, std::ceil(x));
  const int m = int(top) + 30 + int(std::ceil(std::sqrt(60.0 * top)));
  double fnext = 0.0, fcur = 1e-30;
  const double big = 1e250;
  for (int n = 0; n <= nmax; ++n) out[n] = 0.0;
  for (int n = m; n >= 1; --n) {
    const double fprev = (2.0 * n / x) * fcur - fnext;
    fnext = fcur;
    fcur = fprev;
    if (n - 1 <= nmax) out[n - 1] = fcur;
    if (n <= nmax) out[n] = fnext;
    if (std::abs(fcur) > big) {
      fcur /= big;
      fnext /= big;
      for (int k = std::max(n - 1, 0); k <= nmax; ++k) out[k] /= big;
    }
  }
  const double s = std::max(std::abs(out[0]), std::abs(out[1]));
  const double f0 = out[0] / s, f1 = out[1] / s;
  const double scale = (j0 * f0 + j1 * f1) / (f0 * f0 + f1 * f1) / s;
  for (int n = 0; n <= nmax; ++n) out[n] *= scale;
}

}  // namespace

BesselJY01 bessel_jy01(double x) {
  check_arg(x);
  if (x == 0.0) {
    const double inf = std::numeric_limits<double>::infinity();
    return {1.0, 0.0, -inf, -inf};
  }
  if (x < 2.0) return series01(x);
  if (x < 25.0) return steed01(x);
  return asymptotic01(x);
}

void bessel_j_array(int nmax, double x, std::span<double> out) {
  check_order(nmax);
  check_arg(x);
  if (nmax < 0) return;
  if (x == 0.0) {
    out[0] = 1.0;
    for (int n = 1; n <= nmax; ++n) out[n] = 0.0;
    return;
  }
  const BesselJY01 b = bessel_jy01(x);
  if (nmax == 0) {
    out[0] = b.j0;
    return;
  }
  if (nmax < x) {
    out[0] = b.j0;
    out[1] = b.j1;
    for (int n = 1; n < nmax; ++n) out[n + 1] = (2.0 * n / x) * out[n] - out[n - 1];
    return;
  }
  miller(nmax, x, b.j0, b.j1, out);
}

void hankel1_array(int nmax, double x, std::span<cplx> out) {
  check_order(nmax);
  check_arg(x);
  if (x <= 0.0) throw std::domain_error("Hankel function requires x > 0");
  std::vector<double> j(std::max(nmax, 1) + 1);
  bessel_j_array(std::max(nmax, 1), x, j);
  const BesselJY01 b = bessel_jy01(x);
  double ym = b.y0, y = b.y1;
  out[0] = {j[0], b.y0};
  if (nmax >= 1) out[1] = {j[1], b.y1};
  for (int n = 1; n < nmax; ++n) {
    const double yn = (2.0 * n / x) * y - ym;
    ym = y;
    y = yn;
    out[n + 1] = {j[n + 1], y};
  }
}

double bessel_j(int n, double x) {
  check_order(n);
  check_arg(x);
  const int an = std::abs(n);
  std::vector<double> j(std::max(an, 1) + 1);
  bessel_j_array(std::max(an, 1), x, j);
  return (n < 0 && (an % 2)) ? -j[an] : j[an];
}

double bessel_y(int n, double x) {
  check_order(n);
  check_arg(x);
  if (x <= 0.0) throw std::domain_error("Bessel Y requires x > 0");
  const int an = std::abs(n);
  const BesselJY01 b = bessel_jy01(x);
  double ym = b.y0, y = b.y1;
  if (an == 0) return b.y0;
  for (int k = 1; k < an; ++k) {
    const double yn = (2.0 * k / x) * y - ym;
    ym = y;
    y = yn;
  }
  return (n < 0 && (an % 2)) ? -y : y;
}

cplx hankel1(int n, double x) {
  check_order(n);
  if (!(x > 0.0)) throw std::domain_error("Hankel function requires x > 0");
  return {bessel_j(n, x), bessel_y(n, x)};
}

cplx hankel1_1_nonsingular(double x) {
  if (!(x > 0.0)) throw std::domain_error("Hankel function requires x > 0");
  if (x >= 1.0) {
    const BesselJY01 b = bessel_jy01(x);
    return {b.j1, b.y1 + 2.0 / (kPi * x)};
  }
  const double q = 0.25 * x * x;
  double t1 = 0.5 * x, j1 = t1;
  double psi1 = -kEuler, psi2 = 1.0 - kEuler;
  double s1 = (psi1 + psi2) * t1;
  for (int k = 1; k < 40; ++k) {
    t1 *= -q / (double(k) * (k + 1));
    psi1 += 1.0 / k;
    psi2 += 1.0 / (k + 1);
    j1 += t1;
    s1 += (psi1 + psi2) * t1;
    if (std::abs(t1) < 1e-18 * std::abs(j1)) break;
  }
  return {j1, (2.0 / kPi) * std::log(0.5 * x) * j1 - s1 / kPi};
}

namespace {

template <class RadialFill>
void fill_waves(int p, double k, Vec2 rel, std::span<cplx> val, std::span<cplx> dx,
                std::span<cplx> dy, RadialFill&& radial) {
  const int q = p + 1;
  std::vector<cplx> z(q + 1);
  const double r = rel.norm();
  radial(q, k * r, std::span<cplx>(z));
  const double th = r > 0.0 ? rel.angle() : 0.0;
  const cplx e1 = std::polar(1.0, th);
  // w[n + q] = Z_n e^{i n theta}, n = -q..q
  std::vector<cplx> w(2 * q + 1);
  cplx e{1.0, 0.0};
  for (int n = 0; n <= q; ++n) {
    w[q + n] = z[n] * e;
    w[q - n] = ((n % 2) ? -1.0 : 1.0) * z[n] * std::conj(e);
    e *= e1;
  }
  for (int n = -p; n <= p; ++n) val[n + p] = w[q + n];
  if (!dx.empty())
    for (int n = -p; n <= p; ++n) dx[n + p] = 0.5 * k * (w[q + n - 1] - w[q + n + 1]);
  if (!dy.empty())
    for (int n = -p; n <= p; ++n) dy[n + p] = 0.5 * kI * k * (w[q + n - 1] + w[q + n + 1]);
}

}  // namespace

void regular_waves(int p, double k, Vec2 rel, std::span<cplx> val, std::span<cplx> dx,
                   std::span<cplx> dy) {
  fill_waves(p, k, rel, val, dx, dy, [](int n, double x, std::span<cplx> z) {
    std::vector<double> j(n + 1);
    bessel_j_array(n, x, j);
    for (int i = 0; i <= n; ++i) z[i] = j[i];
  });
}

void outgoing_waves(int p, double k, Vec2 rel, std::span<cplx> val, std::span<cplx> dx,
                    std::span<cplx> dy) {
  if (rel.norm() == 0.0) throw std::domain_error("outgoing wave evaluated at its center");
  fill_waves(p, k, rel, val, dx, dy, [](int n, double x, std::span<cplx> z) { hankel1_array(n, x, z); });
}

namespace {

WaveValue single_wave(CylWave::Kind kind, int n, double k, Vec2 center, Vec2 target) {
  const int p = std::abs(n);
  std::vector<cplx> v(2 * p + 1), gx(2 * p + 1), gy(2 * p + 1);
  if (kind == CylWave::Kind::regular)
    regular_waves(p, k, target - center, v, gx, gy);
  else
    outgoing_waves(p, k, target - center, v, gx, gy);
  return {v[n + p], {gx[n + p], gy[n + p]}};
}

}  // namespace

WaveValue CylWave::operator()(Vec2 target) const { return single_wave(kind, order, k, center, target); }

WaveValue eval_regular_wave(int n, double k, Vec2 center, Vec2 target) {
  return single_wave(CylWave::Kind::regular, n, k, center, target);
}

WaveValue eval_outgoing_wave(int n, double k, Vec2 center, Vec2 target) {
  return single_wave(CylWave::Kind::outgoing, n, k, center, target);
}

}  // namespace qpg
