#include "qpgrating/geometry.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "qpgrating/quadrature.hpp"

namespace qpg {

namespace {

// Golden-section minimization of a unimodal function on [a, b].
template <class F>
double golden_min(F f, double a, double b, int iters = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Minimizes f over [a, b] by dense sampling followed by local refinement.
template <class F>
double sampled_min(F f, double a, double b, int samples) {
  const double step = (b - a) / samples;
  int best = 0;
  double fbest = f(a);
  for (int i = 1; i <= samples; ++i) {
    const double v = f(a + i * step);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  const double x = golden_min(f, a + (best - 1) * step, a + (best + 1) * step);
  return std::min(fbest, f(x));
}

}  // namespace

double TrigProfile::height(double x, double period) const {
  const double w = 2.0 * kPi / period;
  double y = mean;
  for (std::size_t j = 0; j < sin_coeffs.size(); ++j) y += sin_coeffs[j] * std::sin(w * (j + 1) * x);
  for (std::size_t j = 0; j < cos_coeffs.size(); ++j) y += cos_coeffs[j] * std::cos(w * (j + 1) * x);
  return y;
}

double TrigProfile::slope(double x, double period) const {
  const double w = 2.0 * kPi / period;
  double s = 0.0;
  for (std::size_t j = 0; j < sin_coeffs.size(); ++j) {
    const double wj = w * (j + 1);
    s += sin_coeffs[j] * wj * std::cos(wj * x);
  }
  for (std::size_t j = 0; j < cos_coeffs.size(); ++j) {
    const double wj = w * (j + 1);
    s -= cos_coeffs[j] * wj * std::sin(wj * x);
  }
  return s;
}

double TrigProfile::increment(double x, double dx, double period) const {
  const double w = 2.0 * kPi / period;
  double s = 0.0;
  for (std::size_t j = 0; j < std::max(sin_coeffs.size(), cos_coeffs.size()); ++j) {
    const double wj = w * (j + 1);
    const double half = std::sin(0.5 * wj * dx);
    const double mid = wj * (x + 0.5 * dx);
    if (j < sin_coeffs.size()) s += 2.0 * sin_coeffs[j] * std::cos(mid) * half;
    if (j < cos_coeffs.size()) s -= 2.0 * cos_coeffs[j] * std::sin(mid) * half;
  }
  return s;
}

double TrigProfile::max_height(double period) const {
  return -sampled_min([&](double x) { return -height(x, period); }, -0.5 * period, 0.5 * period, 2048);
}

double TrigProfile::min_height(double period) const {
  return sampled_min([&](double x) { return height(x, period); }, -0.5 * period, 0.5 * period, 2048);
}

void ParticleShape::validate() const {
  if (!(a1 > 0.0) || !(a2 >= 0.0) || a3 < 1) throw ConfigError("particle shape needs a1 > 0, a2 >= 0, a3 >= 1");
  if (!(a2 < a1)) throw ConfigError("particle shape needs a2 < a1");
}

Vec2 GraphCurve::normal(double t) const {
  const double s = profile_.slope(t, period_);
  const double len = std::hypot(1.0, s);
  return {-s / len, 1.0 / len};
}

Vec2 StarCurve::point(double t) const {
  const double r = shape_.a1 + shape_.a2 * std::cos(shape_.a3 * t);
  return center_ + rotate({r * std::cos(t), r * std::sin(t)}, rotation_);
}

Vec2 StarCurve::velocity(double t) const {
  const double r = shape_.a1 + shape_.a2 * std::cos(shape_.a3 * t);
  const double dr = -shape_.a2 * shape_.a3 * std::sin(shape_.a3 * t);
  const double c = std::cos(t), s = std::sin(t);
  return rotate({dr * c - r * s, dr * s + r * c}, rotation_);
}

Vec2 StarCurve::normal(double t) const {
  const Vec2 v = velocity(t);
  const double len = v.norm();
  return {v.y / len, -v.x / len};
}

Vec2 StarCurve::chord(double t, double dt) const {
  const double a3 = shape_.a3;
  const double r0 = shape_.a1 + shape_.a2 * std::cos(a3 * t);
  const double dr = -2.0 * shape_.a2 * std::sin(a3 * (t + 0.5 * dt)) * std::sin(0.5 * a3 * dt);
  const double h = std::sin(0.5 * dt);
  const double dcos = -2.0 * std::sin(t + 0.5 * dt) * h;
  const double dsin = 2.0 * std::cos(t + 0.5 * dt) * h;
  const Vec2 local{dr * std::cos(t + dt) + r0 * dcos, dr * std::sin(t + dt) + r0 * dsin};
  return rotate(local, rotation_);
}

double ProblemConfig::resolved_y0() const {
  if (y0) return *y0;
  const double m = std::max({std::abs(upper.max_height(period)), std::abs(upper.min_height(period)),
                             std::abs(lower.max_height(period)), std::abs(lower.min_height(period))});
  return 1.6 * m;
}

void ProblemConfig::validate() const {
  if (!(period > 0.0)) throw ConfigError("period must be positive");
  for (double k : {k1, k2, k3, kp})
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("wavenumbers must be positive and finite");
  if (!(theta > -kPi && theta < 0.0)) throw ConfigError("incident angle must lie in (-pi, 0)");
  if (!(lower.max_height(period) < upper.min_height(period)))
    throw ConfigError("upper interface must lie strictly above the lower interface");
  const double yy = resolved_y0();
  const double m = std::max({std::abs(upper.max_height(period)), std::abs(upper.min_height(period)),
                             std::abs(lower.max_height(period)), std::abs(lower.min_height(period))});
  if (!(yy > m)) throw ConfigError("y0 must exceed the interface heights");
  if (copies < 0) throw ConfigError("copies must be >= 0");
  if (j_order < 0 || rb_order < 0 || multipole_order < 0) throw ConfigError("truncation orders must be >= 0");
  if (interface_nodes < 16 || interface_nodes % 2 != 0) throw ConfigError("interface_nodes must be even and >= 16");
  if (lid_nodes < 1) throw ConfigError("lid_nodes must be >= 1");
  if (wall_min_nodes < 1 || !(wall_density > 0.0)) throw ConfigError("wall discretization must be positive");
  if (particle_nodes < 64) throw ConfigError("particle_nodes must be >= 64");
  if (alpert_order != 2 && alpert_order != 8 && alpert_order != 16)
    throw ConfigError("alpert_order must be 2, 8 or 16");
  if (!(regularization > 0.0)) throw ConfigError("regularization must be positive");
  if (!(gmres_tol > 0.0) || gmres_maxit < 1) throw ConfigError("invalid GMRES settings");
  if (particle_count < 0) throw ConfigError("particle_count must be >= 0");
  if (particle_count > 0 || !placements.empty()) shape.validate();
  if (!(standoff >= 0.0)) throw ConfigError("standoff must be >= 0");
}

DiscretizedCurve sample_interface(const TrigProfile& profile, int n, double period) {
  DiscretizedCurve c;
  auto g = std::make_shared<GraphCurve>(profile, period);
  c.param = g;
  c.closure = Closure::periodic_phase;
  c.h = period / n;
  c.t_start = -0.5 * period + 0.5 * c.h;
  for (int i = 0; i < n; ++i) {
    const double t = c.t_start + i * c.h;
    c.t.push_back(t);
    c.nodes.push_back(g->point(t));
    c.normals.push_back(g->normal(t));
    c.speeds.push_back(g->speed(t));
    c.weights.push_back(c.h * c.speeds.back());
  }
  return c;
}

DiscretizedCurve sample_particle(const ParticleShape& shape, Vec2 center, double rotation, int n) {
  DiscretizedCurve c;
  auto s = std::make_shared<StarCurve>(shape, center, rotation);
  c.param = s;
  c.closure = Closure::closed;
  c.h = 2.0 * kPi / n;
  c.t_start = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = i * c.h;
    c.t.push_back(t);
    c.nodes.push_back(s->point(t));
    c.normals.push_back(s->normal(t));
    c.speeds.push_back(s->speed(t));
    c.weights.push_back(c.h * c.speeds.back());
  }
  return c;
}

DiscretizedCurve sample_wall(double x, double y_lo, double y_hi, int n) {
  DiscretizedCurve c;
  c.closure = Closure::open;
  const auto [nodes, weights] = gauss_legendre(n, y_lo, y_hi);
  for (int i = 0; i < n; ++i) {
    c.t.push_back(nodes[i]);
    c.nodes.push_back({x, nodes[i]});
    c.normals.push_back({1.0, 0.0});
    c.speeds.push_back(1.0);
    c.weights.push_back(weights[i]);
  }
  return c;
}

DiscretizedCurve sample_lid(double y, int n, double period) {
  DiscretizedCurve c;
  c.closure = Closure::open;
  c.h = period / n;
  c.t_start = -0.5 * period + 0.5 * c.h;
  for (int i = 0; i < n; ++i) {
    const double x = c.t_start + i * c.h;
    c.t.push_back(x);
    c.nodes.push_back({x, y});
    c.normals.push_back({0.0, 1.0});
    c.speeds.push_back(1.0);
    c.weights.push_back(c.h);
  }
  return c;
}

int wall_node_count(const ProblemConfig& cfg, double height) {
  return std::max(cfg.wall_min_nodes, static_cast<int>(std::ceil(cfg.wall_density * height / cfg.period)));
}

WallsAndLids sample_walls_and_lids(const ProblemConfig& cfg) {
  const double d = cfg.period;
  const double y0 = cfg.resolved_y0();
  const double xl = -0.5 * d, xr = 0.5 * d;
  // Interfaces are periodic, so their heights agree at both walls.
  const double g1 = cfg.upper.height(xl, d);
  const double g2 = cfg.lower.height(xl, d);
  const std::array<std::pair<double, double>, 3> spans{{{g1, y0}, {g2, g1}, {-y0, g2}}};
  WallsAndLids w;
  for (int j = 0; j < 3; ++j) {
    const auto [lo, hi] = spans[j];
    const int n = wall_node_count(cfg, hi - lo);
    w.left[j] = sample_wall(xl, lo, hi, n);
    w.right[j] = sample_wall(xr, lo, hi, n);
  }
  w.upper_lid = sample_lid(y0, cfg.lid_nodes, d);
  w.lower_lid = sample_lid(-y0, cfg.lid_nodes, d);
  return w;
}

double distance_to_profile(const TrigProfile& profile, double period, Vec2 p) {
  const double bound = std::abs(profile.height(p.x, period) - p.y);
  if (bound == 0.0) return 0.0;
  auto dist2 = [&](double x) {
    const double dy = profile.height(x, period) - p.y;
    return (x - p.x) * (x - p.x) + dy * dy;
  };
  return std::sqrt(sampled_min(dist2, p.x - bound, p.x + bound, 256));
}

std::string check_particle_set(const ProblemConfig& cfg, const ParticleSet& set, double standoff) {
  const double d = cfg.period, r = set.radius;
  const double need = r + standoff;
  std::ostringstream msg;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vec2 c = set.placements[i].center;
    if (!cfg.allow_wall_intersection && std::abs(c.x) > 0.5 * d - r) {
      msg << "particle " << i << " crosses a cell wall";
      return msg.str();
    }
    if (std::abs(c.x) > 0.5 * d) {
      msg << "particle " << i << " has its center outside the cell";
      return msg.str();
    }
    if (c.y >= cfg.upper.height(c.x, d) || c.y <= cfg.lower.height(c.x, d) ||
        distance_to_profile(cfg.upper, d, c) < need || distance_to_profile(cfg.lower, d, c) < need) {
      msg << "particle " << i << " is too close to an interface";
      return msg.str();
    }
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      for (int l = -1; l <= 1; ++l) {
        const Vec2 delta = set.placements[j].center - set.placements[i].center + Vec2{l * d, 0.0};
        if (delta.norm() <= 2.0 * r) {
          msg << "particles " << i << " and " << j << " overlap";
          return msg.str();
        }
      }
    }
  }
  if (d <= 2.0 * r && !set.placements.empty()) return "particle overlaps its own periodic copy";
  return {};
}

ParticleSet place_random_particles(const ProblemConfig& cfg, int count, double standoff) {
  cfg.shape.validate();
  ParticleSet set;
  set.shape = cfg.shape;
  set.radius = cfg.shape.enclosing_radius();
  const double d = cfg.period, r = set.radius;
  const double need = r + standoff;
  const double xmax = cfg.allow_wall_intersection ? 0.5 * d : 0.5 * d - r;
  const double ylo = cfg.lower.min_height(d) + need;
  const double yhi = cfg.upper.max_height(d) - need;
  if (!(xmax > 0.0) || !(yhi > ylo) || d <= 2.0 * r)
    throw ConfigError("particle 0 cannot be placed: middle layer too thin for the particle size");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ux(-xmax, xmax), uy(ylo, yhi), urot(0.0, 2.0 * kPi);
  constexpr int kMaxAttempts = 200000;
  for (int m = 0; m < count; ++m) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      const Vec2 c{ux(rng), uy(rng)};
      const double rot = urot(rng);
      if (c.y >= cfg.upper.height(c.x, d) || c.y <= cfg.lower.height(c.x, d)) continue;
      bool ok = true;
      for (const auto& p : set.placements) {
        for (int l = -1; l <= 1 && ok; ++l)
          ok = (p.center - c + Vec2{l * d, 0.0}).norm() > 2.0 * r;
        if (!ok) break;
      }
      if (!ok) continue;
      if (distance_to_profile(cfg.upper, d, c) < need || distance_to_profile(cfg.lower, d, c) < need) continue;
      set.placements.push_back({c, rot});
      placed = true;
    }
    if (!placed) {
      std::ostringstream msg;
      msg << "could not place particle " << m << " after " << kMaxAttempts << " attempts";
      throw ConfigError(msg.str());
    }
  }
  return set;
}

ParticleSet make_particles(const ProblemConfig& cfg) {
  if (cfg.placements.empty()) {
    if (cfg.particle_count == 0) {
      ParticleSet empty;
      empty.shape = cfg.shape;
      empty.radius = cfg.shape.enclosing_radius();
      return empty;
    }
    return place_random_particles(cfg, cfg.particle_count, cfg.standoff);
  }
  cfg.shape.validate();
  ParticleSet set;
  set.shape = cfg.shape;
  set.radius = cfg.shape.enclosing_radius();
  set.placements = cfg.placements;
  const std::string err = check_particle_set(cfg, set, cfg.standoff);
  if (!err.empty()) throw ConfigError(err);
  return set;
}

}  // namespace qpg
