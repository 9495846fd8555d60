#include "qpgrating/postproc.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qpgrating/specialfn.hpp"

namespace qpg {

FluxReport flux_error(const ProblemConfig& cfg, const UnknownLayout& L, const CVec& alpha) {
  FluxReport r;
  for (int n = -L.rb; n <= L.rb; ++n) {
    const double kn = kappa_n(cfg, n);
    const cplx k1n = vertical_wavenumber(cfg.k1, kn), k3n = vertical_wavenumber(cfg.k3, kn);
    if (k1n.imag() == 0.0 && k1n.real() > 0.0) {
      const cplx c = alpha(L.c() + n + L.rb);
      r.reflected.push_back({n, kn, k1n.real(), c, k1n.real() * std::norm(c)});
      r.reflected_flux += r.reflected.back().flux;
    }
    if (k3n.imag() == 0.0 && k3n.real() > 0.0) {
      const cplx d = alpha(L.d() + n + L.rb);
      r.transmitted.push_back({n, kn, k3n.real(), d, k3n.real() * std::norm(d)});
      r.transmitted_flux += r.transmitted.back().flux;
    }
  }
  r.incoming_flux = cfg.k1 * std::abs(std::sin(cfg.theta));
  r.error = std::abs(r.reflected_flux + r.transmitted_flux - r.incoming_flux);
  return r;
}

std::vector<WoodFlag> wood_anomaly_report(const ProblemConfig& cfg, double tol) {
  std::vector<WoodFlag> out;
  const double step = 2.0 * kPi / cfg.period;
  const std::array<std::pair<int, double>, 2> layers{{{1, cfg.k1}, {3, cfg.k3}}};
  for (const auto& [j, k] : layers) {
    const int lo = static_cast<int>(std::floor((-k - cfg.kappa()) / step)) - 1;
    const int hi = static_cast<int>(std::ceil((k - cfg.kappa()) / step)) + 1;
    for (int n = lo; n <= hi; ++n) {
      const double gap = std::abs(kappa_n(cfg, n)) - k;
      if (std::abs(gap) <= tol) out.push_back({j, n, gap});
    }
  }
  return out;
}

namespace {

struct ParticleLocator {
  const CoupledProblem& pb;
  double near_band = 0.0;

  struct Hit {
    int m = -1, l = 0;
    Vec2 local;
    bool inside = false, near_curve = false, in_disk = false;
  };

  // Closest particle copy whose enclosing disk contains x (m == -1 if none).
  Hit locate(Vec2 x) const {
    Hit h;
    const ParticleArray& arr = pb.arr;
    const ParticleShape& s = pb.particles.shape;
    double best = arr.radius * 1.5;
    for (int m = 0; m < arr.count(); ++m) {
      for (int l = -arr.copies; l <= arr.copies; ++l) {
        const Vec2 rel = x - (arr.centers[m] + Vec2{l * arr.period, 0.0});
        const double r = rel.norm();
        if (r >= best) continue;
        best = r;
        h.m = m;
        h.l = l;
        h.local = rotate(rel, -arr.rotations[m]);
        const double t = h.local.angle();
        const double rb = s.a1 + s.a2 * std::cos(s.a3 * t);
        h.inside = r < rb;
        h.near_curve = std::abs(r - rb) < near_band;
        h.in_disk = r < arr.radius;
      }
    }
    return h;
  }
};

}  // namespace

FieldGrid eval_total_field(const Solution& sol, const std::vector<Vec2>& points, bool interior) {
  const CoupledProblem& pb = *sol.problem;
  const ProblemConfig& cfg = pb.cfg;
  FieldGrid g;
  g.points = points;
  const std::size_t np = points.size();
  g.value.assign(np, 0.0);
  g.layer.assign(np, 0);
  g.mask.assign(np, kMaskNone);

  const FieldSample base = eval_empty_field(cfg, pb.geo, pb.sys.layout, sol.alpha, points);
  const int M = pb.arr.count();
  if (M == 0) {
    g.value = base.value;
    g.layer = base.layer;
    g.mask = base.mask;
    return g;
  }

  // Densities of each particle for its final incoming expansion.
  const DiscretizedCurve ref = sample_particle(pb.particles.shape, {0.0, 0.0}, 0.0, pb.smat->nodes);
  double hmax = 0.0;
  for (double w : ref.weights) hmax = std::max(hmax, w);
  std::vector<MullerDensities> dens(M);
  const int b = pb.arr.block();
  for (int m = 0; m < M; ++m)
    dens[m] = particle_densities(*pb.smat, pb.arr.rotations[m], sol.incoming.segment(m * b, b));

  const ParticleLocator loc{pb, 5.0 * hmax};
  const cplx a = cfg.bloch_phase();
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < np; ++i) {
    const Vec2 x = points[i];
    g.layer[i] = base.layer[i];
    g.mask[i] = base.mask[i];
    g.value[i] = base.value[i];
    if (base.layer[i] != 2) continue;
    const auto hit = loc.locate(x);
    if (hit.m >= 0 && hit.near_curve) {
      g.mask[i] = kMaskNearCurve;
      g.value[i] = 0.0;
      continue;
    }
    if (hit.m >= 0 && hit.inside) {
      g.layer[i] = 0;
      if (!interior) {
        g.mask[i] = kMaskParticle;
        g.value[i] = 0.0;
      } else {
        g.mask[i] = kMaskNone;
        g.value[i] = phase_pow(a, hit.l) * eval_particle_field(ref, dens[hit.m], cfg.kp, {hit.local})[0];
      }
      continue;
    }
    if (base.mask[i] != kMaskNone) continue;
    // Multipole sums, except the nearest copy when x is close to it, which
    // uses the particle's exterior density representation instead.
    cplx u{};
    std::vector<cplx> v(b);
    for (int m = 0; m < M; ++m) {
      for (int l = -pb.arr.copies; l <= pb.arr.copies; ++l) {
        const cplx w = phase_pow(a, l);
        if (m == hit.m && l == hit.l) {
          u += w * eval_particle_field(ref, dens[m], cfg.k2, {hit.local})[0];
          continue;
        }
        outgoing_waves(pb.arr.p, pb.arr.k, x - (pb.arr.centers[m] + Vec2{l * pb.arr.period, 0.0}), v);
        for (int n = 0; n < b; ++n) u += w * sol.beta(m * b + n) * v[n];
      }
    }
    g.value[i] += u;
  }
  return g;
}

FieldGrid eval_total_field_grid(const Solution& sol, const GridSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1) throw std::invalid_argument("grid needs at least one point per axis");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(spec.nx) * spec.ny);
  for (int j = 0; j < spec.ny; ++j) {
    const double y = spec.ny == 1 ? spec.y_min : spec.y_min + (spec.y_max - spec.y_min) * j / (spec.ny - 1);
    for (int i = 0; i < spec.nx; ++i) {
      const double x = spec.nx == 1 ? spec.x_min : spec.x_min + (spec.x_max - spec.x_min) * i / (spec.nx - 1);
      pts.push_back({x, y});
    }
  }
  FieldGrid g = eval_total_field(sol, pts, spec.interior);
  g.spec = spec;
  return g;
}

double wall_discrepancy(const Solution& sol, int samples_per_layer) {
  const CoupledProblem& pb = *sol.problem;
  const ProblemConfig& cfg = pb.cfg;
  const double d = cfg.period, margin = 0.05;
  const double y_hi = pb.geo.y0 + 0.3, y_lo = -pb.geo.y0 - 0.3;
  std::vector<Vec2> left, right;
  const int ns = 3 * samples_per_layer;
  for (int s = 0; s < ns; ++s) {
    const double y = y_lo + (y_hi - y_lo) * (s + 0.5) / ns;
    const Vec2 xl{-0.5 * d, y}, xr{0.5 * d, y};
    bool ok = distance_to_profile(cfg.upper, d, xl) > margin && distance_to_profile(cfg.lower, d, xl) > margin &&
              distance_to_profile(cfg.upper, d, xr) > margin && distance_to_profile(cfg.lower, d, xr) > margin;
    for (int m = 0; ok && m < pb.arr.count(); ++m)
      for (int l = -pb.arr.copies - 1; l <= pb.arr.copies + 1; ++l) {
        const Vec2 c = pb.arr.centers[m] + Vec2{l * d, 0.0};
        if ((xl - c).norm() < 1.2 * pb.arr.radius || (xr - c).norm() < 1.2 * pb.arr.radius) ok = false;
      }
    if (!ok) continue;
    left.push_back(xl);
    right.push_back(xr);
  }
  if (left.empty()) return 0.0;
  const FieldGrid fl = eval_total_field(sol, left), fr = eval_total_field(sol, right);
  const cplx a = cfg.bloch_phase();
  double worst = 0.0;
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (fl.mask[i] != kMaskNone || fr.mask[i] != kMaskNone) continue;
    worst = std::max(worst, std::abs(a * fl.value[i] - fr.value[i]));
  }
  return worst;
}

void write_field_files(const FieldGrid& grid, const std::string& bin_path, const std::string& json_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + bin_path);
  for (const cplx& v : grid.value) {
    const double re = v.real(), im = v.imag();
    bin.write(reinterpret_cast<const char*>(&re), sizeof re);
    bin.write(reinterpret_cast<const char*>(&im), sizeof im);
  }
  bin.write(reinterpret_cast<const char*>(grid.mask.data()), static_cast<std::streamsize>(grid.mask.size()));
  std::vector<std::int8_t> layer(grid.layer.begin(), grid.layer.end());
  bin.write(reinterpret_cast<const char*>(layer.data()), static_cast<std::streamsize>(layer.size()));

  nlohmann::ordered_json h;
  h["nx"] = grid.spec.nx;
  h["ny"] = grid.spec.ny;
  h["x_range"] = {grid.spec.x_min, grid.spec.x_max};
  h["y_range"] = {grid.spec.y_min, grid.spec.y_max};
  h["order"] = "row-major, x fastest, y increasing";
  h["values"] = {{"offset", 0}, {"dtype", "complex128 little-endian (re, im)"}, {"count", grid.value.size()}};
  h["mask"] = {{"offset", 16 * grid.value.size()},
               {"dtype", "uint8"},
               {"encoding", {{"0", "valid"}, {"1", "near a boundary"}, {"2", "inside a particle"}}}};
  h["layer"] = {{"offset", 17 * grid.value.size()},
                {"dtype", "int8"},
                {"encoding", {{"0", "particle interior"}, {"1", "upper"}, {"2", "middle"}, {"3", "lower"}}}};
  h["interior_reconstructed"] = grid.spec.interior;
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot open " + json_path);
  js << h.dump(2) << "\n";
}

}  // namespace qpg
