#pragma once

// Unit-cell geometry: interface profiles, particle shapes, and their
// discretizations.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpgrating/types.hpp"

namespace qpg {

/// Invalid or infeasible problem description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// y = mean + sum_j (sin_coeffs[j-1] sin(2 pi j x / d) + cos_coeffs[j-1] cos(2 pi j x / d)).
struct TrigProfile {
  double mean = 0.0;
  std::vector<double> sin_coeffs;
  std::vector<double> cos_coeffs;

  double height(double x, double period) const;
  double slope(double x, double period) const;
  /// f(x + dx) - f(x) without cancellation for small dx.
  double increment(double x, double dx, double period) const;
  double max_height(double period) const;
  double min_height(double period) const;
};

/// Particle boundary r(t) = a1 + a2 cos(a3 t).
struct ParticleShape {
  double a1 = 0.0;
  double a2 = 0.0;
  int a3 = 1;

  double enclosing_radius() const { return a1 + a2; }
  void validate() const;
};

/// A smooth parametrized curve. Periodic in its parameter with period
/// param_period(), the point advancing by period_shift() per period.
class ParamCurve {
 public:
  virtual ~ParamCurve() = default;
  virtual Vec2 point(double t) const = 0;
  virtual Vec2 velocity(double t) const = 0;
  virtual Vec2 normal(double t) const = 0;
  /// point(t + dt) - point(t), accurate to relative precision as dt -> 0.
  virtual Vec2 chord(double t, double dt) const = 0;
  virtual double param_period() const = 0;
  virtual Vec2 period_shift() const = 0;
  double speed(double t) const { return velocity(t).norm(); }
};

/// Interface graph x -> (x, f(x)); normal points to +y.
class GraphCurve final : public ParamCurve {
 public:
  GraphCurve(TrigProfile profile, double period) : profile_(std::move(profile)), period_(period) {}
  Vec2 point(double t) const override { return {t, profile_.height(t, period_)}; }
  Vec2 velocity(double t) const override { return {1.0, profile_.slope(t, period_)}; }
  Vec2 normal(double t) const override;
  Vec2 chord(double t, double dt) const override { return {dt, profile_.increment(t, dt, period_)}; }
  double param_period() const override { return period_; }
  Vec2 period_shift() const override { return {period_, 0.0}; }
  const TrigProfile& profile() const { return profile_; }

 private:
  TrigProfile profile_;
  double period_;
};

/// Closed star-shaped particle boundary, counterclockwise; normal outward.
class StarCurve final : public ParamCurve {
 public:
  StarCurve(ParticleShape shape, Vec2 center, double rotation)
      : shape_(shape), center_(center), rotation_(rotation) {}
  Vec2 point(double t) const override;
  Vec2 velocity(double t) const override;
  Vec2 normal(double t) const override;
  Vec2 chord(double t, double dt) const override;
  double param_period() const override { return 2.0 * kPi; }
  Vec2 period_shift() const override { return {0.0, 0.0}; }

 private:
  ParticleShape shape_;
  Vec2 center_;
  double rotation_;
};

enum class Closure {
  closed,          ///< periodic parameter, no translation
  periodic_phase,  ///< one period of a quasi-periodic curve; wraps with Bloch phase
  open,            ///< segment (walls, lids)
};

struct DiscretizedCurve {
  std::shared_ptr<const ParamCurve> param;  ///< null for straight segments
  Closure closure = Closure::open;
  double t_start = 0.0;  ///< t_i = t_start + i * h for periodic kinds
  double h = 0.0;
  std::vector<double> t;
  std::vector<Vec2> nodes;
  std::vector<Vec2> normals;
  std::vector<double> speeds;
  std::vector<double> weights;  ///< quadrature weight including speed

  std::size_t size() const { return nodes.size(); }
};

struct Placement {
  Vec2 center;
  double rotation = 0.0;
};

struct ParticleSet {
  ParticleShape shape;
  double radius = 0.0;
  std::vector<Placement> placements;

  std::size_t size() const { return placements.size(); }
};

struct ProblemConfig {
  double period = 1.0;
  double k1 = 10.0, k2 = 5.0, k3 = 10.0, kp = 30.0;
  double theta = -kPi / 2;
  TrigProfile upper{1.0, {0.1}, {}};
  TrigProfile lower{-1.0, {}, {0.1}};
  std::optional<double> y0;

  int copies = 1;
  int j_order = 36;
  int rb_order = 20;
  int multipole_order = 10;
  int interface_nodes = 120;
  int lid_nodes = 50;
  double wall_density = 48.0;
  int wall_min_nodes = 20;
  int particle_nodes = 300;
  int alpert_order = 16;

  double regularization = 1e-10;
  bool column_scaling = true;
  bool row_scaling = true;
  double gmres_tol = 1e-10;
  int gmres_maxit = 200;

  ParticleShape shape{0.0309, 0.0103, 3};
  int particle_count = 0;
  std::uint64_t seed = 1;
  double standoff = 0.1;
  bool allow_wall_intersection = false;
  std::vector<Placement> placements;  ///< explicit placements override random ones

  double kappa() const { return k1 * std::cos(theta); }
  cplx bloch_phase() const { return std::polar(1.0, kappa() * period); }
  double resolved_y0() const;
  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Nodes at x = -d/2 + d (i + 1/2) / N, upward normals.
DiscretizedCurve sample_interface(const TrigProfile& profile, int n, double period);

/// Closed particle boundary with nodes at t = 2 pi i / N, outward normals.
DiscretizedCurve sample_particle(const ParticleShape& shape, Vec2 center, double rotation, int n);

/// Vertical segment at x from y_lo to y_hi with Gauss-Legendre nodes, normal +x.
DiscretizedCurve sample_wall(double x, double y_lo, double y_hi, int n);

/// Horizontal segment at height y with N equispaced nodes, normal +y.
DiscretizedCurve sample_lid(double y, int n, double period);

struct WallsAndLids {
  std::array<DiscretizedCurve, 3> left;   ///< L_1, L_2, L_3
  std::array<DiscretizedCurve, 3> right;  ///< R_1, R_2, R_3
  DiscretizedCurve upper_lid;
  DiscretizedCurve lower_lid;
};

int wall_node_count(const ProblemConfig& cfg, double height);
WallsAndLids sample_walls_and_lids(const ProblemConfig& cfg);

/// Distance from a point to the graph of a profile (all periodic copies).
double distance_to_profile(const TrigProfile& profile, double period, Vec2 p);

/// Rejection-sampled particle placement. Throws ConfigError naming the
/// particle index that could not be placed.
ParticleSet place_random_particles(const ProblemConfig& cfg, int count, double standoff);

/// Checks the ParticleSet invariants; returns an empty string when they hold.
std::string check_particle_set(const ProblemConfig& cfg, const ParticleSet& set, double standoff);

/// Particles for a config: explicit placements if given, else random.
ParticleSet make_particles(const ProblemConfig& cfg);

}  // namespace qpg
