#pragma once

// Diffraction-order fluxes, Wood's-anomaly diagnostics and total-field
// evaluation.

#include <string>
#include <vector>

#include "qpgrating/solver.hpp"

namespace qpg {

struct OrderFlux {
  int n = 0;
  double kappa = 0.0;
  double kz = 0.0;      ///< k_{1,n} or k_{3,n}
  cplx amplitude;       ///< c_n or d_n
  double flux = 0.0;    ///< kz |amplitude|^2
};

struct FluxReport {
  std::vector<OrderFlux> reflected, transmitted;
  double reflected_flux = 0.0;
  double transmitted_flux = 0.0;
  double incoming_flux = 0.0;  ///< k1 |sin theta|
  double error = 0.0;          ///< |reflected + transmitted - incoming|
};

/// Propagating orders only (k_{j,n} > 0).
FluxReport flux_error(const ProblemConfig& cfg, const UnknownLayout& layout, const CVec& alpha);

struct WoodFlag {
  int layer = 0;  ///< 1 or 3
  int order = 0;
  double gap = 0.0;  ///< |kappa_n| - k_j
};

/// Orders with ||kappa_n| - k_j| <= tol in the outer layers.
std::vector<WoodFlag> wood_anomaly_report(const ProblemConfig& cfg, double tol = 1e-8);

struct GridSpec {
  int nx = 101, ny = 201;
  double x_min = -0.5, x_max = 0.5, y_min = -2.0, y_max = 2.0;
  bool interior = false;  ///< reconstruct fields inside particles instead of masking
};

struct FieldGrid {
  GridSpec spec;
  std::vector<Vec2> points;  ///< row-major, x fastest
  std::vector<cplx> value;
  std::vector<int> layer;    ///< 1, 2, 3; 0 inside a particle
  std::vector<std::uint8_t> mask;
};

/// Total field at arbitrary points (incident wave included in layer 1).
FieldGrid eval_total_field(const Solution& sol, const std::vector<Vec2>& points, bool interior = false);
FieldGrid eval_total_field_grid(const Solution& sol, const GridSpec& spec);

/// Max |alpha u(-d/2, y) - u(d/2, y)| over sample heights in each layer away
/// from the interfaces and particle disks.
double wall_discrepancy(const Solution& sol, int samples_per_layer = 12);

/// Raw little-endian complex128 array plus a JSON header beside it.
void write_field_files(const FieldGrid& grid, const std::string& bin_path, const std::string& json_path);

}  // namespace qpg
