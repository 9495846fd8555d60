#pragma once

// JSON run configuration: schema parsing with pointer-qualified errors, the
// resolved-defaults echo, and the scattering-matrix cache format.

#include <optional>
#include <string>

#include <json.hpp>

#include "qpgrating/geometry.hpp"
#include "qpgrating/postproc.hpp"
#include "qpgrating/scatmat.hpp"

namespace qpg {

inline constexpr int kSchemaVersion = 1;

struct OutputOptions {
  std::string dir = ".";
  std::optional<GridSpec> field;
  double wood_tolerance = 1e-8;
  std::string cache_dir;  ///< scattering-matrix cache; empty disables it
};

struct RunConfig {
  ProblemConfig problem;
  OutputOptions output;
};

/// Throws ConfigError with a JSON pointer to the offending entry.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Every field with defaults filled in; parse_run_config(to_json(c)) == c.
nlohmann::ordered_json to_json(const RunConfig& c);

/// Cache key of a scattering matrix and its 64-bit FNV-1a hash.
std::string scatmat_key(const ParticleShape& shape, double k2, double kp, int p, int nodes);
std::string scatmat_hash(const std::string& key);

nlohmann::ordered_json scatmat_to_json(const ScatteringMatrix& s);
ScatteringMatrix scatmat_from_json(const nlohmann::json& j);

}  // namespace qpg
