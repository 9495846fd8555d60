// qpgrating: command-line driver (solve, scatmat, sweep).

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpgrating/config_io.hpp"
#include "qpgrating/postproc.hpp"
#include "qpgrating/solver.hpp"

extern "C" void openblas_set_num_threads(int);

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace qpg;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void set_threads(int n) {
  if (n <= 0) return;
  omp_set_num_threads(n);
  openblas_set_num_threads(n);
}

void write_json(const fs::path& p, const ordered_json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

ordered_json flux_json(const FluxReport& f) {
  auto orders = [](const std::vector<OrderFlux>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& o : v)
      a.push_back({{"n", o.n}, {"kappa_n", o.kappa}, {"k_n", o.kz}, {"re", o.amplitude.real()},
                   {"im", o.amplitude.imag()}, {"flux", o.flux}});
    return a;
  };
  return {{"incoming", f.incoming_flux}, {"reflected", f.reflected_flux}, {"transmitted", f.transmitted_flux},
          {"error", f.error},           {"reflected_orders", orders(f.reflected)},
          {"transmitted_orders", orders(f.transmitted)}};
}

ordered_json wood_json(const std::vector<WoodFlag>& w) {
  ordered_json a = ordered_json::array();
  for (const auto& f : w) a.push_back({{"layer", f.layer}, {"order", f.order}, {"gap", f.gap}});
  return a;
}

void write_orders_csv(const fs::path& p, const ProblemConfig& cfg, const UnknownLayout& L, const CVec& alpha) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << "n,kappa_n,k1n_re,k1n_im,c_re,c_im,k3n_re,k3n_im,d_re,d_im\n";
  for (int n = -L.rb; n <= L.rb; ++n) {
    const double kn = kappa_n(cfg, n);
    const cplx k1n = vertical_wavenumber(cfg.k1, kn), k3n = vertical_wavenumber(cfg.k3, kn);
    const cplx c = alpha(L.c() + n + L.rb), d = alpha(L.d() + n + L.rb);
    out << n << ',' << g17(kn) << ',' << g17(k1n.real()) << ',' << g17(k1n.imag()) << ',' << g17(c.real()) << ','
        << g17(c.imag()) << ',' << g17(k3n.real()) << ',' << g17(k3n.imag()) << ',' << g17(d.real()) << ','
        << g17(d.imag()) << '\n';
  }
}

std::string cache_dir_for(const RunConfig& rc, const std::string& flag) {
  if (!flag.empty()) return flag;
  return rc.output.cache_dir;
}

// Looks up a cached matrix. Returns nothing on a miss; throws ConfigError on
// a key mismatch at the same hash unless force is set.
std::optional<ScatteringMatrix> cache_lookup(const fs::path& file, const std::string& key, bool force) {
  if (!fs::exists(file)) return std::nullopt;
  std::ifstream in(file);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception&) {
    if (force) return std::nullopt;
    throw ConfigError(file.string() + ": unreadable cache entry (use --force to overwrite)");
  }
  if (j.value("key", "") != key) {
    if (force) return std::nullopt;
    throw ConfigError(file.string() + ": cache entry holds a different matrix (" + j.value("key", "?") +
                      "); use --force to overwrite");
  }
  return scatmat_from_json(j);
}

struct ScatmatResult {
  ScatteringMatrix s;
  bool hit = false;
  fs::path file;
};

ScatmatResult obtain_scatmat(const ProblemConfig& c, const std::string& dir, bool force) {
  ScatmatResult r;
  const std::string key = scatmat_key(c.shape, c.k2, c.kp, c.multipole_order, c.particle_nodes);
  if (!dir.empty()) {
    r.file = fs::path(dir) / ("scatmat_" + scatmat_hash(key) + ".json");
    if (auto s = cache_lookup(r.file, key, force)) {
      r.s = *s;
      r.hit = true;
      return r;
    }
  }
  r.s = scattering_matrix(c.shape, c.k2, c.kp, c.multipole_order, c.particle_nodes, true);
  if (!dir.empty()) {
    fs::create_directories(dir);
    write_json(r.file, scatmat_to_json(r.s));
  }
  return r;
}

ordered_json solution_summary(const Solution& sol) {
  const CoupledProblem& pb = *sol.problem;
  const Timings& t = pb.timings;
  return {{"particles", pb.arr.count()},
          {"particle_radius", pb.particles.radius},
          {"timings",
           {{"assembly", t.assembly},
            {"factorization", t.factorization},
            {"scatmat", t.scatmat},
            {"coupling", t.coupling},
            {"gmres", t.gmres},
            {"total", t.total}}},
          {"gmres",
           {{"iterations", sol.iterations},
            {"residual", sol.gmres_residual},
            {"converged", sol.converged},
            {"history", sol.history}}},
          {"empty_system", {{"rows", pb.sys.A.rows()}, {"cols", pb.sys.A.cols()}}},
          {"coupled_residual", sol.coupled_residual},
          {"wall_discrepancy", sol.wall_discrepancy}};
}

int run_solve(const std::string& path, const std::string& out_flag, bool field_flag, bool dry_run,
              const std::string& cache_flag) {
  RunConfig rc = load_run_config(path);
  if (!out_flag.empty()) rc.output.dir = out_flag;
  if (field_flag && !rc.output.field) rc.output.field = GridSpec{};
  const ProblemConfig& cfg = rc.problem;
  if (dry_run) {
    make_particles(cfg);  // placement feasibility is part of validation
    std::cout << to_json(rc).dump(2) << "\n";
    return 0;
  }
  const fs::path dir(rc.output.dir);
  fs::create_directories(dir);
  ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "solve";
  report["config"] = to_json(rc);
  report["wood"] = wood_json(wood_anomaly_report(cfg, rc.output.wood_tolerance));
  const fs::path report_path = dir / "report.json";
  try {
    SetupOptions opt;
    ScatmatResult sm;
    const bool has_particles = cfg.particle_count > 0 || !cfg.placements.empty();
    const auto t0 = std::chrono::steady_clock::now();
    if (has_particles) {
      sm = obtain_scatmat(cfg, cache_dir_for(rc, cache_flag), false);
      opt.smat = &sm.s;
      report["scatmat_cache"] = {{"file", sm.file.string()}, {"hit", sm.hit}};
    }
    const double t_sm = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const Solution sol = solve_full(cfg, opt);
    ordered_json summary = solution_summary(sol);
    summary["timings"]["scatmat"] = t_sm;
    for (auto& [k, v] : summary.items()) report[k] = v;
    report["flux"] = flux_json(flux_error(cfg, sol.problem->sys.layout, sol.alpha));
    ordered_json pls = ordered_json::array();
    for (const auto& p : sol.problem->particles.placements)
      pls.push_back({{"x", p.center.x}, {"y", p.center.y}, {"rotation", p.rotation}});
    report["placements"] = pls;

    ordered_json outputs = {{"report", report_path.string()}};
    const fs::path orders = dir / "orders.csv";
    write_orders_csv(orders, cfg, sol.problem->sys.layout, sol.alpha);
    outputs["orders"] = orders.string();
    if (rc.output.field) {
      const FieldGrid grid = eval_total_field_grid(sol, *rc.output.field);
      const fs::path bin = dir / "field.bin", js = dir / "field.json";
      write_field_files(grid, bin.string(), js.string());
      outputs["field_bin"] = bin.string();
      outputs["field_json"] = js.string();
    }
    report["outputs"] = outputs;
    report["status"] = sol.converged ? "ok" : "not_converged";
    write_json(report_path, report);
    std::cout << "flux error " << g17(sol.flux_error) << ", GMRES iterations " << sol.iterations << ", residual "
              << g17(sol.gmres_residual) << "\n"
              << "report: " << report_path.string() << "\n";
    if (!sol.converged) {
      std::cerr << "GMRES did not reach the tolerance within " << cfg.gmres_maxit << " iterations\n";
      return kExitNumerical;
    }
    return 0;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    report["status"] = "failed";
    report["error"] = e.what();
    write_json(report_path, report);
    throw;
  }
}

int run_scatmat(const std::string& path, const std::string& cache_flag, bool force) {
  const RunConfig rc = load_run_config(path);
  const ProblemConfig& c = rc.problem;
  c.shape.validate();
  std::string dir = cache_dir_for(rc, cache_flag);
  if (dir.empty()) dir = "scatmat_cache";
  const ScatmatResult r = obtain_scatmat(c, dir, force);
  std::cout << (r.hit ? "cache hit: " : "computed: ") << r.file.string() << "\n";
  if (!r.hit && c.shape.a2 == 0.0) {
    double err = 0.0;
    for (int l = -r.s.p; l <= r.s.p; ++l)
      for (int n = -r.s.p; n <= r.s.p; ++n) {
        const cplx ref = l == n ? disk_scattering_coefficient(n, c.shape.a1, c.k2, c.kp) : cplx{};
        err = std::max(err, std::abs(r.s.at(l, n) - ref));
      }
    std::cout << "disk self-test: max deviation " << g17(err) << (err <= 1e-10 ? " (pass)" : " (FAIL)") << "\n";
    if (err > 1e-10) {
      fs::remove(r.file);
      return kExitNumerical;
    }
  }
  return 0;
}

std::vector<double> parse_values(const std::string& arg) {
  std::vector<double> out;
  std::stringstream ss(arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || tok.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError("--values: cannot parse '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

int run_sweep(const std::string& path, const std::string& var, const std::vector<double>& values, bool scale_size,
              const std::string& out_flag, const std::string& cache_flag) {
  RunConfig rc = load_run_config(path);
  if (!out_flag.empty()) rc.output.dir = out_flag;
  if (var != "M" && var != "k2" && var != "theta" && var != "seed")
    throw ConfigError("--var: must be one of M, k2, theta, seed");
  const fs::path dir(rc.output.dir);
  fs::create_directories(dir);
  const fs::path csv = dir / "sweep.csv";
  std::ofstream out(csv);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  out << "var,value,status,particles,iterations,gmres_residual,converged,flux_error,coupled_residual,"
         "wall_discrepancy,time_total,error\n";
  const int base_m = std::max(rc.problem.particle_count, 1);
  for (double v : values) {
    ProblemConfig c = rc.problem;
    std::string status = "ok", err;
    ordered_json row;
    try {
      if (var == "M") {
        if (v < 0 || v != std::floor(v)) throw ConfigError("M values must be non-negative integers");
        c.particle_count = static_cast<int>(v);
        if (scale_size && v > 0) {
          const double s = std::sqrt(static_cast<double>(base_m) / v);
          c.shape.a1 *= s;
          c.shape.a2 *= s;
        }
      } else if (var == "k2") {
        c.k2 = v;
      } else if (var == "theta") {
        c.theta = v;
      } else {
        c.seed = static_cast<std::uint64_t>(v);
      }
      c.validate();
      SetupOptions opt;
      ScatmatResult sm;
      if (c.particle_count > 0 || !c.placements.empty()) {
        sm = obtain_scatmat(c, cache_dir_for(rc, cache_flag), false);
        opt.smat = &sm.s;
      }
      const Solution sol = solve_full(c, opt);
      if (!sol.converged) status = "not_converged";
      out << var << ',' << g17(v) << ',' << status << ',' << sol.problem->arr.count() << ',' << sol.iterations << ','
          << g17(sol.gmres_residual) << ',' << (sol.converged ? 1 : 0) << ',' << g17(sol.flux_error) << ','
          << g17(sol.coupled_residual) << ',' << g17(sol.wall_discrepancy) << ',' << g17(sol.problem->timings.total)
          << ",\n";
    } catch (const std::exception& e) {
      err = e.what();
      for (char& ch : err)
        if (ch == ',' || ch == '\n') ch = ';';
      out << var << ',' << g17(v) << ",failed,,,,,,,,," << err << "\n";
    }
    out.flush();
    std::cout << var << " = " << g17(v) << ": " << (err.empty() ? status : "failed: " + err) << "\n";
  }
  std::cout << "sweep table: " << csv.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-periodic three-layer grating scattering solver"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: all cores)");

  std::string config, out_dir, cache_dir, var;
  bool dry_run = false, field = false, force = false, scale_size = false;
  std::string values_arg;

  auto* solve = app.add_subcommand("solve", "Solve one configuration and write report.json and orders.csv");
  solve->add_option("config", config, "JSON configuration")->required();
  solve->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  solve->add_flag("--field", field, "Write field.bin/field.json with the default grid");
  solve->add_flag("--dry-run", dry_run, "Validate and print the resolved configuration");
  solve->add_option("--cache-dir", cache_dir, "Scattering-matrix cache directory");

  auto* scat = app.add_subcommand("scatmat", "Compute and cache the particle scattering matrix");
  scat->add_option("config", config, "JSON configuration")->required();
  scat->add_option("--cache-dir", cache_dir, "Cache directory (default output.cache_dir or scatmat_cache)");
  scat->add_flag("--force", force, "Overwrite a cache entry holding a different matrix");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write sweep.csv");
  sweep->add_option("config", config, "JSON configuration")->required();
  sweep->add_option("--var", var, "Swept variable: M, k2, theta or seed")->required();
  sweep->add_option("--values", values_arg, "Comma-separated values (empty for none)");
  sweep->add_flag("--scale-size", scale_size, "For M sweeps, scale the particle size to keep the fill fraction");
  sweep->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  sweep->add_option("--cache-dir", cache_dir, "Scattering-matrix cache directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }
  set_threads(threads);

  try {
    if (*solve) return run_solve(config, out_dir, field, dry_run, cache_dir);
    if (*scat) return run_scatmat(config, cache_dir, force);
    if (*sweep) return run_sweep(config, var, parse_values(values_arg), scale_size, out_dir, cache_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
