// Acceptance run: one PASS/FAIL line per criterion.

#include <omp.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qpgrating/config_io.hpp"
#include "qpgrating/postproc.hpp"
#include "qpgrating/solver.hpp"

extern "C" void openblas_set_num_threads(int);

namespace fs = std::filesystem;
using namespace qpg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ProblemConfig load(const std::string& name) { return load_run_config(std::string(QPG_CONFIG_DIR) + "/" + name).problem; }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

// Runs one criterion; an exception is a failure with its message.
void criterion(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void empty_grating() {
  const auto t0 = Clock::now();
  const Solution s = solve_full(load("fig2.json"));
  const double t = seconds_since(t0);
  report(1, s.flux_error <= 1e-12 && t <= 30.0,
         "empty grating flux error " + fmt("%.3e", s.flux_error) + " (<= 1e-12), time " + fmt("%.2f", t) +
             " s single-threaded (<= 30 s)");
}

void disk_oracle() {
  const double radius = 0.05, k2 = 8.0, kp = 30.0;
  const int p = 10;
  const ScatteringMatrix s = scattering_matrix({radius, 0.0, 3}, k2, kp, p, 300);
  double diag = 0.0, off = 0.0;
  for (int l = -p; l <= p; ++l)
    for (int n = -p; n <= p; ++n) {
      if (l == n)
        diag = std::max(diag, std::abs(s.at(l, n) - disk_scattering_coefficient(n, radius, k2, kp)));
      else
        off = std::max(off, std::abs(s.at(l, n)));
    }
  report(2, diag <= 1e-10 && off <= 1e-10,
         "disk scattering matrix max deviation " + fmt("%.3e", diag) + ", max off-diagonal " + fmt("%.3e", off) +
             " (<= 1e-10)");
}

void example1() {
  const auto t0 = Clock::now();
  const Solution s = solve_full(load("example1.json"));
  const double t = seconds_since(t0);
  const bool pass = s.converged && s.gmres_residual <= 1e-10 && s.iterations <= 150 && s.flux_error <= 1e-8 &&
                    t <= 600.0;
  report(3, pass,
         "Example 1, M=" + std::to_string(s.problem->arr.count()) + ": flux error " + fmt("%.3e", s.flux_error) +
             " (<= 1e-8), GMRES " + std::to_string(s.iterations) + " iterations (<= 150) to " +
             fmt("%.2e", s.gmres_residual) + " (<= 1e-10), time " + fmt("%.1f", t) + " s (<= 600 s)");
}

void example2() {
  const ProblemConfig cfg = load("example2.json");
  const Solution s = solve_full(cfg);
  // kappa_n = k1 cos(theta) + 2 pi n / d; at this angle kappa_{+1} = k1.
  bool flagged = false;
  for (const WoodFlag& f : wood_anomaly_report(cfg))
    if (f.layer == 1 && f.order == 1) flagged = true;
  const bool pass = s.converged && s.flux_error <= 1e-8 && flagged;
  report(4, pass,
         "Example 2 (Wood anomaly), M=" + std::to_string(s.problem->arr.count()) + ": flux error " +
             fmt("%.3e", s.flux_error) + " (<= 1e-8), GMRES " + std::to_string(s.iterations) +
             " iterations, Wood report " + (flagged ? "flags" : "misses") + " layer 1 order +1");
}

void example3() {
  ProblemConfig cfg = load("example3.json");
  const double k2s[] = {1.0, 10.0};
  const int reference[] = {13, 15};
  bool pass = true;
  std::ostringstream detail;
  detail << "Example 3:";
  for (int i = 0; i < 2; ++i) {
    cfg.k2 = k2s[i];
    const Solution s = solve_full(cfg);
    const double ratio = static_cast<double>(s.iterations) / reference[i];
    pass = pass && s.converged && s.flux_error <= 1e-8 && ratio <= 2.0 && ratio >= 0.5;
    detail << " k2=" << k2s[i] << " flux error " << fmt("%.3e", s.flux_error) << ", " << s.iterations
           << " iterations (reference " << reference[i] << ");";
  }
  detail << " bounds: flux error <= 1e-8, iterations within 2x";
  report(5, pass, detail.str());
}

void flatness() {
  // Particle size scaled with 1/sqrt(M) so the area fraction matches M=100.
  const ProblemConfig base = load("example1.json");
  std::vector<int> scaled, fixed;
  for (int m : {25, 50, 100}) {
    ProblemConfig c = base;
    c.particle_count = m;
    fixed.push_back(solve_full(c).iterations);
    const double f = std::sqrt(100.0 / m);
    c.shape.a1 *= f;
    c.shape.a2 *= f;
    scaled.push_back(solve_full(c).iterations);
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  const double spread = static_cast<double>(*hi - *lo) / *lo;
  auto list = [](const std::vector<int>& v) {
    return std::to_string(v[0]) + "/" + std::to_string(v[1]) + "/" + std::to_string(v[2]);
  };
  report(6, spread <= 0.25,
         "iterations at M=25/50/100 " + list(scaled) + " with size scaled to constant fill, spread " +
             fmt("%.0f", 100.0 * spread) + "% (<= 25%); fixed size " + list(fixed));
}

void property_suites() {
  const fs::path dir(QPG_TEST_DIR);
  const char* suites[] = {"specialfn", "geometry", "quadrature", "layerpot", "empty_grating",
                          "scatmat",   "multiscat", "solver",    "postproc", "cli"};
  bool pass = true;
  std::ostringstream detail;
  for (const char* s : suites) {
    const fs::path exe = dir / (std::string("test_") + s);
    const std::string cmd = "\"" + exe.string() + "\" > /dev/null 2>&1";
    const auto t0 = Clock::now();
    const int status = std::system(cmd.c_str());
    const double t = seconds_since(t0);
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0 && t < 60.0;
    pass = pass && ok;
    detail << " " << s << (ok ? "" : " FAILED") << " " << fmt("%.1f", t) << "s";
  }
  report(7, pass, "property suites (each exit 0 in < 60 s):" + detail.str());
}

}  // namespace

int main() {
  omp_set_num_threads(1);
  openblas_set_num_threads(1);
  criterion(1, empty_grating);
  criterion(2, disk_oracle);
  criterion(3, example1);
  criterion(4, example2);
  criterion(5, example3);
  criterion(6, flatness);
  criterion(7, property_suites);
  return failures == 0 ? 0 : 1;
}
