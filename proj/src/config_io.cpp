#include "qpgrating/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace qpg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads one JSON object, tracking which keys were consumed so that unknown
// keys can be reported.
class Section {
 public:
  Section(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) fail(ptr_.empty() ? "/" : ptr_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(has(key) ? j_.at(key) : empty, path(key));
  }

  void number(const std::string& key, double& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    out = v.get<int>();
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(path(key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(path(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(path(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
  }

  void range(const std::string& key, double& lo, double& hi) {
    std::vector<double> r;
    numbers(key, r);
    if (!has(key)) return;
    if (r.size() != 2 || !(r[0] < r[1])) fail(path(key), "expected [min, max] with min < max");
    lo = r[0];
    hi = r[1];
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(path(k), "unknown key");
  }

  std::string path(const std::string& key) const { return ptr_ + "/" + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
  }

 private:
  const json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

void read_profile(Section s, TrigProfile& p) {
  s.number("mean", p.mean);
  s.numbers("sin", p.sin_coeffs);
  s.numbers("cos", p.cos_coeffs);
  s.finish();
}

ordered_json profile_json(const TrigProfile& p) {
  return {{"mean", p.mean}, {"sin", p.sin_coeffs}, {"cos", p.cos_coeffs}};
}

// Wraps a validation failure with the pointer of the section it concerns.
template <class F>
void checked(const std::string& ptr, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(ptr + ": " + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig rc;
  ProblemConfig& c = rc.problem;
  Section top(j, "");
  int version = -1;
  top.integer("schema_version", version);
  if (version != kSchemaVersion)
    Section::fail("/schema_version", "required, must be " + std::to_string(kSchemaVersion));
  top.number("period", c.period);
  top.number("theta", c.theta);
  {
    Section k = top.sub("wavenumbers");
    k.number("k1", c.k1);
    k.number("k2", c.k2);
    k.number("k3", c.k3);
    k.number("kp", c.kp);
    k.finish();
  }
  {
    Section s = top.sub("interfaces");
    if (s.has("upper")) read_profile(s.sub("upper"), c.upper);
    else s.sub("upper");
    if (s.has("lower")) read_profile(s.sub("lower"), c.lower);
    else s.sub("lower");
    if (s.has("y0")) {
      double y = 0.0;
      s.number("y0", y);
      c.y0 = y;
    } else {
      s.sub("y0");
    }
    s.finish();
  }
  {
    Section s = top.sub("discretization");
    s.integer("copies", c.copies);
    s.integer("j_order", c.j_order);
    s.integer("rb_order", c.rb_order);
    s.integer("interface_nodes", c.interface_nodes);
    s.integer("lid_nodes", c.lid_nodes);
    s.number("wall_density", c.wall_density);
    s.integer("wall_min_nodes", c.wall_min_nodes);
    s.integer("alpert_order", c.alpert_order);
    s.finish();
  }
  {
    Section s = top.sub("particles");
    {
      Section sh = s.sub("shape");
      sh.number("a1", c.shape.a1);
      sh.number("a2", c.shape.a2);
      sh.integer("a3", c.shape.a3);
      sh.finish();
    }
    s.integer("count", c.particle_count);
    s.unsigned_integer("seed", c.seed);
    s.number("standoff", c.standoff);
    s.boolean("allow_wall_intersection", c.allow_wall_intersection);
    s.integer("nodes", c.particle_nodes);
    s.integer("multipole_order", c.multipole_order);
    if (s.has("placements")) {
      const json& arr = s.raw("placements");
      if (!arr.is_array()) Section::fail(s.path("placements"), "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        Section pl(arr[i], s.path("placements") + "/" + std::to_string(i));
        Placement p;
        pl.number("x", p.center.x);
        pl.number("y", p.center.y);
        pl.number("rotation", p.rotation);
        pl.finish();
        c.placements.push_back(p);
      }
    } else {
      s.sub("placements");
    }
    s.finish();
  }
  {
    Section s = top.sub("solver");
    s.number("regularization", c.regularization);
    s.boolean("column_scaling", c.column_scaling);
    s.boolean("row_scaling", c.row_scaling);
    s.number("gmres_tol", c.gmres_tol);
    s.integer("gmres_maxit", c.gmres_maxit);
    s.finish();
  }
  {
    Section s = top.sub("output");
    s.string("dir", rc.output.dir);
    s.number("wood_tolerance", rc.output.wood_tolerance);
    s.string("cache_dir", rc.output.cache_dir);
    if (s.has("field")) {
      Section f = s.sub("field");
      GridSpec g;
      f.integer("nx", g.nx);
      f.integer("ny", g.ny);
      f.range("x_range", g.x_min, g.x_max);
      f.range("y_range", g.y_min, g.y_max);
      f.boolean("interior", g.interior);
      f.finish();
      if (g.nx < 1 || g.ny < 1) Section::fail(s.path("field"), "nx and ny must be >= 1");
      rc.output.field = g;
    } else {
      s.sub("field");
    }
    if (!(rc.output.wood_tolerance >= 0.0)) Section::fail(s.path("wood_tolerance"), "must be >= 0");
    s.finish();
  }
  top.finish();

  checked("/particles/shape", [&] {
    if (c.particle_count > 0 || !c.placements.empty()) c.shape.validate();
  });
  checked("", [&] { c.validate(); });
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_run_config(j);
}

ordered_json to_json(const RunConfig& rc) {
  const ProblemConfig& c = rc.problem;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["period"] = c.period;
  j["theta"] = c.theta;
  j["wavenumbers"] = {{"k1", c.k1}, {"k2", c.k2}, {"k3", c.k3}, {"kp", c.kp}};
  j["interfaces"] = {{"upper", profile_json(c.upper)}, {"lower", profile_json(c.lower)}, {"y0", c.resolved_y0()}};
  j["discretization"] = {{"copies", c.copies},
                         {"j_order", c.j_order},
                         {"rb_order", c.rb_order},
                         {"interface_nodes", c.interface_nodes},
                         {"lid_nodes", c.lid_nodes},
                         {"wall_density", c.wall_density},
                         {"wall_min_nodes", c.wall_min_nodes},
                         {"alpert_order", c.alpert_order}};
  ordered_json pl = ordered_json::array();
  for (const auto& p : c.placements) pl.push_back({{"x", p.center.x}, {"y", p.center.y}, {"rotation", p.rotation}});
  j["particles"] = {{"shape", {{"a1", c.shape.a1}, {"a2", c.shape.a2}, {"a3", c.shape.a3}}},
                    {"count", c.particle_count},
                    {"seed", c.seed},
                    {"standoff", c.standoff},
                    {"allow_wall_intersection", c.allow_wall_intersection},
                    {"nodes", c.particle_nodes},
                    {"multipole_order", c.multipole_order},
                    {"placements", pl}};
  j["solver"] = {{"regularization", c.regularization},
                 {"column_scaling", c.column_scaling},
                 {"row_scaling", c.row_scaling},
                 {"gmres_tol", c.gmres_tol},
                 {"gmres_maxit", c.gmres_maxit}};
  ordered_json out = {{"dir", rc.output.dir}, {"wood_tolerance", rc.output.wood_tolerance},
                      {"cache_dir", rc.output.cache_dir}};
  if (rc.output.field) {
    const GridSpec& g = *rc.output.field;
    out["field"] = {{"nx", g.nx},
                    {"ny", g.ny},
                    {"x_range", {g.x_min, g.x_max}},
                    {"y_range", {g.y_min, g.y_max}},
                    {"interior", g.interior}};
  }
  j["output"] = out;
  return j;
}

std::string scatmat_key(const ParticleShape& shape, double k2, double kp, int p, int nodes) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "a1=%.17g;a2=%.17g;a3=%d;k2=%.17g;kp=%.17g;p=%d;N=%d", shape.a1, shape.a2,
                shape.a3, k2, kp, p, nodes);
  return buf;
}

std::string scatmat_hash(const std::string& key) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

ordered_json complex_array(const CVec& v) {
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

CVec complex_vector(const json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != im.size()) throw ConfigError("cache: mismatched re/im lengths");
  CVec v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i) v(static_cast<Eigen::Index>(i)) = {re[i].get<double>(), im[i].get<double>()};
  return v;
}

}  // namespace

ordered_json scatmat_to_json(const ScatteringMatrix& s) {
  ordered_json j;
  const std::string key = scatmat_key(s.shape, s.k2, s.kp, s.p, s.nodes);
  j["format"] = "qpgrating-scatmat";
  j["version"] = 1;
  j["key"] = key;
  j["hash"] = scatmat_hash(key);
  j["p"] = s.p;
  j["k2"] = s.k2;
  j["kp"] = s.kp;
  j["shape"] = {{"a1", s.shape.a1}, {"a2", s.shape.a2}, {"a3", s.shape.a3}};
  j["nodes"] = s.nodes;
  CVec flat(s.s.size());
  for (Eigen::Index c = 0; c < s.s.cols(); ++c)
    for (Eigen::Index r = 0; r < s.s.rows(); ++r) flat(c * s.s.rows() + r) = s.s(r, c);
  j["s_column_major"] = complex_array(flat);
  ordered_json cols = ordered_json::array();
  for (const auto& d : s.columns) cols.push_back({{"mu", complex_array(d.mu)}, {"sigma", complex_array(d.sigma)}});
  j["densities"] = cols;
  return j;
}

ScatteringMatrix scatmat_from_json(const json& j) {
  if (j.value("format", "") != "qpgrating-scatmat") throw ConfigError("cache: not a scattering-matrix file");
  ScatteringMatrix s;
  s.p = j.at("p").get<int>();
  s.k2 = j.at("k2").get<double>();
  s.kp = j.at("kp").get<double>();
  s.shape = {j.at("shape").at("a1").get<double>(), j.at("shape").at("a2").get<double>(),
             j.at("shape").at("a3").get<int>()};
  s.nodes = j.at("nodes").get<int>();
  const int m = 2 * s.p + 1;
  const CVec flat = complex_vector(j.at("s_column_major"));
  if (flat.size() != m * m) throw ConfigError("cache: matrix size does not match p");
  s.s.resize(m, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < m; ++r) s.s(r, c) = flat(c * m + r);
  for (const auto& col : j.at("densities")) {
    MullerDensities d;
    d.mu = complex_vector(col.at("mu"));
    d.sigma = complex_vector(col.at("sigma"));
    s.columns.push_back(d);
  }
  return s;
}

}  // namespace qpg
