#include "fsilab/config.hpp"

#include "fsilab/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace fsilab {

namespace pt = boost::property_tree;

ConfigError::ConfigError(const std::string& field, const std::string& what)
    : std::runtime_error("config field '" + field + "': " + what), field_(field) {}

Vec ProfileSpec::sample(const PlateGrid& pg) const {
  Vec out = plate_profile(pg, name, amplitude);
  for (Index n : pg.interior()) out[n] += constant;
  return out;
}

namespace {

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool to_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has(const std::string& key) const { return bool(tree_.get_child_optional(pt::ptree::path_type(key, '.'))); }

  std::string text(const std::string& key) {
    used_.insert(key);
    const auto& node = tree_.get_child(pt::ptree::path_type(key, '.'));
    if (node.empty()) return node.data();
    std::string joined;
    for (const auto& [k, child] : node) {
      if (!k.empty() || !child.empty()) throw ConfigError(key, "expected a value or a list of values");
      joined += child.data() + " ";
    }
    return joined;
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const std::string s = text(key);
    const auto w = words(s);
    double x = 0.0;
    if (w.size() != 1 || !to_number(w[0], x)) throw ConfigError(key, "expected a number, got '" + s + "'");
    return x;
  }

  double required(const std::string& key) {
    if (!has(key)) throw ConfigError(key, "missing required value");
    return number(key, 0.0);
  }

  int integer(const std::string& key, int fallback) {
    const double x = number(key, fallback);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key, "expected an integer");
    return int(x);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto w = words(text(key));
    if (w.size() == 1 && (w[0] == "true" || w[0] == "1" || w[0] == "yes" || w[0] == "on")) return true;
    if (w.size() == 1 && (w[0] == "false" || w[0] == "0" || w[0] == "no" || w[0] == "off")) return false;
    throw ConfigError(key, "expected true or false");
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& w : words(text(key))) {
      double x = 0.0;
      if (!to_number(w, x)) throw ConfigError(key, "expected a list of numbers, got '" + w + "'");
      out.push_back(x);
    }
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    std::string s = text(key);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
  }

  /// "<number>" or "<profile> <amplitude>" or "<profile> <amplitude> <constant>".
  ProfileSpec profile(const std::string& key) {
    ProfileSpec p;
    if (!has(key)) return p;
    const auto w = words(text(key));
    double x = 0.0;
    if (w.size() == 1 && to_number(w[0], x)) {
      p.constant = x;
      return p;
    }
    if (w.empty() || w.size() > 3) throw ConfigError(key, "expected '<profile> <amplitude>' or a number");
    p.name = w[0];
    if (p.name != "zero" && p.name != "none" && p.name != "bump" && p.name != "wave" && p.name != "cap")
      throw ConfigError(key, "unknown profile '" + p.name + "' (expected zero, bump, wave or cap)");
    if (w.size() >= 2 && !to_number(w[1], p.amplitude)) throw ConfigError(key, "bad amplitude '" + w[1] + "'");
    if (w.size() == 3 && !to_number(w[2], p.constant)) throw ConfigError(key, "bad constant '" + w[2] + "'");
    return p;
  }

  void reject_unknown() const {
    for (const auto& [section, node] : tree_) {
      if (node.empty()) throw ConfigError(section, "value outside of any section");
      for (const auto& [key, child] : node) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError(full, "unknown setting");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

void positive(const std::string& field, double x) {
  if (!(x > 0.0)) throw ConfigError(field, "must be positive");
}

RunConfig from_tree(const pt::ptree& tree) {
  Reader r(tree);
  RunConfig c;
  ModelParams& m = c.model;

  BoxGeometry& g = m.geometry;
  g.lx = r.number("geometry.lx", g.lx);
  g.ly = r.number("geometry.ly", g.ly);
  g.depth = r.number("geometry.depth", g.depth);
  g.nx = r.integer("geometry.nx", g.nx);
  g.ny = r.integer("geometry.ny", g.ny);
  g.nz = r.integer("geometry.nz", g.nz);
  positive("geometry.lx", g.lx);
  positive("geometry.ly", g.ly);
  positive("geometry.depth", g.depth);
  for (const auto& [name, n] : {std::pair{"geometry.nx", g.nx}, {"geometry.ny", g.ny}, {"geometry.nz", g.nz}})
    if (n < 4) throw ConfigError(name, "needs at least 4 cells");

  m.nu = r.required("physics.nu");
  positive("physics.nu", m.nu);
  m.mu = r.required("physics.mu");
  if (!(m.mu > 0.0 && m.mu < 0.5)) throw ConfigError("physics.mu", "must lie in (0, 0.5)");

  if (r.has("forcing.g_fl")) {
    const auto v = r.numbers("forcing.g_fl", {});
    if (v.size() != 3) throw ConfigError("forcing.g_fl", "expected three components");
    for (int q = 0; q < 3; ++q) c.g_fl[q] = v[q];
  }
  for (int q = 0; q < 3; ++q) c.g_pl[q] = r.profile("forcing.g" + std::to_string(q + 1));

  m.dt = r.number("numerics.dt", m.dt);
  positive("numerics.dt", m.dt);
  c.t_end = r.number("numerics.t_end", c.t_end);
  positive("numerics.t_end", c.t_end);
  m.tol_couple = r.number("numerics.tol_couple", m.tol_couple);
  positive("numerics.tol_couple", m.tol_couple);
  m.tol_couple_rel = r.number("numerics.tol_couple_rel", m.tol_couple_rel);
  positive("numerics.tol_couple_rel", m.tol_couple_rel);
  m.stokes.tol_div = r.number("numerics.tol_linear", m.stokes.tol_div);
  positive("numerics.tol_linear", m.stokes.tol_div);
  m.max_subiterations = r.integer("numerics.max_subiterations", m.max_subiterations);
  if (m.max_subiterations < 1) throw ConfigError("numerics.max_subiterations", "must be at least 1");
  m.picard.max_iter = r.integer("numerics.picard_max", m.picard.max_iter);
  if (m.picard.max_iter < 1) throw ConfigError("numerics.picard_max", "must be at least 1");
  m.picard.tol = r.number("numerics.picard_tol", m.picard.tol);
  positive("numerics.picard_tol", m.picard.tol);
  m.nonlinear = r.boolean("numerics.nonlinear", m.nonlinear);

  m.eta = r.number("diagnostics.eta", m.eta);
  c.omegas = r.numbers("diagnostics.omega", c.omegas);
  for (double w : c.omegas) positive("diagnostics.omega", w);
  m.omega = c.omegas.front();
  c.snapshot_stride = r.integer("diagnostics.snapshot_stride", c.snapshot_stride);
  if (c.snapshot_stride < 1) throw ConfigError("diagnostics.snapshot_stride", "must be at least 1");
  c.R0 = r.number("diagnostics.R0", c.R0);
  c.c_probe = r.number("diagnostics.c_probe", c.c_probe);
  positive("diagnostics.c_probe", c.c_probe);
  c.output_dir = r.string("diagnostics.output_dir", c.output_dir);
  c.audits = r.boolean("diagnostics.audits", c.audits);

  c.w0 = r.profile("initial.w0");
  c.w1 = r.profile("initial.w1");
  c.initial_snapshot = r.string("initial.snapshot", "");
  if (!c.initial_snapshot.empty() && !(c.w0.is_zero() && c.w1.is_zero()))
    throw ConfigError("initial.snapshot", "cannot be combined with w0 or w1");

  c.probe_amplitudes = r.numbers("probe.amplitudes", c.probe_amplitudes);
  c.probe_t_end = r.number("probe.t_end", c.probe_t_end);
  c.max_inplane_load = r.number("probe.max_inplane_load", c.max_inplane_load);
  positive("probe.max_inplane_load", c.max_inplane_load);
  c.stationary_tol = r.number("probe.stationary_tol", c.stationary_tol);
  positive("probe.stationary_tol", c.stationary_tol);

  if (r.has("verify.stokes_grids")) {
    c.stokes_grids.clear();
    for (double x : r.numbers("verify.stokes_grids", {})) {
      if (x != std::floor(x) || x < 4 || x > 128) throw ConfigError("verify.stokes_grids", "grid sizes must be integers in [4, 128]");
      c.stokes_grids.push_back(int(x));
    }
    if (c.stokes_grids.size() < 2) throw ConfigError("verify.stokes_grids", "needs at least two grids");
  }
  c.verify_steps = r.integer("verify.steps", c.verify_steps);
  if (c.verify_steps < 10) throw ConfigError("verify.steps", "must be at least 10");
  c.verify_levels = r.integer("verify.levels", c.verify_levels);
  if (c.verify_levels < 2) throw ConfigError("verify.levels", "must be at least 2");

  r.reject_unknown();
  return c;
}

std::string extension_format(const std::string& path) {
  const auto dot = path.rfind('.');
  return dot != std::string::npos && path.substr(dot) == ".json" ? "json" : "ini";
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& format) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    if (format == "json")
      pt::read_json(in, tree);
    else if (format == "ini" || format.empty())
      pt::read_ini(in, tree);
    else
      throw ConfigError("format", "unknown config format '" + format + "'");
  } catch (const pt::file_parser_error& e) {
    throw ConfigError("syntax", e.message() + " at line " + std::to_string(e.line()));
  }
  return from_tree(tree);
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("path", "cannot open config file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str(), extension_format(path));
}

Forcing RunConfig::make_forcing(const Coupler& coupler) const {
  const PlateGrid& pg = coupler.plate_grid();
  Forcing f = Forcing::constant(coupler.fluid_grid(), pg, g_fl, {0.0, 0.0, 0.0});
  for (int q = 0; q < 3; ++q) f.G_pl.c[q] = g_pl[q].sample(pg);
  return f;
}

CoupledState RunConfig::make_initial(const Coupler& coupler) const {
  if (!initial_snapshot.empty()) return read_snapshot(initial_snapshot, coupler).state;
  const PlateGrid& pg = coupler.plate_grid();
  InitialSpec spec;
  spec.u0 = PlateVectorField::zeros(pg);
  spec.u1 = PlateVectorField::zeros(pg);
  spec.u0.c[2] = w0.sample(pg);
  spec.u1.c[2] = w1.sample(pg);
  return make_initial_state(coupler, spec);
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << std::setprecision(17);
  const ModelParams& m = model;
  const BoxGeometry& g = m.geometry;
  s << "geometry " << g.lx << ' ' << g.ly << ' ' << g.depth << ' ' << g.nx << ' ' << g.ny << ' ' << g.nz << '\n';
  s << "physics " << m.nu << ' ' << m.mu << '\n';
  s << "g_fl " << g_fl[0] << ' ' << g_fl[1] << ' ' << g_fl[2] << '\n';
  for (const auto& p : g_pl) s << "g_pl " << p.name << ' ' << p.amplitude << ' ' << p.constant << '\n';
  s << "numerics " << m.dt << ' ' << t_end << ' ' << m.tol_couple << ' ' << m.tol_couple_rel << ' ' << m.stokes.tol_div
    << ' ' << m.stokes.max_iter << ' ' << m.max_subiterations << ' ' << m.picard.max_iter << ' ' << m.picard.tol << ' '
    << m.nonlinear << '\n';
  s << "diagnostics " << m.eta_value() << ' ' << snapshot_stride << ' ' << R0 << ' ' << c_probe << ' ' << audits;
  for (double w : omegas) s << ' ' << w;
  s << '\n';
  s << "initial " << w0.name << ' ' << w0.amplitude << ' ' << w0.constant << ' ' << w1.name << ' ' << w1.amplitude
    << ' ' << w1.constant << ' ' << initial_snapshot << '\n';
  s << "probe " << probe_t_end << ' ' << max_inplane_load << ' ' << stationary_tol;
  for (double a : probe_amplitudes) s << ' ' << a;
  s << '\n';
  s << "verify " << verify_steps << ' ' << verify_levels;
  for (int n : stokes_grids) s << ' ' << n;
  s << "\nseed " << seed << '\n';
  return s.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

}  // namespace fsilab
