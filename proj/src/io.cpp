#include "fsilab/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fsilab {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshots are written little-endian");

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void append(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  out += buf;
}

}  // namespace

std::string csv_header() {
  return "t,E_total,kinetic_fluid,kinetic_plate,bending,membrane,dissipation_cum,work_cum,balance_residual,"
         "E_tilde,Lambda,ball_residual,mean_w,interface_residual,subiterations";
}

std::string csv_line(const CsvRow& r) {
  std::string out;
  for (double x : {r.t, r.E_total, r.kinetic_fluid, r.kinetic_plate, r.bending, r.membrane, r.dissipation_cum,
                   r.work_cum, r.balance_residual, r.E_tilde, r.Lambda, r.ball_residual, r.mean_w,
                   r.interface_residual}) {
    append(out, x);
    out += ',';
  }
  out += std::to_string(r.subiterations);
  return out;
}

void write_csv(const std::string& path, const std::vector<CsvRow>& rows) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << csv_header() << '\n';
  for (const auto& r : rows) f << csv_line(r) << '\n';
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  ensure_parent(path);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << doc.dump(2) << '\n';
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

void write_snapshot(const std::string& path, const Coupler& coupler, const CoupledState& s, std::uint64_t hash) {
  const BoxGeometry& g = coupler.params().geometry;
  const Index nodes = coupler.plate_grid().num_nodes();
  const std::vector<std::pair<std::string, const Vec*>> arrays = {
      {"v", &s.fluid.v},       {"p", &s.fluid.p},       {"u1", &s.plate.u.c[0]},  {"u2", &s.plate.u.c[1]},
      {"w", &s.plate.u.c[2]},  {"u1_t", &s.plate.ut.c[0]}, {"u2_t", &s.plate.ut.c[1]}, {"w_t", &s.plate.ut.c[2]},
      {"T1", &s.traction.c[0]}, {"T2", &s.traction.c[1]}, {"T3", &s.traction.c[2]}};
  nlohmann::json header;
  header["format"] = "fsilab-snapshot";
  header["version"] = 1;
  header["time"] = s.time;
  header["geometry"] = {{"lx", g.lx}, {"ly", g.ly}, {"depth", g.depth}, {"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}};
  header["params_hash"] = hex64(hash);
  for (const auto& [name, v] : arrays) {
    const Index expected = name == "v" ? coupler.fluid_grid().num_positions()
                           : name == "p" ? coupler.fluid_grid().num_cells()
                                         : nodes;
    if (v->size() != expected) throw std::invalid_argument("snapshot array " + name + " has the wrong length");
    header["arrays"].push_back({{"name", name}, {"length", v->size()}});
  }
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << header.dump() << '\n';
  for (const auto& [name, v] : arrays)
    f.write(reinterpret_cast<const char*>(v->data()), std::streamsize(v->size() * sizeof(double)));
}

Snapshot read_snapshot(const std::string& path, const Coupler& coupler) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open snapshot " + path);
  std::string line;
  std::getline(f, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("snapshot " + path + ": bad header: " + e.what());
  }
  if (header.value("format", "") != "fsilab-snapshot" || header.value("version", 0) != 1)
    throw std::runtime_error("snapshot " + path + ": unsupported format or version");
  const BoxGeometry& g = coupler.params().geometry;
  const auto& hg = header.at("geometry");
  if (hg.at("nx").get<int>() != g.nx || hg.at("ny").get<int>() != g.ny || hg.at("nz").get<int>() != g.nz ||
      hg.at("lx").get<double>() != g.lx || hg.at("ly").get<double>() != g.ly ||
      hg.at("depth").get<double>() != g.depth)
    throw std::runtime_error("snapshot " + path + ": geometry does not match the configuration");

  Snapshot out;
  out.params_hash = std::stoull(header.at("params_hash").get<std::string>(), nullptr, 16);
  CoupledState& s = out.state;
  s.time = header.at("time").get<double>();
  auto target = [&](const std::string& name) -> Vec* {
    static const char* plate[] = {"u1", "u2", "w"};
    if (name == "v") return &s.fluid.v;
    if (name == "p") return &s.fluid.p;
    for (int c = 0; c < 3; ++c) {
      if (name == plate[c]) return &s.plate.u.c[c];
      if (name == std::string(plate[c]) + "_t") return &s.plate.ut.c[c];
      if (name == "T" + std::to_string(c + 1)) return &s.traction.c[c];
    }
    throw std::runtime_error("snapshot " + path + ": unknown array " + name);
  };
  for (const auto& a : header.at("arrays")) {
    Vec* v = target(a.at("name").get<std::string>());
    v->resize(a.at("length").get<Index>());
    f.read(reinterpret_cast<char*>(v->data()), std::streamsize(v->size() * sizeof(double)));
    if (!f) throw std::runtime_error("snapshot " + path + ": truncated data");
  }
  const Index nodes = coupler.plate_grid().num_nodes();
  bool ok = s.fluid.v.size() == coupler.fluid_grid().num_positions() && s.fluid.p.size() == coupler.fluid_grid().num_cells();
  for (int c = 0; c < 3; ++c)
    ok = ok && s.plate.u.c[c].size() == nodes && s.plate.ut.c[c].size() == nodes && s.traction.c[c].size() == nodes;
  if (!ok) throw std::runtime_error("snapshot " + path + ": array lengths do not match the grid");
  return out;
}

}  // namespace fsilab
