/// @file config.hpp
/// @brief Run configuration: sectioned key/value text (INI) or JSON.
///
/// Sections and keys (defaults in RunConfig):
///
///   [geometry]    lx ly depth nx ny nz
///   [physics]     nu mu                       (nu and mu are required)
///   [forcing]     g_fl = "a b c"; g1, g2, g3 = <number> or "<profile> <amplitude>"
///   [numerics]    dt t_end tol_couple tol_couple_rel tol_linear max_subiterations
///                 picard_max picard_tol nonlinear
///   [diagnostics] eta omega snapshot_stride R0 c_probe output_dir audits
///   [initial]     w0 w1 ("<profile> <amplitude>") or snapshot = <path>
///   [probe]       amplitudes t_end max_inplane_load stationary_tol
///   [verify]      stokes_grids steps levels
///
/// Profiles are zero, bump, wave and cap (see plate_profile).
#pragma once

#include "fsilab/coupling.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsilab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ProfileSpec {
  std::string name = "zero";
  double amplitude = 0.0;
  double constant = 0.0;  // added everywhere except the clamped ring

  bool is_zero() const { return constant == 0.0 && (name == "zero" || amplitude == 0.0); }
  Vec sample(const PlateGrid& pg) const;
};

struct RunConfig {
  ModelParams model;
  std::array<double, 3> g_fl{0.0, 0.0, 0.0};
  std::array<ProfileSpec, 3> g_pl;

  double t_end = 1.0;
  int snapshot_stride = 1;
  std::vector<double> omegas{0.1, 0.5};
  double R0 = -1.0;  // <= 0 selects 2 E(stationary) + c_probe
  double c_probe = 1.0;
  bool audits = true;
  std::string output_dir = "output";

  ProfileSpec w0, w1;
  std::string initial_snapshot;

  std::vector<double> probe_amplitudes{1.0, 100.0};  // multiples of the w0 amplitude
  double probe_t_end = -1.0;                         // <= 0 selects t_end
  double max_inplane_load = 0.01;
  double stationary_tol = 1e-9;

  std::vector<int> stokes_grids{16, 32, 64};
  int verify_steps = 200;  // steps at the coarsest dt in the refinement suites
  int verify_levels = 3;   // dt, dt/2, ... in the ball suite

  std::uint64_t seed = 1;

  Forcing make_forcing(const Coupler& coupler) const;
  /// From the snapshot when one is configured, otherwise u0 = (0, 0, w0), u1 = (0, 0, w1).
  CoupledState make_initial(const Coupler& coupler) const;
  /// Stable text form of every setting that affects results.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// format: "ini", "json", or "" to pick by file extension (.json means JSON).
RunConfig parse_config(const std::string& text, const std::string& format = "ini");
RunConfig load_config(const std::string& path);

}  // namespace fsilab
