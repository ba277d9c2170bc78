/// @file io.hpp
/// @brief Diagnostics CSV rows, JSON files and binary state snapshots.
///
/// Snapshot layout: one line of JSON header terminated by '\n', then the raw
/// little-endian float64 arrays in the order listed in header["arrays"]:
/// v (every extended fluid position), p (cells), u1 u2 w u1_t u2_t w_t and
/// T1 T2 T3 (plate nodes).  Header keys: format = "fsilab-snapshot",
/// version = 1, time, geometry {lx ly depth nx ny nz}, params_hash (hex),
/// arrays [{name, length}].
#pragma once

#include "fsilab/coupling.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace fsilab {

struct CsvRow {
  double t = 0.0;
  double E_total = 0.0;
  double kinetic_fluid = 0.0;
  double kinetic_plate = 0.0;
  double bending = 0.0;
  double membrane = 0.0;
  double dissipation_cum = 0.0;
  double work_cum = 0.0;
  double balance_residual = 0.0;
  double E_tilde = 0.0;
  double Lambda = 0.0;
  double ball_residual = 0.0;
  double mean_w = 0.0;
  double interface_residual = 0.0;
  int subiterations = 0;
};

std::string csv_header();
/// Fixed "%.16e" formatting so identical runs give identical bytes.
std::string csv_line(const CsvRow& row);
void write_csv(const std::string& path, const std::vector<CsvRow>& rows);

void write_json(const std::string& path, const nlohmann::json& doc);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t value);

void write_snapshot(const std::string& path, const Coupler& coupler, const CoupledState& state,
                    std::uint64_t params_hash);

struct Snapshot {
  CoupledState state;
  std::uint64_t params_hash = 0;
};
/// Throws std::runtime_error on a malformed file or a grid mismatch with coupler.
Snapshot read_snapshot(const std::string& path, const Coupler& coupler);

}  // namespace fsilab
