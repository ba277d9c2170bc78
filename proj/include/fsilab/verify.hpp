/// @file verify.hpp
/// @brief Audit batteries: manufactured Stokes solutions, elastic-operator
///        checks, and dt-refinement of the energy, higher-order and Ball audits.
///
/// Each *_study function only measures; the suites compare the measurements
/// against the thresholds below and collect pass/fail checks.
#pragma once

#include "fsilab/config.hpp"
#include "fsilab/diagnostics.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fsilab {

namespace thresholds {
inline constexpr double kStokesOrder = 1.8;
inline constexpr double kMaxDiv = 1e-10;
inline constexpr double kN0Linearity = 1e-8;
inline constexpr double kAdjoint = 1e-12;
inline constexpr double kGradientOrderLow = 1.9;
inline constexpr double kGradientOrderHigh = 2.1;
inline constexpr double kSymmetry = 1e-12;
inline constexpr double kRatioLow = 1.6;
inline constexpr double kRatioHigh = 2.4;
inline constexpr double kNonnegFloor = 1e-12;  // relative to E(0)
inline constexpr double kVolumeDrift = 1e-10;  // on the plate mean of w
inline constexpr double kTrendFactor = 5.0;
inline constexpr double kMinOrder = 0.8;
}  // namespace thresholds

struct MmsLevel {
  int n = 0;
  double l2_error = 0.0;
  double max_div = 0.0;
  double seconds = 0.0;
};

struct StokesStudy {
  std::vector<MmsLevel> levels;
  std::vector<double> orders;  // log2 error ratio between consecutive levels
  double n0_linearity = 0.0;   // |N0(a p + b q) - a N0 p - b N0 q|_inf / |N0(a p + b q)|_inf
  double n0_max_div = 0.0;
  double n0_trace_error = 0.0;
  double grad_div_adjoint = 0.0;  // relative defect of (grad p, v) = -(p, div v)
  double lift_adjoint = 0.0;      // relative defect of (L b, t) = (b, L* t)
};

/// MMS on the unit box with the given grids; the lifting and adjointness
/// checks run on `geometry`.
StokesStudy stokes_study(const std::vector<int>& grids, double nu, const BoxGeometry& geometry, std::uint64_t seed);

struct PlateStudy {
  int directions = 0;
  double min_order = 0.0;     // observed order of the central difference error
  double max_order = 0.0;
  double max_rel_error = 0.0; // |central(h) - <force, d>| / |<force, d>| at the smaller h
  int tensors = 0;
  int nonpositive = 0;        // tensors with (C e, e) <= 0
  double min_stress_ratio = 0.0;  // min (C e, e) / |e|^2
  double K_symmetry = 0.0;
};

/// Central-difference test of vonkarman_forces against the membrane energy on
/// random directions, and positivity of the stress law on random tensors.
PlateStudy plate_study(const BoxGeometry& geometry, double mu, std::uint64_t seed, int directions = 100,
                       int tensors = 1000);

struct RefinementLevel {
  double dt = 0.0;
  int steps = 0;
  double E0 = 0.0;
  double balance_max = 0.0;
  double balance_min = 0.0;
  double higher_max = 0.0;
  double volume_drift = 0.0;  // max |mean w(t) - mean w(0)|
  std::vector<double> ball_max;  // per omega
  std::string error;
};

struct RefinementStudy {
  std::vector<double> omegas;
  std::vector<RefinementLevel> levels;
  bool zero_forcing = false;
  bool ok() const;
};

/// Runs cfg.verify_steps * 2^k steps at dt / 2^k for k < levels over a fixed horizon.
RefinementStudy refinement_study(const RunConfig& cfg, int levels, bool ball);

struct TrendFit {
  double order = 0.0;      // slope of log residual against log dt
  double max_excess = 0.0; // max residual / trend value
};
TrendFit trend_fit(const std::vector<double>& dt, const std::vector<double>& residual);

struct LyapunovStudy {
  std::vector<double> t, Lambda, E_tilde;
  double eta = 0.0;
  double Cbar = 0.0;
  DecayFit fit;
  double envelope_excess = 0.0;  // max Lambda(t) - (Lambda(0) exp(-r t) + C)
  double min_ratio = 0.0;        // (Lambda - Cbar) / E~ over points with E~ > 0
  double max_ratio = 0.0;
  std::string error;
};

/// Runs cfg at its own dt to cfg.t_end and evaluates Lambda at every step.
LyapunovStudy lyapunov_study(const RunConfig& cfg);

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "in", "=="
  double low = 0.0;
  double high = 0.0;
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  bool passed = false;
  std::vector<Check> checks;
  nlohmann::json measurements;
};

const std::vector<std::string>& suite_names();
/// Throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const RunConfig& cfg, const std::string& suite);

nlohmann::json to_json(const SuiteReport& report);

}  // namespace fsilab
