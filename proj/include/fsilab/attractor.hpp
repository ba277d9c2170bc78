/// @file attractor.hpp
/// @brief Stationary states and long-time probes of the coupled system.
#pragma once

#include "fsilab/diagnostics.hpp"

#include <limits>
#include <string>
#include <vector>

namespace fsilab {

struct StationaryOptions {
  double tol = 1e-9;             // static force-density residual, max norm
  int max_iter = 500;
  double max_inplane_load = 0.01;  // L2 bound on G1 and G2
  double mean_w = 0.0;           // enclosed volume per unit area
};

struct StationaryState {
  PlateField plate;       // velocities are zero
  FluidField fluid;       // steady Stokes with zero plate velocity
  PlateVectorField traction;
  double plate_residual = 0.0;
  double fluid_momentum_residual = 0.0;
  double fluid_max_div = 0.0;
  double multiplier = 0.0;
  int iterations = 0;

  CoupledState as_state(double time = 0.0) const;
};

/// Static von Karman plate loaded by G_pl minus the steady fluid traction,
/// with the mean of w held at options.mean_w.  Picard on the nonlinear forces.
StationaryState stationary_solve(const Coupler& coupler, const Forcing& forcing, const StationaryOptions& options = {});

/// Phase distance travelled by one coupled step started at the stationary state.
double stationary_step_defect(const Coupler& coupler, const StationaryState& st, const Forcing& forcing);

/// 2 * energy(stationary) + c_probe.
double absorbing_radius(const Coupler& coupler, const StationaryState& st, double c_probe);

struct TrajectoryProbe {
  std::string label;
  double E0 = 0.0;
  double entry_time = std::numeric_limits<double>::infinity();
  double sup_after_entry = 0.0;
  double final_energy = 0.0;
  double decay_rate = std::numeric_limits<double>::quiet_NaN();
  bool left_ball = false;
  std::string error;
  std::vector<double> t;
  std::vector<double> energy;
};

struct ProbeReport {
  std::string kind;
  double R0 = 0.0;
  std::vector<TrajectoryProbe> trajectories;
  std::vector<double> times;
  std::vector<double> distance;               // |U_A - U_B| for separation
  std::vector<double> distance_to_reference;  // |U_A - U_ref| when a reference is given
  double contraction_rate = std::numeric_limits<double>::quiet_NaN();
  double stationary_residual = 0.0;
  bool passed = false;
  std::string message;
};

struct LabeledState {
  std::string label;
  CoupledState state;
};

/// Runs every trajectory concurrently and records when each enters {E <= R0}
/// and whether it leaves again.
ProbeReport dissipativity_probe(const Coupler& coupler, const std::vector<LabeledState>& initial,
                                const Forcing& forcing, double t_end, double R0);

/// Records the phase distance between two trajectories (and to an optional
/// reference state) at every step.
ProbeReport separation_probe(const Coupler& coupler, const CoupledState& a, const CoupledState& b,
                             const Forcing& forcing, double t_end, const CoupledState* reference = nullptr);

}  // namespace fsilab
