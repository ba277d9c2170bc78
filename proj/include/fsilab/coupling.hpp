/// @file coupling.hpp
/// @brief Strongly coupled partitioned time stepper for the fluid/plate system.
///
/// Each step is an implicit Euler step of the whole system.  The interface
/// unknown is the plate velocity x on interior nodes.  A sub-iteration solves
/// the fluid with top data L x, turns the discrete top reaction into a traction,
/// advances the plate with that traction and compares the new plate velocity
/// with x.  Aitken relaxation accelerates the fixed point.
#pragma once

#include "fsilab/plate.hpp"
#include "fsilab/stokes.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fsilab {

struct ModelParams {
  BoxGeometry geometry;
  double nu = 1.0;
  double mu = 0.3;
  double dt = 1e-2;
  double tol_couple = 1e-8;       // absolute interface residual, velocity max-norm
  double tol_couple_rel = 1e-10;  // relative to the plate velocity max-norm
  int max_subiterations = 200;
  bool nonlinear = true;
  PicardOptions picard;
  StokesOptions stokes;
  // Lyapunov parameters; eta < 0 selects 0.1*min(nu, 1).
  double eta = -1.0;
  double omega = 0.1;

  double eta_value() const { return eta < 0.0 ? 0.1 * std::min(nu, 1.0) : eta; }
  void validate() const;
};

struct Forcing {
  Vec G_fl;               // volume force at every fluid position
  PlateVectorField G_pl;  // (G1, G2, G3) at plate nodes

  static Forcing zero(const FluidGrid& fg, const PlateGrid& pg);
  static Forcing constant(const FluidGrid& fg, const PlateGrid& pg, const std::array<double, 3>& g_fl,
                          const std::array<double, 3>& g_pl);
  bool is_zero() const;
};

struct CoupledState {
  FluidField fluid;
  PlateField plate;
  double time = 0.0;
  PlateVectorField traction;  // last interface traction, used as predictor
};

struct StepReport {
  int subiterations = 0;
  double interface_residual = 0.0;
  double stokes_max_div = 0.0;
  double stokes_momentum_residual = 0.0;
  int stokes_iterations = 0;
  int picard_iterations = 0;
  double dissipation = 0.0;  // dt * nu * E(v, v) at the new level
  double work = 0.0;         // dt * [(G_fl, v) + (G_pl, u_t)] at the new level
  std::vector<double> residual_history;
};

class CouplingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Coupler {
 public:
  explicit Coupler(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  const FluidGrid& fluid_grid() const { return *fg_; }
  const PlateGrid& plate_grid() const { return *pg_; }
  const PlateOperators& plate_ops() const { return *pops_; }
  /// Steady Stokes workspace (inv_dt = 0) for lifts and stationary solves.
  const StokesWorkspace& steady_workspace() const { return *steady_; }

  std::pair<CoupledState, StepReport> advance(const CoupledState& state, const Forcing& forcing) const;

 private:
  ModelParams params_;
  std::unique_ptr<FluidGrid> fg_;
  std::unique_ptr<PlateGrid> pg_;
  std::unique_ptr<PlateOperators> pops_;
  std::unique_ptr<StokesWorkspace> fluid_;
  std::unique_ptr<StokesWorkspace> steady_;
  std::unique_ptr<PlateStepper> plate_;
};

/// Free-function form of Coupler::advance; builds a Coupler for the call.
std::pair<CoupledState, StepReport> advance(const CoupledState& state, const ModelParams& params,
                                            const Forcing& forcing);

using Observer = std::function<void(int step, const CoupledState& state, const StepReport& report)>;

struct RunOptions {
  double t_end = 1.0;
  int snapshot_stride = 1;
};

/// Stored snapshots with the cumulative integrals at each of them.
struct Trajectory {
  double dt = 0.0;
  int stride = 1;
  std::vector<CoupledState> snapshots;
  std::vector<int> steps;              // step index of each snapshot
  std::vector<double> dissipation_cum; // nu * int_0^t E(v, v)
  std::vector<double> work_cum;        // int_0^t (G_fl, v) + (G_pl, u_t)
  std::vector<StepReport> reports;     // report of the step that produced each snapshot
  std::string error;                   // non-empty when a step failed

  bool ok() const { return error.empty(); }
  std::vector<double> times() const;
};

int step_count(double t_end, double dt);

Trajectory run(const Coupler& coupler, const CoupledState& state0, const Forcing& forcing, const RunOptions& options,
               const std::vector<Observer>& observers = {});

/// Named clamped-compatible plate profiles.  "bump" is
/// sin^2(pi x/lx) sin^2(pi y/ly) - sin^2(2 pi x/lx) sin^2(2 pi y/ly), whose
/// discrete mean is zero; "wave" is sin^2(pi x/lx) sin^2(pi y/ly) cos(pi y/ly),
/// also mean-free with lower wavenumbers; "cap" is sin^2(pi x/lx) sin^2(pi y/ly); "zero".
Vec plate_profile(const PlateGrid& pg, const std::string& name, double amplitude);

struct InitialSpec {
  Vec v0;               // fluid velocity guess (empty = zero); its trace-free solenoidal part is kept
  PlateVectorField u0;  // displacements
  PlateVectorField u1;  // velocities
};

/// v(0) = P v0 + N0 u1 with P the projection onto solenoidal fields with zero trace.
CoupledState make_initial_state(const Coupler& coupler, const InitialSpec& spec);

}  // namespace fsilab
