/// @file stokes.hpp
/// @brief Steady and implicit-Euler Stokes solves on the extended MAC grid,
///        the lifting operator N0, and fluid tractions on the plate.
#pragma once

#include "fsilab/grid.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace fsilab {

/// Velocity on every extended position plus cell-centred pressure (zero mean).
struct FluidField {
  Vec v;
  Vec p;

  static FluidField zeros(const FluidGrid& g) {
    return {Vec::Zero(g.num_positions()), Vec::Zero(g.num_cells())};
  }
};

struct StokesOptions {
  double tol_div = 1e-12;  // max |div v| accepted from the pressure iteration
  int max_iter = 400;
};

struct SolveStats {
  int iterations = 0;
  double max_div = 0.0;
  double momentum_residual = 0.0;  // max |row| / mass over interior positions
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CompatibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Factorized operators for  (M/dt + nu A) v - B^T p = f,  B v = 0  on a fixed
/// grid, viscosity and time step.  inv_dt = 0 gives the steady problem.
/// Velocity blocks and the pressure preconditioner are inverted exactly by
/// tensor-product eigendecomposition; the pressure is found by preconditioned
/// CG on the Schur complement.
class StokesWorkspace {
 public:
  StokesWorkspace(const FluidGrid& grid, double nu, double inv_dt, StokesOptions options = {});
  ~StokesWorkspace();
  StokesWorkspace(StokesWorkspace&&) noexcept;
  StokesWorkspace& operator=(StokesWorkspace&&) noexcept;

  const FluidGrid& grid() const;
  double nu() const;
  double inv_dt() const;

  /// force: volume force at every position.  v_old: previous velocity (may be
  /// empty when inv_dt == 0).  boundary: prescribed values on Top and Wall
  /// positions (interior entries ignored).  The top normal flux is corrected to
  /// exact zero mean before solving; callers check compatibility beforehand.
  FluidField solve(const Vec& force, const Vec& v_old, const Vec& boundary, SolveStats* stats = nullptr) const;

  /// Discrete reaction M(v - v_old)/dt + nu*A_sym v - B^T p - M force at every
  /// position.  It vanishes on interior rows and is the boundary force on Top rows.
  Vec reaction(const FluidField& f, const Vec& v_old, const Vec& force) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Throws CompatibilityError when the top normal flux of psi is not zero to 1e-10.
void require_zero_flux(const PlateGrid& pg, const PlateVectorField& psi);

/// -nu Lap v + grad p = g, div v = 0, v = 0 on S, v = psi on the plate.
FluidField solve_stokes(const FluidGrid& fg, const PlateGrid& pg, double nu, const Vec& g,
                        const PlateVectorField& psi, const StokesOptions& options = {});
/// N0 psi: Stokes solution with zero force and plate data psi.
FluidField lifting_N0(const FluidGrid& fg, const PlateGrid& pg, double nu, const PlateVectorField& psi,
                      const StokesOptions& options = {});
/// One implicit Euler step of the linear fluid with prescribed plate velocity.
FluidField fluid_substep(const FluidGrid& fg, const PlateGrid& pg, double nu, const FluidField& v_old,
                         const PlateVectorField& boundary_velocity, const Vec& G_fl, double dt,
                         const StokesOptions& options = {});

/// Pointwise stress traction (nu(v1_3+v3_1), nu(v2_3+v3_2), 2 nu v3_3 - p) at
/// x3 = 0 from one-sided second-order differences, mapped to plate nodes.
PlateVectorField traction_Tf(const FluidGrid& fg, const PlateGrid& pg, double nu, const FluidField& f);
/// Traction consistent with the discrete momentum equation: lift adjoint of the
/// top reaction divided by the node area.  This is the force density the plate
/// receives (with a minus sign) in the coupled scheme.
PlateVectorField reaction_traction(const FluidGrid& fg, const PlateGrid& pg, const Vec& reaction);

/// Mass-weighted projection of v onto solenoidal fields vanishing on every
/// boundary position.
Vec project_solenoidal(const FluidGrid& fg, const Vec& v);

/// Interpolates values stored on top positions to interior plate nodes
/// (identity along node-aligned axes, mean of the two adjacent centres otherwise).
PlateVectorField top_to_nodes(const FluidGrid& fg, const PlateGrid& pg, const Vec& top);

/// Fluid boundary vector for plate data psi (zero on walls, lifted on the top).
Vec boundary_from_plate(const FluidGrid& fg, const PlateGrid& pg, const PlateVectorField& psi);

}  // namespace fsilab
