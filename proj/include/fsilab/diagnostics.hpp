/// @file diagnostics.hpp
/// @brief Energy functionals and identity audits along stored trajectories.
///
/// Time derivatives of the fluid velocity and of the plate velocity are taken
/// by three-point differences on the snapshot times (centred inside, one-sided
/// at the ends).  The plate velocity itself is stored, so u~ = u_t is exact.
#pragma once

#include "fsilab/coupling.hpp"

#include <vector>

namespace fsilab {

struct EnergyReport {
  double t = 0.0;
  double E_total = 0.0;
  double kinetic_fluid = 0.0;
  double kinetic_plate = 0.0;
  double bending = 0.0;
  double membrane = 0.0;
  double dissipation_cum = 0.0;
  double work_cum = 0.0;
  double balance_residual = 0.0;
  double mean_w = 0.0;
};

/// Instantaneous part of the report: the four energies, their sum, t and mean w.
EnergyReport energy_total(const Coupler& coupler, const CoupledState& state);

struct AuditSeries {
  std::vector<double> t;
  std::vector<double> residual;
  double max_abs() const;
  double min() const;
};

/// Reports for every snapshot including the cumulative integrals and
/// balance_residual = E(0) + work - E(t) - dissipation.
std::vector<EnergyReport> energy_series(const Coupler& coupler, const Trajectory& tr);
AuditSeries energy_balance_audit(const Coupler& coupler, const Trajectory& tr);

struct TimeDerivedState {
  Vec v_tilde;                  // d/dt v
  PlateVectorField u_tilde;     // u_t
  PlateVectorField u_tilde_t;   // d/dt u_t
};

/// Needs at least three snapshots.
std::vector<TimeDerivedState> time_derivatives(const Trajectory& tr);

/// Every scalar the higher-order functionals are built from, at one snapshot.
struct HigherOrderTerms {
  double t = 0.0;
  double kinetic_fluid = 0.0;  // 1/2 |v~|^2
  double kinetic_plate = 0.0;  // 1/2 |u~_t|^2
  double bending = 0.0;        // 1/2 |Lap w~|^2
  double membrane = 0.0;       // 1/2 (C(P(u, u~)), P(u, u~))
  double prestress = 0.0;      // 1/2 (C(P(u)), grad w~ (x) grad w~)
  double dissipation = 0.0;    // E(v~, v~)
  double Q = 0.0;              // (C(P(u, u~)), grad w~ (x) grad w~)
  double plate_cross = 0.0;    // (u~, u~_t)
  double fluid_cross = 0.0;    // (v~, N0 u~)
  double fluid_cross_t = 0.0;  // (v~, N0 u~_t)
  double viscous_cross = 0.0;  // E(v~, N0 u~)

  double E_tilde() const { return kinetic_fluid + kinetic_plate + bending + membrane + prestress; }
  double cross(double eta) const { return eta * (plate_cross + fluid_cross); }
};

HigherOrderTerms higher_order_terms(const Coupler& coupler, const CoupledState& state, const TimeDerivedState& tds);
std::vector<HigherOrderTerms> higher_order_series(const Coupler& coupler, const Trajectory& tr);

double higher_energy(const Coupler& coupler, const CoupledState& state, const TimeDerivedState& tds);
/// E~(t) + nu int_0^t E(v~, v~) - E~(0) - 3/2 int_0^t Q, trapezoidal in time.
AuditSeries higher_energy_audit(const Coupler& coupler, const std::vector<HigherOrderTerms>& terms);
AuditSeries higher_energy_audit(const Coupler& coupler, const Trajectory& tr);

struct LyapunovReport {
  double t = 0.0;
  double E_tilde = 0.0;
  double cross_terms = 0.0;
  double Lambda = 0.0;
  double eta = 0.0;
  double Cbar = 0.0;
  double omega = 0.0;
};

/// Cbar = max(0, -(E~ + cross terms) at the first snapshot) + 1.
double lyapunov_constant(const HigherOrderTerms& first, double eta);
LyapunovReport lyapunov(const HigherOrderTerms& terms, double eta, double Cbar, double omega);
LyapunovReport lyapunov(const Coupler& coupler, const CoupledState& state, const TimeDerivedState& tds, double Cbar);
std::vector<LyapunovReport> lyapunov_series(const Coupler& coupler, const std::vector<HigherOrderTerms>& terms);

/// Functionals of the Ball identity d/dt (Lambda - Cbar) + 2 omega (Lambda - Cbar) = K - L.
double ball_L(const HigherOrderTerms& h, double nu, double eta, double omega);
double ball_K(const HigherOrderTerms& h, double nu, double eta, double omega);

struct BallAudit {
  double omega = 0.0;
  AuditSeries from_start;      // residual(t, s = first snapshot) at every snapshot
  double max_abs = 0.0;        // over all sampled (s, t) pairs
  double scale = 0.0;          // max |Lambda - Cbar| along the run
};
BallAudit ball_identity_audit(const Coupler& coupler, const std::vector<HigherOrderTerms>& terms, double omega);
BallAudit ball_identity_audit(const Coupler& coupler, const Trajectory& tr, double omega);

struct DecayFit {
  double rate = 0.0;
  double offset = 0.0;
  double amplitude = 0.0;
};
/// Fits value ~ amplitude * exp(-rate (t - t0)) + offset.  Without fit_offset
/// the rate is the log-linear slope over the second half of the series.  With
/// fit_offset the offset maximizes the linearity (R^2) of log(value - offset)
/// over the whole series and the rate is that line's slope.
DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& value, bool fit_offset = true);

/// Discrete phase-space norm: fluid L2 + w in H2 + in-plane H1 + plate velocity L2.
double phase_distance(const Coupler& coupler, const CoupledState& a, const CoupledState& b);

}  // namespace fsilab
