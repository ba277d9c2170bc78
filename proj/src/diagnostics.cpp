#include "fsilab/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fsilab {

namespace {

double plate_mass_inner(const PlateGrid& pg, const PlateVectorField& a, const PlateVectorField& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += (pg.trapezoid().array() * a.c[c].array() * b.c[c].array()).sum();
  return s;
}

PlateVectorField combine(const std::array<double, 3>& wts, const PlateVectorField& a, const PlateVectorField& b,
                         const PlateVectorField& c) {
  PlateVectorField out;
  for (int q = 0; q < 3; ++q) out.c[q] = wts[0] * a.c[q] + wts[1] * b.c[q] + wts[2] * c.c[q];
  return out;
}

/// Derivative weights at x of the quadratic through (a, b, c).
std::array<double, 3> lagrange_derivative(double x, double a, double b, double c) {
  return {((x - b) + (x - c)) / ((a - b) * (a - c)), ((x - a) + (x - c)) / ((b - a) * (b - c)),
          ((x - a) + (x - b)) / ((c - a) * (c - b))};
}

Vec lift_N0(const Coupler& coupler, const PlateVectorField& psi) {
  const FluidGrid& fg = coupler.fluid_grid();
  const PlateGrid& pg = coupler.plate_grid();
  require_zero_flux(pg, psi);
  return coupler.steady_workspace()
      .solve(Vec::Zero(fg.num_positions()), Vec(), boundary_from_plate(fg, pg, psi))
      .v;
}

double trapezoid_step(double dt, double a, double b) { return 0.5 * dt * (a + b); }

}  // namespace

double AuditSeries::max_abs() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, std::abs(r));
  return m;
}

double AuditSeries::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double r : residual) m = std::min(m, r);
  return residual.empty() ? 0.0 : m;
}

EnergyReport energy_total(const Coupler& coupler, const CoupledState& s) {
  const FluidGrid& fg = coupler.fluid_grid();
  const PlateGrid& pg = coupler.plate_grid();
  EnergyReport r;
  r.t = s.time;
  r.kinetic_fluid = 0.5 * (fg.masses().array() * s.fluid.v.array().square()).sum();
  r.kinetic_plate = 0.5 * plate_mass_inner(pg, s.plate.ut, s.plate.ut);
  const PlateEnergy pe = plate_energy(coupler.plate_ops(), s.plate.u, coupler.params().mu, coupler.params().nonlinear);
  r.bending = pe.bending;
  r.membrane = pe.membrane;
  r.E_total = r.kinetic_fluid + r.kinetic_plate + r.bending + r.membrane;
  r.mean_w = pg.trapezoid().dot(s.plate.u.c[2]) / pg.area();
  return r;
}

std::vector<EnergyReport> energy_series(const Coupler& coupler, const Trajectory& tr) {
  std::vector<EnergyReport> out;
  out.reserve(tr.snapshots.size());
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    EnergyReport r = energy_total(coupler, tr.snapshots[i]);
    r.dissipation_cum = tr.dissipation_cum[i];
    r.work_cum = tr.work_cum[i];
    out.push_back(r);
  }
  if (!out.empty()) {
    const double e0 = out.front().E_total;
    for (auto& r : out) r.balance_residual = e0 + r.work_cum - r.E_total - r.dissipation_cum;
  }
  return out;
}

AuditSeries energy_balance_audit(const Coupler& coupler, const Trajectory& tr) {
  AuditSeries a;
  for (const auto& r : energy_series(coupler, tr)) {
    a.t.push_back(r.t);
    a.residual.push_back(r.balance_residual);
  }
  return a;
}

std::vector<TimeDerivedState> time_derivatives(const Trajectory& tr) {
  const auto& S = tr.snapshots;
  const std::size_t n = S.size();
  if (n < 3) throw std::invalid_argument("time derivatives need at least three snapshots");
  std::vector<TimeDerivedState> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = std::clamp<std::size_t>(i, 1, n - 2);
    const auto w = lagrange_derivative(S[i].time, S[c - 1].time, S[c].time, S[c + 1].time);
    out[i].v_tilde = w[0] * S[c - 1].fluid.v + w[1] * S[c].fluid.v + w[2] * S[c + 1].fluid.v;
    out[i].u_tilde = S[i].plate.ut;
    out[i].u_tilde_t = combine(w, S[c - 1].plate.ut, S[c].plate.ut, S[c + 1].plate.ut);
  }
  return out;
}

HigherOrderTerms higher_order_terms(const Coupler& coupler, const CoupledState& s, const TimeDerivedState& d) {
  const FluidGrid& fg = coupler.fluid_grid();
  const PlateGrid& pg = coupler.plate_grid();
  const PlateOperators& po = coupler.plate_ops();
  const double mu = coupler.params().mu;
  const bool nl = coupler.params().nonlinear;
  HigherOrderTerms h;
  h.t = s.time;
  h.kinetic_fluid = 0.5 * ops::fluid_inner(fg, d.v_tilde, d.v_tilde);
  h.kinetic_plate = 0.5 * plate_mass_inner(pg, d.u_tilde_t, d.u_tilde_t);
  const Vec lap = po.laplacian() * d.u_tilde.c[2];
  h.bending = 0.5 * (pg.trapezoid().array() * lap.array().square()).sum();
  const SymTensorField2D Pr = strain_rate_P(po, s.plate.u, d.u_tilde, nl);
  h.membrane = 0.5 * C_inner(po, Pr, Pr, mu);
  if (nl) {
    const SymTensorField2D gg = grad_outer(po, d.u_tilde.c[2], d.u_tilde.c[2]);
    h.prestress = 0.5 * C_inner(po, strain_P(po, s.plate.u, true), gg, mu);
    h.Q = C_inner(po, Pr, gg, mu);
  }
  h.dissipation = ops::symmetric_gradient_form(fg, d.v_tilde, d.v_tilde);
  h.plate_cross = plate_mass_inner(pg, d.u_tilde, d.u_tilde_t);
  const Vec n0u = lift_N0(coupler, d.u_tilde);
  const Vec n0ut = lift_N0(coupler, d.u_tilde_t);
  h.fluid_cross = ops::fluid_inner(fg, d.v_tilde, n0u);
  h.fluid_cross_t = ops::fluid_inner(fg, d.v_tilde, n0ut);
  h.viscous_cross = ops::symmetric_gradient_form(fg, d.v_tilde, n0u);
  return h;
}

std::vector<HigherOrderTerms> higher_order_series(const Coupler& coupler, const Trajectory& tr) {
  const auto tds = time_derivatives(tr);
  std::vector<HigherOrderTerms> out;
  out.reserve(tds.size());
  for (std::size_t i = 0; i < tds.size(); ++i) out.push_back(higher_order_terms(coupler, tr.snapshots[i], tds[i]));
  return out;
}

double higher_energy(const Coupler& coupler, const CoupledState& state, const TimeDerivedState& tds) {
  return higher_order_terms(coupler, state, tds).E_tilde();
}

AuditSeries higher_energy_audit(const Coupler& coupler, const std::vector<HigherOrderTerms>& h) {
  const double nu = coupler.params().nu;
  AuditSeries a;
  if (h.empty()) return a;
  double diss = 0.0, q = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i > 0) {
      const double dt = h[i].t - h[i - 1].t;
      diss += trapezoid_step(dt, h[i - 1].dissipation, h[i].dissipation);
      q += trapezoid_step(dt, h[i - 1].Q, h[i].Q);
    }
    a.t.push_back(h[i].t);
    a.residual.push_back(h[i].E_tilde() + nu * diss - h[0].E_tilde() - 1.5 * q);
  }
  return a;
}

AuditSeries higher_energy_audit(const Coupler& coupler, const Trajectory& tr) {
  return higher_energy_audit(coupler, higher_order_series(coupler, tr));
}

double lyapunov_constant(const HigherOrderTerms& first, double eta) {
  return std::max(0.0, -(first.E_tilde() + first.cross(eta))) + 1.0;
}

LyapunovReport lyapunov(const HigherOrderTerms& h, double eta, double Cbar, double omega) {
  LyapunovReport r;
  r.t = h.t;
  r.E_tilde = h.E_tilde();
  r.cross_terms = h.cross(eta);
  r.eta = eta;
  r.Cbar = Cbar;
  r.omega = omega;
  r.Lambda = r.E_tilde + r.cross_terms + Cbar;
  return r;
}

LyapunovReport lyapunov(const Coupler& coupler, const CoupledState& state, const TimeDerivedState& tds, double Cbar) {
  const ModelParams& p = coupler.params();
  return lyapunov(higher_order_terms(coupler, state, tds), p.eta_value(), Cbar, p.omega);
}

std::vector<LyapunovReport> lyapunov_series(const Coupler& coupler, const std::vector<HigherOrderTerms>& terms) {
  std::vector<LyapunovReport> out;
  if (terms.empty()) return out;
  const ModelParams& p = coupler.params();
  const double eta = p.eta_value();
  const double Cbar = lyapunov_constant(terms.front(), eta);
  for (const auto& h : terms) out.push_back(lyapunov(h, eta, Cbar, p.omega));
  return out;
}

double ball_L(const HigherOrderTerms& h, double nu, double eta, double omega) {
  const double coercive = 2.0 * (h.bending + h.membrane + h.prestress);
  return (eta - omega) * coercive - (eta + omega) * 2.0 * h.kinetic_plate - omega * 2.0 * h.kinetic_fluid +
         nu * h.dissipation;
}

double ball_K(const HigherOrderTerms& h, double nu, double eta, double omega) {
  return eta * (h.fluid_cross_t - nu * h.viscous_cross) + 1.5 * h.Q +
         2.0 * omega * eta * (h.plate_cross + h.fluid_cross);
}

BallAudit ball_identity_audit(const Coupler& coupler, const std::vector<HigherOrderTerms>& h, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  const double nu = coupler.params().nu;
  const double eta = coupler.params().eta_value();
  BallAudit out;
  out.omega = omega;
  const std::size_t n = h.size();
  std::vector<double> lam(n), L(n), K(n);
  for (std::size_t i = 0; i < n; ++i) {
    lam[i] = h[i].E_tilde() + h[i].cross(eta);
    L[i] = ball_L(h[i], nu, eta, omega);
    K[i] = ball_K(h[i], nu, eta, omega);
    out.scale = std::max(out.scale, std::abs(lam[i]));
  }
  // Residual for a fixed start s, advanced recursively in t:
  // I(t_{k+1}) = e^{-2 w dt} I(t_k) + trapezoid of the weighted (L - K).
  auto sweep = [&](std::size_t s, AuditSeries* series) {
    double integral = 0.0;
    for (std::size_t k = s; k < n; ++k) {
      if (k > s) {
        const double dt = h[k].t - h[k - 1].t;
        const double decay = std::exp(-2.0 * omega * dt);
        integral = decay * integral + 0.5 * dt * (decay * (L[k - 1] - K[k - 1]) + (L[k] - K[k]));
      }
      const double r = lam[k] + integral - lam[s] * std::exp(-2.0 * omega * (h[k].t - h[s].t));
      out.max_abs = std::max(out.max_abs, std::abs(r));
      if (series) {
        series->t.push_back(h[k].t);
        series->residual.push_back(r);
      }
    }
  };
  if (n == 0) return out;
  sweep(0, &out.from_start);
  for (std::size_t s : {n / 4, n / 2, (3 * n) / 4})
    if (s > 0 && s + 1 < n) sweep(s, nullptr);
  return out;
}

BallAudit ball_identity_audit(const Coupler& coupler, const Trajectory& tr, double omega) {
  return ball_identity_audit(coupler, higher_order_series(coupler, tr), omega);
}

namespace {

struct LogLine {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

/// Least-squares line through (t_i - t0, log(y_i - c)) for i >= first.
LogLine log_line(const std::vector<double>& t, const std::vector<double>& y, double c, std::size_t first) {
  const std::size_t n = t.size();
  const double m = double(n - first);
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0, sll = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double v = y[i] - c;
    if (!(v > 0.0)) throw std::invalid_argument("decay_fit: non-positive series after offset subtraction");
    const double tt = t[i] - t.front(), l = std::log(v);
    st += tt;
    sl += l;
    stt += tt * tt;
    stl += tt * l;
    sll += l * l;
  }
  const double den = m * stt - st * st;
  if (!(den > 0.0)) throw std::invalid_argument("decay_fit: degenerate time samples");
  LogLine f;
  f.slope = (m * stl - st * sl) / den;
  f.intercept = (sl - f.slope * st) / m;
  const double syy = m * sll - sl * sl;
  f.r2 = syy > 0.0 ? (m * stl - st * sl) * (m * stl - st * sl) / (den * syy) : 1.0;
  return f;
}

}  // namespace

DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y, bool fit_offset) {
  const std::size_t n = t.size();
  if (n != y.size()) throw std::invalid_argument("decay_fit: time and value series differ in length");
  if (n < 10) throw std::invalid_argument("decay_fit: need at least 10 samples");
  if (!(t.back() > t.front())) throw std::invalid_argument("decay_fit: time series must increase");

  DecayFit out;
  if (!fit_offset) {
    // asymptotic rate from the tail
    const LogLine f = log_line(t, y, 0.0, n / 2);
    out.rate = -f.slope;
    out.amplitude = std::exp(f.intercept);
    return out;
  }

  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double ymin = *lo_it, span = *hi_it - *lo_it;
  if (span <= 1e-12 * std::max(std::abs(*hi_it), std::abs(ymin))) {
    out.offset = y.front();
    return out;
  }
  // the offset c = ymin - gap that makes log(y - c) most nearly linear in t
  auto score = [&](double lg) { return log_line(t, y, ymin - span * std::exp(lg), 0).r2; };
  const double lo = std::log(std::max(1e-14, 1e-13 * std::abs(ymin) / span)), hi = std::log(10.0);
  const int samples = 400;
  double best_lg = lo, best = -1.0;
  for (int k = 0; k <= samples; ++k) {
    const double lg = lo + (hi - lo) * k / samples;
    const double s = score(lg);
    if (s > best) {
      best = s;
      best_lg = lg;
    }
  }
  double a = best_lg - (hi - lo) / samples, b = best_lg + (hi - lo) / samples;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (score(c) > score(d))
      b = d;
    else
      a = c;
  }
  out.offset = ymin - span * std::exp(0.5 * (a + b));
  const LogLine f = log_line(t, y, out.offset, 0);
  out.rate = -f.slope;
  out.amplitude = std::exp(f.intercept);
  return out;
}

double phase_distance(const Coupler& coupler, const CoupledState& a, const CoupledState& b) {
  const FluidGrid& fg = coupler.fluid_grid();
  const PlateGrid& pg = coupler.plate_grid();
  const Vec dv = a.fluid.v - b.fluid.v;
  double s = ops::fluid_inner(fg, dv, dv);
  const auto nw = ops::plate_norms(pg, a.plate.u.c[2] - b.plate.u.c[2]);
  s += nw.h2 * nw.h2;
  for (int c = 0; c < 2; ++c) {
    const auto nu = ops::plate_norms(pg, a.plate.u.c[c] - b.plate.u.c[c]);
    s += nu.h1 * nu.h1;
  }
  for (int c = 0; c < 3; ++c) {
    const Vec d = a.plate.ut.c[c] - b.plate.ut.c[c];
    s += (pg.trapezoid().array() * d.array().square()).sum();
  }
  return std::sqrt(s);
}

}  // namespace fsilab
