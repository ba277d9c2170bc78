#include "fsilab/verify.hpp"

#include "fsilab/detail/stokes_mms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace fsilab {

namespace {

using Clock = std::chrono::steady_clock;

PlateVectorField random_plate(const PlateGrid& pg, std::mt19937_64& rng, double amp, bool mean_free_w) {
  std::uniform_real_distribution<double> u(-amp, amp);
  auto f = PlateVectorField::zeros(pg);
  for (auto& c : f.c)
    for (Index n : pg.interior()) c[n] = u(rng);
  if (mean_free_w) {
    double mean = 0.0;
    for (Index n : pg.interior()) mean += f.c[2][n];
    mean /= double(pg.interior().size());
    for (Index n : pg.interior()) f.c[2][n] -= mean;
  }
  return f;
}

PlateVectorField axpy(const PlateVectorField& a, double s, const PlateVectorField& b) {
  PlateVectorField out;
  for (int c = 0; c < 3; ++c) out.c[c] = a.c[c] + s * b.c[c];
  return out;
}

double rel(double defect, double scale) { return scale > 0.0 ? std::abs(defect) / scale : std::abs(defect); }

}  // namespace

StokesStudy stokes_study(const std::vector<int>& grids, double nu, const BoxGeometry& geometry, std::uint64_t seed) {
  StokesStudy s;
  for (int n : grids) {
    const auto t0 = Clock::now();
    const auto [fg, pg] = build_grids(BoxGeometry{1.0, 1.0, 1.0, n, n, n});
    const Vec exact = fg.sample([](int q, double x, double y, double z) { return mms::velocity(q, x, y, z); });
    const Vec force = fg.sample([nu](int q, double x, double y, double z) { return mms::force(q, x, y, z, nu); });
    StokesWorkspace ws(fg, nu, 0.0);
    const FluidField f = ws.solve(force, Vec(), exact);
    const Vec err = f.v - exact;
    MmsLevel lv;
    lv.n = n;
    lv.l2_error = std::sqrt(ops::fluid_inner(fg, err, err) / ops::fluid_inner(fg, exact, exact));
    lv.max_div = ops::discrete_div(fg, f.v).cwiseAbs().maxCoeff();
    lv.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    s.levels.push_back(lv);
  }
  for (std::size_t k = 1; k < s.levels.size(); ++k)
    s.orders.push_back(std::log(s.levels[k - 1].l2_error / s.levels[k].l2_error) /
                       std::log(double(s.levels[k].n) / s.levels[k - 1].n));

  std::mt19937_64 rng(seed);
  const auto [fg, pg] = build_grids(geometry);
  const auto p = random_plate(pg, rng, 1.0, true);
  const auto q = random_plate(pg, rng, 1.0, true);
  const double a = 1.7, b = -0.6;
  PlateVectorField combo;
  for (int c = 0; c < 3; ++c) combo.c[c] = a * p.c[c] + b * q.c[c];
  const auto np = lifting_N0(fg, pg, nu, p);
  const auto nq = lifting_N0(fg, pg, nu, q);
  const auto nc = lifting_N0(fg, pg, nu, combo);
  s.n0_linearity = (nc.v - a * np.v - b * nq.v).cwiseAbs().maxCoeff() / nc.v.cwiseAbs().maxCoeff();
  s.n0_max_div = std::max({ops::discrete_div(fg, np.v).cwiseAbs().maxCoeff(),
                           ops::discrete_div(fg, nq.v).cwiseAbs().maxCoeff(),
                           ops::discrete_div(fg, nc.v).cwiseAbs().maxCoeff()});
  const auto tr = ops::trace_to_plate(fg, pg, np.v);
  for (int c = 0; c < 3; ++c) s.n0_trace_error = std::max(s.n0_trace_error, (tr.c[c] - p.c[c]).cwiseAbs().maxCoeff());

  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v = Vec::Zero(fg.num_positions());
  for (Index i : fg.interior()) v[i] = u(rng);
  Vec pr(fg.num_cells());
  for (Index i = 0; i < pr.size(); ++i) pr[i] = u(rng);
  const double lhs = ops::fluid_inner(fg, ops::discrete_grad_p(fg, pr), v);
  const double rhs = -fg.cell_volume() * pr.dot(ops::discrete_div(fg, v));
  s.grad_div_adjoint = rel(lhs - rhs, std::abs(lhs) + std::abs(rhs));

  const Vec lifted = ops::lift_to_topface(fg, pg, p);
  Vec top = Vec::Zero(fg.num_positions());
  for (Index i : fg.top()) top[i] = u(rng);
  const auto adj = ops::lift_adjoint(fg, pg, top);
  double back = 0.0;
  for (int c = 0; c < 3; ++c) back += adj.c[c].dot(p.c[c]);
  const double fwd = lifted.dot(top);
  s.lift_adjoint = rel(fwd - back, std::abs(fwd) + std::abs(back));
  return s;
}

PlateStudy plate_study(const BoxGeometry& geometry, double mu, std::uint64_t seed, int directions, int tensors) {
  PlateStudy s;
  s.directions = directions;
  s.tensors = tensors;
  s.min_order = std::numeric_limits<double>::infinity();
  s.max_order = -std::numeric_limits<double>::infinity();
  const PlateGrid pg(geometry);
  const PlateOperators po(pg);
  std::mt19937_64 rng(seed);
  const auto u = random_plate(pg, rng, 0.5, false);
  const auto f = vonkarman_forces(po, u, mu);
  const double mass = pg.node_area();
  for (int k = 0; k < directions; ++k) {
    const auto d = random_plate(pg, rng, 1.0, false);
    const double an =
        -mass * (f.transversal.dot(d.c[2]) + f.in_plane[0].dot(d.c[0]) + f.in_plane[1].dot(d.c[1]));
    auto central = [&](double h) {
      return (plate_energy(po, axpy(u, h, d), mu).membrane - plate_energy(po, axpy(u, -h, d), mu).membrane) / (2 * h);
    };
    const double e1 = central(2e-3) - an, e2 = central(1e-3) - an;
    const double order = std::log2(std::abs(e1 / e2));
    s.min_order = std::min(s.min_order, order);
    s.max_order = std::max(s.max_order, order);
    s.max_rel_error = std::max(s.max_rel_error, rel(e2, std::abs(an)));
  }

  std::uniform_real_distribution<double> un(-1.0, 1.0);
  SymTensorField2D e = SymTensorField2D::zeros(tensors);
  for (int k = 0; k < tensors; ++k) {
    do {
      e.e11[k] = un(rng);
      e.e12[k] = un(rng);
      e.e22[k] = un(rng);
    } while (e.e11[k] == 0.0 && e.e12[k] == 0.0 && e.e22[k] == 0.0);
  }
  const auto c = stress_C(e, mu);
  s.min_stress_ratio = std::numeric_limits<double>::infinity();
  for (int k = 0; k < tensors; ++k) {
    const double form = c.e11[k] * e.e11[k] + 2.0 * c.e12[k] * e.e12[k] + c.e22[k] * e.e22[k];
    const double norm = e.e11[k] * e.e11[k] + 2.0 * e.e12[k] * e.e12[k] + e.e22[k] * e.e22[k];
    if (!(form > 0.0)) ++s.nonpositive;
    s.min_stress_ratio = std::min(s.min_stress_ratio, form / norm);
  }

  const SpMat K = assemble_K_lin(po, mu);
  const SpMat Kt = K.transpose();
  s.K_symmetry = SpMat(K - Kt).norm() / K.norm();
  return s;
}

bool RefinementStudy::ok() const {
  for (const auto& l : levels)
    if (!l.error.empty()) return false;
  return !levels.empty();
}

RefinementStudy refinement_study(const RunConfig& cfg, int levels, bool ball) {
  RefinementStudy s;
  s.omegas = cfg.omegas;
  const double horizon = cfg.verify_steps * cfg.model.dt;
  for (int k = 0; k < levels; ++k) {
    RefinementLevel lv;
    ModelParams mp = cfg.model;
    mp.dt = cfg.model.dt / double(1 << k);
    lv.dt = mp.dt;
    lv.steps = cfg.verify_steps << k;
    try {
      const Coupler coupler(mp);
      const Forcing forcing = cfg.make_forcing(coupler);
      s.zero_forcing = forcing.is_zero();
      const CoupledState s0 = cfg.make_initial(coupler);
      const Trajectory tr = run(coupler, s0, forcing, {horizon, 1});
      if (!tr.ok()) throw std::runtime_error(tr.error);
      const auto series = energy_series(coupler, tr);
      lv.E0 = series.front().E_total;
      lv.balance_max = 0.0;
      lv.balance_min = std::numeric_limits<double>::infinity();
      for (const auto& r : series) {
        lv.balance_max = std::max(lv.balance_max, std::abs(r.balance_residual));
        lv.balance_min = std::min(lv.balance_min, r.balance_residual);
        lv.volume_drift = std::max(lv.volume_drift, std::abs(r.mean_w - series.front().mean_w));
      }
      const auto terms = higher_order_series(coupler, tr);
      lv.higher_max = higher_energy_audit(coupler, terms).max_abs();
      if (ball)
        for (double w : cfg.omegas) lv.ball_max.push_back(ball_identity_audit(coupler, terms, w).max_abs);
    } catch (const std::exception& e) {
      lv.error = e.what();
    }
    s.levels.push_back(lv);
  }
  return s;
}

TrendFit trend_fit(const std::vector<double>& dt, const std::vector<double>& residual) {
  if (dt.size() != residual.size() || dt.size() < 2) throw std::invalid_argument("trend fit needs two or more levels");
  const std::size_t n = dt.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(residual[i] > 0.0)) throw std::invalid_argument("trend fit needs positive residuals");
    const double x = std::log(dt[i]), y = std::log(residual[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  TrendFit f;
  f.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - f.order * sx) / n;
  for (std::size_t i = 0; i < n; ++i)
    f.max_excess = std::max(f.max_excess, residual[i] / std::exp(icpt + f.order * std::log(dt[i])));
  return f;
}

LyapunovStudy lyapunov_study(const RunConfig& cfg) {
  LyapunovStudy s;
  try {
    const Coupler coupler(cfg.model);
    const Forcing forcing = cfg.make_forcing(coupler);
    const Trajectory tr = run(coupler, cfg.make_initial(coupler), forcing, {cfg.t_end, 1});
    if (!tr.ok()) throw std::runtime_error(tr.error);
    const auto terms = higher_order_series(coupler, tr);
    const auto lyap = lyapunov_series(coupler, terms);
    s.eta = lyap.front().eta;
    s.Cbar = lyap.front().Cbar;
    double peak = 0.0;
    for (const auto& l : lyap) {
      s.t.push_back(l.t);
      s.Lambda.push_back(l.Lambda);
      s.E_tilde.push_back(l.E_tilde);
      peak = std::max(peak, l.E_tilde);
    }
    s.fit = decay_fit(s.t, s.Lambda, true);
    s.envelope_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.t.size(); ++i)
      s.envelope_excess =
          std::max(s.envelope_excess, s.Lambda[i] - (s.Lambda[0] * std::exp(-s.fit.rate * s.t[i]) + s.fit.offset));
    s.min_ratio = std::numeric_limits<double>::infinity();
    s.max_ratio = 0.0;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!(s.E_tilde[i] > 1e-12 * peak)) continue;
      const double r = (s.Lambda[i] - s.Cbar) / s.E_tilde[i];
      s.min_ratio = std::min(s.min_ratio, r);
      s.max_ratio = std::max(s.max_ratio, r);
    }
  } catch (const std::exception& e) {
    s.error = e.what();
  }
  return s;
}

namespace {

Check at_most(const std::string& name, double value, double bound) {
  return {name, value, "<=", -std::numeric_limits<double>::infinity(), bound, value <= bound};
}
Check at_least(const std::string& name, double value, double bound) {
  return {name, value, ">=", bound, std::numeric_limits<double>::infinity(), value >= bound};
}
Check within(const std::string& name, double value, double low, double high) {
  return {name, value, "in", low, high, value >= low && value <= high};
}
Check equals(const std::string& name, double value, double target) {
  return {name, value, "==", target, target, value == target};
}

nlohmann::json levels_json(const RefinementStudy& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& l : s.levels) {
    nlohmann::json j{{"dt", l.dt},
                     {"steps", l.steps},
                     {"E0", l.E0},
                     {"balance_max", l.balance_max},
                     {"balance_min", l.balance_min},
                     {"higher_order_max", l.higher_max},
                     {"volume_drift", l.volume_drift}};
    if (!l.ball_max.empty()) j["ball_max"] = l.ball_max;
    if (!l.error.empty()) j["error"] = l.error;
    out.push_back(j);
  }
  return out;
}

SuiteReport suite_stokes(const RunConfig& cfg) {
  namespace th = thresholds;
  SuiteReport r;
  const StokesStudy s = stokes_study(cfg.stokes_grids, cfg.model.nu, cfg.model.geometry, cfg.seed);
  double max_div = 0.0;
  for (const auto& l : s.levels) {
    max_div = std::max(max_div, l.max_div);
    r.measurements["mms"].push_back({{"n", l.n}, {"l2_error", l.l2_error}, {"max_div", l.max_div}, {"seconds", l.seconds}});
  }
  r.measurements["orders"] = s.orders;
  for (std::size_t k = 0; k < s.orders.size(); ++k)
    r.checks.push_back(at_least("mms_order_" + std::to_string(s.levels[k].n) + "_" + std::to_string(s.levels[k + 1].n),
                                s.orders[k], th::kStokesOrder));
  r.checks.push_back(at_most("mms_max_div", max_div, th::kMaxDiv));
  r.checks.push_back(at_most("n0_linearity", s.n0_linearity, th::kN0Linearity));
  r.checks.push_back(at_most("n0_max_div", s.n0_max_div, th::kMaxDiv));
  r.checks.push_back(at_most("n0_trace_error", s.n0_trace_error, th::kAdjoint));
  r.checks.push_back(at_most("grad_div_adjoint", s.grad_div_adjoint, th::kAdjoint));
  r.checks.push_back(at_most("lift_adjoint", s.lift_adjoint, th::kAdjoint));
  return r;
}

SuiteReport suite_plate(const RunConfig& cfg) {
  namespace th = thresholds;
  SuiteReport r;
  const PlateStudy s = plate_study(cfg.model.geometry, cfg.model.mu, cfg.seed);
  r.measurements = {{"directions", s.directions}, {"min_order", s.min_order},     {"max_order", s.max_order},
                    {"max_rel_error", s.max_rel_error}, {"tensors", s.tensors}, {"min_stress_ratio", s.min_stress_ratio},
                    {"K_symmetry", s.K_symmetry}};
  r.checks.push_back(within("gradient_min_order", s.min_order, th::kGradientOrderLow, th::kGradientOrderHigh));
  r.checks.push_back(within("gradient_max_order", s.max_order, th::kGradientOrderLow, th::kGradientOrderHigh));
  r.checks.push_back(equals("stress_nonpositive", s.nonpositive, 0.0));
  r.checks.push_back(at_most("K_symmetry", s.K_symmetry, th::kSymmetry));
  return r;
}

SuiteReport suite_energy(const RunConfig& cfg) {
  namespace th = thresholds;
  SuiteReport r;
  const RefinementStudy s = refinement_study(cfg, 2, false);
  r.measurements["levels"] = levels_json(s);
  if (!s.ok()) {
    r.checks.push_back({"runs_completed", 0.0, "==", 1.0, 1.0, false});
    return r;
  }
  const auto& a = s.levels[0];
  const auto& b = s.levels[1];
  r.checks.push_back(within("balance_ratio", a.balance_max / b.balance_max, th::kRatioLow, th::kRatioHigh));
  r.checks.push_back(within("higher_order_ratio", a.higher_max / b.higher_max, th::kRatioLow, th::kRatioHigh));
  if (s.zero_forcing)
    for (const auto& l : s.levels)
      r.checks.push_back(at_least("balance_min_dt_" + std::to_string(l.dt), l.balance_min / std::max(l.E0, 1e-300),
                                  -th::kNonnegFloor));
  r.checks.push_back(at_most("volume_drift", std::max(a.volume_drift, b.volume_drift), th::kVolumeDrift));
  return r;
}

SuiteReport suite_ball(const RunConfig& cfg) {
  namespace th = thresholds;
  SuiteReport r;
  const RefinementStudy s = refinement_study(cfg, cfg.verify_levels, true);
  r.measurements["levels"] = levels_json(s);
  if (!s.ok()) {
    r.checks.push_back({"runs_completed", 0.0, "==", 1.0, 1.0, false});
  } else {
    std::vector<double> dts;
    for (const auto& l : s.levels) dts.push_back(l.dt);
    for (std::size_t w = 0; w < s.omegas.size(); ++w) {
      std::vector<double> res;
      for (const auto& l : s.levels) res.push_back(l.ball_max[w]);
      const std::string tag = "omega_" + std::to_string(s.omegas[w]);
      try {
        const TrendFit f = trend_fit(dts, res);
        r.measurements["trend"][tag] = {{"order", f.order}, {"max_excess", f.max_excess}};
        r.checks.push_back(at_most("ball_trend_excess_" + tag, f.max_excess, th::kTrendFactor));
        r.checks.push_back(at_least("ball_order_" + tag, f.order, th::kMinOrder));
      } catch (const std::invalid_argument& e) {
        r.checks.push_back({"ball_trend_" + tag, 0.0, "==", 1.0, 1.0, false});
      }
    }
  }
  const LyapunovStudy l = lyapunov_study(cfg);
  if (!l.error.empty()) {
    r.measurements["lyapunov"]["error"] = l.error;
    r.checks.push_back({"lyapunov_run", 0.0, "==", 1.0, 1.0, false});
    return r;
  }
  r.measurements["lyapunov"] = {{"eta", l.eta},
                                {"Cbar", l.Cbar},
                                {"rate", l.fit.rate},
                                {"offset", l.fit.offset},
                                {"envelope_excess", l.envelope_excess},
                                {"min_ratio", l.min_ratio},
                                {"max_ratio", l.max_ratio}};
  r.checks.push_back(at_least("lyapunov_rate", l.fit.rate, std::numeric_limits<double>::min()));
  r.checks.push_back(at_most("lyapunov_envelope_excess", l.envelope_excess, 0.0));
  r.checks.push_back(at_least("equivalence_min_ratio", l.min_ratio, std::numeric_limits<double>::min()));
  r.checks.push_back(at_most("equivalence_max_ratio", l.max_ratio, std::numeric_limits<double>::max()));
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"stokes", "plate", "energy", "ball"};
  return names;
}

SuiteReport run_suite(const RunConfig& cfg, const std::string& suite) {
  SuiteReport r;
  if (suite == "stokes")
    r = suite_stokes(cfg);
  else if (suite == "plate")
    r = suite_plate(cfg);
  else if (suite == "energy")
    r = suite_energy(cfg);
  else if (suite == "ball")
    r = suite_ball(cfg);
  else
    throw std::invalid_argument("unknown suite '" + suite + "' (expected stokes, plate, energy or ball)");
  r.suite = suite;
  r.passed = !r.checks.empty() && std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.passed; });
  return r;
}

nlohmann::json to_json(const SuiteReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = "verify";
  j["suite"] = report.suite;
  j["passed"] = report.passed;
  for (const auto& c : report.checks) {
    nlohmann::json cj{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"passed", c.passed}};
    if (std::isfinite(c.low)) cj["low"] = c.low;
    if (std::isfinite(c.high)) cj["high"] = c.high;
    j["checks"].push_back(cj);
  }
  j["measurements"] = report.measurements;
  return j;
}

}  // namespace fsilab
