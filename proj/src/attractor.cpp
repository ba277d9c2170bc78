#include "fsilab/attractor.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <future>
#include <sstream>

namespace fsilab {

CoupledState StationaryState::as_state(double time) const {
  CoupledState s;
  s.fluid = fluid;
  s.plate = plate;
  s.time = time;
  s.traction = traction;
  return s;
}

namespace {

double l2_on_plate(const PlateGrid& pg, const Vec& f) { return std::sqrt((pg.trapezoid().array() * f.array().square()).sum()); }

}  // namespace

StationaryState stationary_solve(const Coupler& coupler, const Forcing& forcing, const StationaryOptions& options) {
  const FluidGrid& fg = coupler.fluid_grid();
  const PlateGrid& pg = coupler.plate_grid();
  const PlateOperators& po = coupler.plate_ops();
  const ModelParams& params = coupler.params();
  for (int c = 0; c < 2; ++c) {
    const double g = l2_on_plate(pg, forcing.G_pl.c[c]);
    if (g > options.max_inplane_load) {
      std::ostringstream msg;
      msg << "in-plane load G" << c + 1 << " has L2 norm " << g << " above the smallness threshold "
          << options.max_inplane_load;
      throw std::invalid_argument(msg.str());
    }
  }

  StationaryState st;
  SolveStats fstats;
  st.fluid = coupler.steady_workspace().solve(forcing.G_fl, Vec(), Vec::Zero(fg.num_positions()), &fstats);
  st.fluid_max_div = fstats.max_div;
  st.fluid_momentum_residual = fstats.momentum_residual;
  st.traction = reaction_traction(fg, pg, coupler.steady_workspace().reaction(st.fluid, Vec(), forcing.G_fl));

  const Index m = po.num_interior();
  const double mass = pg.node_area();
  PlateVectorField load;
  for (int c = 0; c < 3; ++c) load.c[c] = mass * (forcing.G_pl.c[c] - st.traction.c[c]);
  const Vec f = po.to_dofs(load);

  const SpMat K = assemble_K_lin(po, params.mu);
  Eigen::SimplicialLDLT<SpMat> solver(K);
  if (solver.info() != Eigen::Success) throw SolverFailure("static plate stiffness factorization failed");
  Vec e = Vec::Zero(3 * m);
  e.segment(2 * m, m).setOnes();
  const Vec s = solver.solve(e);
  const double target = options.mean_w * pg.area() / mass;

  auto residual = [&](const Vec& u, double* lambda) {
    Vec r = K * u - f;
    if (params.nonlinear) r -= nonlinear_forces(po, K, po.from_dofs(u), params.mu);
    const double lam = r.segment(2 * m, m).mean();
    r.segment(2 * m, m).array() -= lam;
    if (lambda) *lambda = lam;
    return r.cwiseAbs().maxCoeff() / mass;
  };

  Vec u = Vec::Zero(3 * m);
  double res = residual(u, nullptr);
  const double res0 = res;
  int it = 0;
  while (res > options.tol) {
    if (++it > options.max_iter) {
      std::ostringstream msg;
      msg << "static plate Picard iteration did not converge in " << options.max_iter
          << " iterations (residual " << res << "); load too large for this regime";
      throw PicardFailure(msg.str());
    }
    Vec rhs = f;
    if (params.nonlinear) rhs += nonlinear_forces(po, K, po.from_dofs(u), params.mu);
    Vec y = solver.solve(rhs);
    y += ((target - y.segment(2 * m, m).sum()) / s.segment(2 * m, m).sum()) * s;
    u = std::move(y);
    res = residual(u, nullptr);
    if (!std::isfinite(res) || res > 1e8 * (res0 + 1.0)) {
      std::ostringstream msg;
      msg << "static plate Picard iteration diverged at iteration " << it << "; load too large for this regime";
      throw PicardFailure(msg.str());
    }
    if (!params.nonlinear) break;
  }
  st.plate_residual = residual(u, &st.multiplier);
  st.multiplier /= mass;
  st.iterations = it;
  st.plate.u = po.from_dofs(u);
  st.plate.ut = PlateVectorField::zeros(pg);
  return st;
}

double stationary_step_defect(const Coupler& coupler, const StationaryState& st, const Forcing& forcing) {
  const CoupledState s0 = st.as_state();
  const auto next = coupler.advance(s0, forcing).first;
  return phase_distance(coupler, s0, next);
}

double absorbing_radius(const Coupler& coupler, const StationaryState& st, double c_probe) {
  return 2.0 * energy_total(coupler, st.as_state()).E_total + c_probe;
}

namespace {

TrajectoryProbe probe_one(const Coupler& coupler, const LabeledState& init, const Forcing& forcing, double t_end,
                          double R0) {
  TrajectoryProbe p;
  p.label = init.label;
  auto record = [&](int, const CoupledState& s, const StepReport&) {
    const double e = energy_total(coupler, s).E_total;
    p.t.push_back(s.time);
    p.energy.push_back(e);
    if (std::isinf(p.entry_time)) {
      if (e <= R0) {
        p.entry_time = s.time;
        p.sup_after_entry = e;
      }
    } else {
      p.sup_after_entry = std::max(p.sup_after_entry, e);
      if (e > R0) p.left_ball = true;
    }
  };
  const Trajectory tr = run(coupler, init.state, forcing, {t_end, 1 << 30}, {record});
  p.error = tr.error;
  p.E0 = p.energy.front();
  p.final_energy = p.energy.back();
  try {
    if (p.energy.size() >= 10) p.decay_rate = decay_fit(p.t, p.energy, !forcing.is_zero()).rate;
  } catch (const std::invalid_argument&) {
  }
  return p;
}

}  // namespace

ProbeReport dissipativity_probe(const Coupler& coupler, const std::vector<LabeledState>& initial,
                                const Forcing& forcing, double t_end, double R0) {
  if (initial.size() < 2) throw std::invalid_argument("dissipativity probe needs at least two initial states");
  if (!(R0 > 0.0)) throw std::invalid_argument("absorbing radius R0 must be positive");
  ProbeReport rep;
  rep.kind = "dissipativity";
  rep.R0 = R0;
  std::vector<std::future<TrajectoryProbe>> jobs;
  for (const auto& init : initial)
    jobs.push_back(std::async(std::launch::async, probe_one, std::cref(coupler), std::cref(init), std::cref(forcing),
                              t_end, R0));
  for (auto& j : jobs) rep.trajectories.push_back(j.get());
  rep.passed = true;
  std::ostringstream msg;
  for (const auto& p : rep.trajectories) {
    if (!p.error.empty()) {
      rep.passed = false;
      msg << p.label << ": " << p.error << "; ";
    } else if (std::isinf(p.entry_time)) {
      rep.passed = false;
      msg << p.label << ": never entered the ball; ";
    } else if (p.left_ball) {
      rep.passed = false;
      msg << p.label << ": left the ball after entry; ";
    }
  }
  rep.message = rep.passed ? "all trajectories entered the absorbing ball and stayed" : msg.str();
  return rep;
}

ProbeReport separation_probe(const Coupler& coupler, const CoupledState& a, const CoupledState& b,
                             const Forcing& forcing, double t_end, const CoupledState* reference) {
  ProbeReport rep;
  rep.kind = "separation";
  auto go = [&](const CoupledState& s0) { return run(coupler, s0, forcing, {t_end, 1}); };
  auto fa = std::async(std::launch::async, go, std::cref(a));
  auto fb = std::async(std::launch::async, go, std::cref(b));
  const Trajectory ta = fa.get();
  const Trajectory tb = fb.get();
  if (!ta.ok() || !tb.ok()) {
    rep.message = !ta.ok() ? ta.error : tb.error;
    return rep;
  }
  for (std::size_t i = 0; i < ta.snapshots.size() && i < tb.snapshots.size(); ++i) {
    rep.times.push_back(ta.snapshots[i].time);
    rep.distance.push_back(phase_distance(coupler, ta.snapshots[i], tb.snapshots[i]));
    if (reference) rep.distance_to_reference.push_back(phase_distance(coupler, ta.snapshots[i], *reference));
  }
  const std::vector<double>& series = reference ? rep.distance_to_reference : rep.distance;
  bool positive = series.size() >= 10;
  for (double d : series) positive = positive && d > 0.0;
  if (positive) rep.contraction_rate = decay_fit(rep.times, series, false).rate;
  const double first = series.empty() ? 0.0 : series.front();
  const double last = series.empty() ? 0.0 : series.back();
  rep.passed = last <= first;
  std::ostringstream msg;
  msg << (reference ? "distance to reference " : "separation ") << first << " -> " << last;
  rep.message = msg.str();
  return rep;
}

}  // namespace fsilab
