#include "fsilab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fsilab {

void ModelParams::validate() const {
  fsilab::validate(geometry);
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  require_poisson_ratio(mu);
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(tol_couple > 0.0) || !(tol_couple_rel > 0.0)) throw std::invalid_argument("tol_couple must be positive");
  if (max_subiterations < 1) throw std::invalid_argument("max_subiterations must be at least 1");
  if (!(picard.tol > 0.0) || picard.max_iter < 1) throw std::invalid_argument("Picard settings must be positive");
  if (!(stokes.tol_div > 0.0)) throw std::invalid_argument("tol_linear must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
}

Forcing Forcing::zero(const FluidGrid& fg, const PlateGrid& pg) {
  return {Vec::Zero(fg.num_positions()), PlateVectorField::zeros(pg)};
}

Forcing Forcing::constant(const FluidGrid& fg, const PlateGrid& pg, const std::array<double, 3>& g_fl,
                          const std::array<double, 3>& g_pl) {
  Forcing f = zero(fg, pg);
  f.G_fl = fg.sample([&](int q, double, double, double) { return g_fl[q]; });
  for (int c = 0; c < 3; ++c)
    for (Index n : pg.interior()) f.G_pl.c[c][n] = g_pl[c];
  return f;
}

bool Forcing::is_zero() const { return G_fl.cwiseAbs().maxCoeff() == 0.0 && G_pl.max_abs() == 0.0; }

Coupler::Coupler(const ModelParams& params) : params_(params) {
  params_.validate();
  fg_ = std::make_unique<FluidGrid>(params_.geometry);
  pg_ = std::make_unique<PlateGrid>(params_.geometry);
  pops_ = std::make_unique<PlateOperators>(*pg_);
  fluid_ = std::make_unique<StokesWorkspace>(*fg_, params_.nu, 1.0 / params_.dt, params_.stokes);
  steady_ = std::make_unique<StokesWorkspace>(*fg_, params_.nu, 0.0, params_.stokes);
  plate_ = std::make_unique<PlateStepper>(*pops_, params_.mu, params_.dt, params_.nonlinear, params_.picard);
}

std::pair<CoupledState, StepReport> Coupler::advance(const CoupledState& state, const Forcing& forcing) const {
  const FluidGrid& fg = *fg_;
  const PlateGrid& pg = *pg_;
  const PlateOperators& po = *pops_;
  StepReport rep;

  PlateStepStats pstats;
  PlateField plate_new = plate_->step(state.plate, state.traction, forcing.G_pl, &pstats);
  Vec x = po.to_dofs(plate_new.ut);
  // velocity a single step of the applied loads produces; floor of the relative test
  const double impulse = params_.dt * (forcing.G_pl.max_abs() + state.traction.max_abs());

  FluidField fluid_new;
  PlateVectorField traction;
  Vec r_prev;
  double omega = 0.5;
  bool converged = false;
  for (int k = 1; k <= params_.max_subiterations; ++k) {
    const Vec b = boundary_from_plate(fg, pg, po.from_dofs(x));
    SolveStats fstats;
    fluid_new = fluid_->solve(forcing.G_fl, state.fluid.v, b, &fstats);
    rep.stokes_iterations += fstats.iterations;
    rep.stokes_max_div = fstats.max_div;
    rep.stokes_momentum_residual = fstats.momentum_residual;
    traction = reaction_traction(fg, pg, fluid_->reaction(fluid_new, state.fluid.v, forcing.G_fl));
    plate_new = plate_->step(state.plate, traction, forcing.G_pl, &pstats);
    rep.picard_iterations += pstats.picard_iterations;
    const Vec z = po.to_dofs(plate_new.ut);
    const Vec r = z - x;
    const double res = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    rep.residual_history.push_back(res);
    rep.subiterations = k;
    rep.interface_residual = res;
    const double scale = std::max({z.size() ? z.cwiseAbs().maxCoeff() : 0.0, state.plate.ut.max_abs(),
                                   1e-6 * state.plate.u.max_abs() / params_.dt, impulse});
    if (res <= std::min(params_.tol_couple, params_.tol_couple_rel * scale) || res == 0.0) {
      converged = true;
      break;
    }
    if (r_prev.size()) {
      const Vec dr = r - r_prev;
      const double den = dr.squaredNorm();
      if (den > 0.0) omega = -omega * r_prev.dot(dr) / den;
      omega = std::clamp(omega, 0.05, 1.0);
    }
    x += omega * r;
    r_prev = r;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "interface iteration did not converge in " << params_.max_subiterations << " sub-iterations; residuals";
    const auto& h = rep.residual_history;
    for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i) msg << ' ' << h[i];
    throw CouplingFailure(msg.str());
  }

  CoupledState next;
  next.fluid = std::move(fluid_new);
  next.plate = std::move(plate_new);
  next.time = state.time + params_.dt;
  next.traction = traction;

  const double dt = params_.dt;
  rep.dissipation = dt * params_.nu * ops::symmetric_gradient_form(fg, next.fluid.v, next.fluid.v);
  double plate_work = 0.0;
  for (int c = 0; c < 3; ++c)
    plate_work += (pg.trapezoid().array() * forcing.G_pl.c[c].array() * next.plate.ut.c[c].array()).sum();
  rep.work = dt * (ops::fluid_inner(fg, forcing.G_fl, next.fluid.v) + plate_work);
  return {std::move(next), std::move(rep)};
}

std::pair<CoupledState, StepReport> advance(const CoupledState& state, const ModelParams& params,
                                            const Forcing& forcing) {
  const Coupler c(params);
  return c.advance(state, forcing);
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.time);
  return t;
}

int step_count(double t_end, double dt) {
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  return std::max(1, int(std::llround(t_end / dt)));
}

Trajectory run(const Coupler& coupler, const CoupledState& state0, const Forcing& forcing, const RunOptions& options,
               const std::vector<Observer>& observers) {
  if (options.snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be at least 1");
  const int steps = step_count(options.t_end, coupler.params().dt);
  Trajectory tr;
  tr.dt = coupler.params().dt;
  tr.stride = options.snapshot_stride;
  tr.snapshots.push_back(state0);
  tr.steps.push_back(0);
  tr.dissipation_cum.push_back(0.0);
  tr.work_cum.push_back(0.0);
  tr.reports.push_back(StepReport{});
  for (const auto& obs : observers) obs(0, state0, tr.reports.back());

  CoupledState current = state0;
  double diss = 0.0, work = 0.0;
  for (int n = 1; n <= steps; ++n) {
    std::pair<CoupledState, StepReport> out;
    try {
      out = coupler.advance(current, forcing);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "step " << n << " failed: " << e.what();
      tr.error = msg.str();
      if (tr.steps.back() != n - 1) {
        tr.snapshots.push_back(current);
        tr.steps.push_back(n - 1);
        tr.dissipation_cum.push_back(diss);
        tr.work_cum.push_back(work);
        tr.reports.push_back(StepReport{});
      }
      return tr;
    }
    current = std::move(out.first);
    diss += out.second.dissipation;
    work += out.second.work;
    for (const auto& obs : observers) obs(n, current, out.second);
    if (n % options.snapshot_stride == 0 || n == steps) {
      tr.snapshots.push_back(current);
      tr.steps.push_back(n);
      tr.dissipation_cum.push_back(diss);
      tr.work_cum.push_back(work);
      tr.reports.push_back(out.second);
    }
  }
  return tr;
}

Vec plate_profile(const PlateGrid& pg, const std::string& name, double amplitude) {
  const double pi = std::numbers::pi;
  const double lx = pg.lx(), ly = pg.ly();
  auto s2 = [](double a) { return std::sin(a) * std::sin(a); };
  Vec out;
  if (name == "zero" || name == "none") {
    out = Vec::Zero(pg.num_nodes());
  } else if (name == "bump") {
    out = pg.sample([&](double x, double y) {
      return amplitude * (s2(pi * x / lx) * s2(pi * y / ly) - s2(2 * pi * x / lx) * s2(2 * pi * y / ly));
    });
  } else if (name == "wave") {
    out = pg.sample([&](double x, double y) {
      return amplitude * s2(pi * x / lx) * s2(pi * y / ly) * std::cos(pi * y / ly);
    });
  } else if (name == "cap") {
    out = pg.sample([&](double x, double y) { return amplitude * s2(pi * x / lx) * s2(pi * y / ly); });
  } else {
    throw std::invalid_argument("unknown plate profile '" + name + "' (expected zero, bump, wave or cap)");
  }
  for (Index b : pg.boundary()) out[b] = 0.0;
  return out;
}

CoupledState make_initial_state(const Coupler& coupler, const InitialSpec& spec) {
  const FluidGrid& fg = coupler.fluid_grid();
  const PlateGrid& pg = coupler.plate_grid();
  CoupledState s;
  s.plate = PlateField::zeros(pg);
  auto take = [&](const PlateVectorField& src, PlateVectorField& dst, const char* what) {
    for (int c = 0; c < 3; ++c) {
      if (src.c[c].size() == 0) continue;
      if (src.c[c].size() != pg.num_nodes()) throw std::invalid_argument(std::string(what) + " has wrong size");
      for (Index b : pg.boundary())
        if (src.c[c][b] != 0.0)
          throw CompatibilityError(std::string(what) + " violates the clamped boundary condition");
      dst.c[c] = src.c[c];
    }
  };
  take(spec.u0, s.plate.u, "initial displacement");
  take(spec.u1, s.plate.ut, "initial velocity");
  require_zero_flux(pg, s.plate.ut);

  Vec base = Vec::Zero(fg.num_positions());
  if (spec.v0.size()) {
    if (spec.v0.size() != fg.num_positions()) throw std::invalid_argument("initial fluid velocity has wrong size");
    base = project_solenoidal(fg, spec.v0);
  }
  const FluidField lift =
      coupler.steady_workspace().solve(Vec::Zero(fg.num_positions()), Vec(), boundary_from_plate(fg, pg, s.plate.ut));
  s.fluid.v = base + lift.v;
  s.fluid.p = Vec::Zero(fg.num_cells());
  s.time = 0.0;
  s.traction = PlateVectorField::zeros(pg);
  return s;
}

}  // namespace fsilab
