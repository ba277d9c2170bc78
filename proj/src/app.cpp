#include "fsilab/app.hpp"

#include "fsilab/attractor.hpp"
#include "fsilab/verify.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace fsilab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json audit(double value, const std::string& relation, double bound) {
  const bool ok = relation == "<=" ? value <= bound : value >= bound;
  return {{"value", number_or_null(value)}, {"relation", relation}, {"bound", bound}, {"passed", ok}};
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int exit_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) return kExitConfigError;
  return kExitSolverFailure;
}

CommandResult failure(const std::exception& e) {
  CommandResult r;
  r.exit_code = exit_for(e);
  r.message = e.what();
  r.report = {{"schema_version", 1}, {"error", e.what()}};
  return r;
}

}  // namespace

SimulationResult simulate(const RunConfig& cfg) {
  namespace th = thresholds;
  SimulationResult out;
  const Coupler coupler(cfg.model);
  const Forcing forcing = cfg.make_forcing(coupler);
  const CoupledState s0 = cfg.make_initial(coupler);
  const Trajectory tr = run(coupler, s0, forcing, {cfg.t_end, cfg.snapshot_stride});
  out.error = tr.error;
  out.final_state = tr.snapshots.back();

  const auto energies = energy_series(coupler, tr);
  const std::size_t n = energies.size();
  std::vector<double> E_tilde(n, kNaN), Lambda(n, kNaN), ball(n, kNaN);
  nlohmann::json& sum = out.summary;
  sum["schema_version"] = 1;
  sum["kind"] = "simulate";
  sum["config_hash"] = hex64(cfg.hash());
  sum["dt"] = cfg.model.dt;
  sum["t_end"] = cfg.t_end;
  sum["steps_requested"] = step_count(cfg.t_end, cfg.model.dt);
  sum["steps_completed"] = tr.steps.back();
  sum["snapshots"] = n;
  sum["completed"] = tr.ok();
  if (!tr.ok()) sum["error"] = tr.error;

  if (cfg.audits && n >= 3) {
    const auto terms = higher_order_series(coupler, tr);
    const auto lyap = lyapunov_series(coupler, terms);
    for (std::size_t i = 0; i < n; ++i) {
      E_tilde[i] = lyap[i].E_tilde;
      Lambda[i] = lyap[i].Lambda;
    }
    sum["higher_order"] = {{"max_abs_residual", higher_energy_audit(coupler, terms).max_abs()}};
    sum["lyapunov"] = {{"eta", lyap.front().eta}, {"Cbar", lyap.front().Cbar}};
    for (std::size_t w = 0; w < cfg.omegas.size(); ++w) {
      const BallAudit b = ball_identity_audit(coupler, terms, cfg.omegas[w]);
      if (w == 0) ball = b.from_start.residual;
      sum["ball"].push_back({{"omega", b.omega}, {"max_abs_residual", b.max_abs}, {"scale", b.scale}});
    }
    if (n >= 10) {
      try {
        const DecayFit f = decay_fit(tr.times(), Lambda, true);
        sum["lyapunov"]["rate"] = f.rate;
        sum["lyapunov"]["offset"] = f.offset;
      } catch (const std::invalid_argument& e) {
        sum["lyapunov"]["fit_error"] = e.what();
      }
    }
  }

  double bal_max = 0.0, bal_min = std::numeric_limits<double>::infinity(), drift = 0.0, rise = 0.0;
  int max_sub = 0;
  std::vector<double> t, E;
  for (std::size_t i = 0; i < n; ++i) {
    const EnergyReport& e = energies[i];
    CsvRow row;
    row.t = e.t;
    row.E_total = e.E_total;
    row.kinetic_fluid = e.kinetic_fluid;
    row.kinetic_plate = e.kinetic_plate;
    row.bending = e.bending;
    row.membrane = e.membrane;
    row.dissipation_cum = e.dissipation_cum;
    row.work_cum = e.work_cum;
    row.balance_residual = e.balance_residual;
    row.E_tilde = E_tilde[i];
    row.Lambda = Lambda[i];
    row.ball_residual = ball[i];
    row.mean_w = e.mean_w;
    row.interface_residual = tr.reports[i].interface_residual;
    row.subiterations = tr.reports[i].subiterations;
    out.rows.push_back(row);
    bal_max = std::max(bal_max, std::abs(e.balance_residual));
    bal_min = std::min(bal_min, e.balance_residual);
    drift = std::max(drift, std::abs(e.mean_w - energies.front().mean_w));
    if (i > 0) rise = std::max(rise, e.E_total - energies[i - 1].E_total);
    max_sub = std::max(max_sub, row.subiterations);
    t.push_back(e.t);
    E.push_back(e.E_total);
  }
  const double E0 = energies.front().E_total;
  sum["E0"] = E0;
  sum["E_final"] = energies.back().E_total;
  sum["balance"] = {{"max_abs_residual", bal_max}, {"min_residual", bal_min}};
  sum["volume_drift"] = drift;
  sum["max_subiterations"] = max_sub;
  if (n >= 10 && E0 > 0.0) {
    try {
      const DecayFit f = decay_fit(t, E, !forcing.is_zero());
      sum["decay"] = {{"rate", f.rate}, {"offset", f.offset}, {"amplitude", f.amplitude}};
    } catch (const std::invalid_argument& e) {
      sum["decay"] = {{"error", e.what()}};
    }
  }

  nlohmann::json audits;
  audits["volume_drift"] = audit(drift, "<=", th::kVolumeDrift);
  if (forcing.is_zero()) {
    const double scale = std::max(E0, std::numeric_limits<double>::min());
    audits["balance_nonnegative"] = audit(bal_min / scale, ">=", -th::kNonnegFloor);
    audits["energy_monotone"] = audit(rise / scale, "<=", th::kNonnegFloor);
  }
  out.audits_passed = true;
  for (const auto& [name, a] : audits.items()) out.audits_passed = out.audits_passed && a["passed"].get<bool>();
  sum["audits"] = audits;
  sum["passed"] = out.audits_passed && tr.ok();
  return out;
}

CommandResult cmd_simulate(const RunConfig& cfg, const std::string& output_dir) {
  try {
    const SimulationResult sim = simulate(cfg);
    CommandResult r;
    r.report = sim.summary;
    const std::string csv = join(output_dir, "diagnostics.csv");
    const std::string summary = join(output_dir, "summary.json");
    const std::string snap = join(output_dir, "final_state.snap");
    write_csv(csv, sim.rows);
    write_snapshot(snap, Coupler(cfg.model), sim.final_state, cfg.hash());
    r.report["artifacts"] = {{"csv", "diagnostics.csv"}, {"snapshot", "final_state.snap"}};
    write_json(summary, r.report);
    r.artifacts = {csv, summary, snap};
    if (!sim.error.empty()) {
      r.exit_code = kExitSolverFailure;
      r.message = "solver failure: " + sim.error;
    } else if (!sim.audits_passed) {
      r.exit_code = kExitAuditFailed;
      r.message = "audit failed; see " + summary;
    } else {
      r.message = "wrote " + std::to_string(sim.rows.size()) + " rows to " + csv;
    }
    return r;
  } catch (const std::exception& e) {
    return failure(e);
  }
}

CommandResult cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& output_dir) {
  try {
    const SuiteReport rep = run_suite(cfg, suite);
    CommandResult r;
    r.report = to_json(rep);
    r.report["config_hash"] = hex64(cfg.hash());
    r.report["seed"] = cfg.seed;
    const std::string path = join(output_dir, "verify_" + suite + ".json");
    write_json(path, r.report);
    r.artifacts = {path};
    std::ostringstream msg;
    for (const auto& c : rep.checks) msg << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << '\n';
    r.message = msg.str();
    r.exit_code = rep.passed ? kExitOk : kExitAuditFailed;
    return r;
  } catch (const std::exception& e) {
    return failure(e);
  }
}

namespace {

nlohmann::json trajectory_json(const TrajectoryProbe& p) {
  return {{"label", p.label},
          {"E0", p.E0},
          {"entry_time", number_or_null(p.entry_time)},
          {"sup_after_entry", p.sup_after_entry},
          {"final_energy", p.final_energy},
          {"decay_rate", number_or_null(p.decay_rate)},
          {"left_ball", p.left_ball},
          {"error", p.error}};
}

void write_series(const std::string& path, const std::string& header, const std::vector<double>& t,
                  const std::vector<std::vector<double>>& cols) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << header << '\n';
  char buf[32];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.16e", t[i]);
    f << buf;
    for (const auto& c : cols) {
      std::snprintf(buf, sizeof buf, "%.16e", c[i]);
      f << ',' << buf;
    }
    f << '\n';
  }
}

CoupledState scaled_initial(const RunConfig& cfg, const Coupler& coupler, double factor) {
  RunConfig c = cfg;
  c.w0.amplitude *= factor;
  c.w0.constant *= factor;
  c.w1.amplitude *= factor;
  c.w1.constant *= factor;
  return c.make_initial(coupler);
}

}  // namespace

CommandResult cmd_probe(const RunConfig& cfg, const std::string& kind, const std::string& output_dir) {
  try {
    if (kind != "stationary" && kind != "dissipativity" && kind != "separation")
      throw std::invalid_argument("unknown probe '" + kind + "' (expected stationary, dissipativity or separation)");
    const Coupler coupler(cfg.model);
    const Forcing forcing = cfg.make_forcing(coupler);
    StationaryOptions so;
    so.tol = cfg.stationary_tol;
    so.max_inplane_load = cfg.max_inplane_load;
    const StationaryState st = stationary_solve(coupler, forcing, so);
    const double R0 = cfg.R0 > 0.0 ? cfg.R0 : absorbing_radius(coupler, st, cfg.c_probe);
    const double t_end = cfg.probe_t_end > 0.0 ? cfg.probe_t_end : cfg.t_end;

    CommandResult r;
    nlohmann::json& j = r.report;
    j["schema_version"] = 1;
    j["kind"] = "probe";
    j["probe"] = kind;
    j["config_hash"] = hex64(cfg.hash());
    j["R0"] = R0;
    j["stationary_residual"] = st.plate_residual;
    bool passed = false;

    if (kind == "stationary") {
      const double defect = stationary_step_defect(coupler, st, forcing);
      const double bound = 10.0 * cfg.model.tol_couple;
      j["picard_iterations"] = st.iterations;
      j["multiplier"] = st.multiplier;
      j["fluid_max_div"] = st.fluid_max_div;
      j["step_defect"] = defect;
      j["step_defect_bound"] = bound;
      j["energy"] = energy_total(coupler, st.as_state()).E_total;
      j["max_abs_w"] = st.plate.u.c[2].cwiseAbs().maxCoeff();
      passed = st.plate_residual <= cfg.stationary_tol && defect <= bound;
      const std::string snap = join(output_dir, "stationary_state.snap");
      write_snapshot(snap, coupler, st.as_state(), cfg.hash());
      j["snapshot"] = "stationary_state.snap";
      r.artifacts.push_back(snap);
      std::ostringstream msg;
      msg << "stationary residual " << st.plate_residual << ", step defect " << defect << " (bound " << bound << ")";
      r.message = msg.str();
    } else if (kind == "dissipativity") {
      if (cfg.w0.is_zero() && cfg.w1.is_zero())
        throw ConfigError("initial.w0", "dissipativity probe scales w0 and w1, which are both zero");
      std::vector<LabeledState> init;
      for (double a : cfg.probe_amplitudes) {
        std::ostringstream label;
        label << "amplitude_x" << a;
        init.push_back({label.str(), scaled_initial(cfg, coupler, a)});
      }
      const ProbeReport rep = dissipativity_probe(coupler, init, forcing, t_end, R0);
      for (std::size_t k = 0; k < rep.trajectories.size(); ++k) {
        const auto& p = rep.trajectories[k];
        const std::string name = "probe_dissipativity_" + std::to_string(k) + ".csv";
        write_series(join(output_dir, name), "t,E_total", p.t, {p.energy});
        r.artifacts.push_back(join(output_dir, name));
        auto tj = trajectory_json(p);
        tj["series_file"] = name;
        j["trajectories"].push_back(tj);
      }
      passed = rep.passed;
      r.message = rep.message;
    } else {
      if (cfg.probe_amplitudes.size() < 2) throw ConfigError("probe.amplitudes", "separation needs two amplitudes");
      const CoupledState a = scaled_initial(cfg, coupler, cfg.probe_amplitudes[0]);
      const CoupledState b = scaled_initial(cfg, coupler, cfg.probe_amplitudes[1]);
      const CoupledState ref = st.as_state();
      const ProbeReport rep = separation_probe(coupler, a, b, forcing, t_end, forcing.is_zero() ? nullptr : &ref);
      std::vector<std::vector<double>> cols{rep.distance};
      std::string header = "t,distance";
      if (!rep.distance_to_reference.empty()) {
        cols.push_back(rep.distance_to_reference);
        header += ",distance_to_stationary";
      }
      const std::string name = "probe_separation.csv";
      write_series(join(output_dir, name), header, rep.times, cols);
      r.artifacts.push_back(join(output_dir, name));
      j["series_file"] = name;
      j["contraction_rate"] = number_or_null(rep.contraction_rate);
      j["initial_distance"] = rep.distance.empty() ? nlohmann::json(nullptr) : nlohmann::json(rep.distance.front());
      j["final_distance"] = rep.distance.empty() ? nlohmann::json(nullptr) : nlohmann::json(rep.distance.back());
      passed = rep.passed;
      r.message = rep.message;
    }
    j["passed"] = passed;
    j["message"] = r.message;
    const std::string path = join(output_dir, "probe_" + kind + ".json");
    write_json(path, j);
    r.artifacts.insert(r.artifacts.begin(), path);
    r.exit_code = passed ? kExitOk : kExitAuditFailed;
    return r;
  } catch (const std::exception& e) {
    return failure(e);
  }
}

std::string resolve_output_dir(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FSILAB_OUTPUT_DIR"); env && *env) return env;
  return cfg.output_dir;
}

}  // namespace fsilab
