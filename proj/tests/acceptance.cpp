// Acceptance battery: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include "fsilab/app.hpp"
#include "fsilab/attractor.hpp"
#include "fsilab/verify.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fsilab;

namespace {

// pinned tolerances
constexpr double kStokesOrder = 1.8;
constexpr double kMaxDiv = 1e-10;
constexpr double kN0Linearity = 1e-8;
constexpr double kRatioLow = 1.6;
constexpr double kRatioHigh = 2.4;
constexpr double kNonnegFloor = 1e-12;  // balance residual / E(0)
constexpr double kVolume = 1e-10;       // |int w(t) - int w(0)| / area
constexpr double kDecayTarget = 1e-6;
constexpr double kDecayRateSpread = 0.2;
constexpr double kDecayAmplitudeFactor = 100.0;
constexpr double kTrendFactor = 5.0;
constexpr double kTrendOrder = 0.8;
constexpr double kStationaryFactor = 10.0;
constexpr double kGradOrderLow = 1.9;
constexpr double kGradOrderHigh = 2.1;
constexpr int kDirections = 100;
constexpr int kTensors = 1000;

const std::string kConfigs = FSILAB_CONFIG_DIR;
const std::string kScratch = FSILAB_SCRATCH_DIR;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

RunConfig config(const std::string& name) { return load_config(kConfigs + "/" + name); }

std::vector<double> column(const std::vector<CsvRow>& rows, double CsvRow::*field) {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.*field);
  return out;
}

double volume_drift(const std::vector<CsvRow>& rows) {
  double d = 0.0;
  for (const auto& r : rows) d = std::max(d, std::abs(r.mean_w - rows.front().mean_w));
  return d;
}

// shared runs
RefinementStudy& refinement() {
  static RefinementStudy s = [] {
    const RunConfig cfg = config("refinement.ini");
    return refinement_study(cfg, cfg.verify_levels, true);
  }();
  return s;
}

Outcome check_stokes() {
  const RunConfig cfg = config("refinement.ini");
  const StokesStudy s = stokes_study({16, 32, 64}, cfg.model.nu, cfg.model.geometry, cfg.seed);
  Outcome o;
  o.passed = true;
  double div = s.n0_max_div;
  std::string orders;
  for (double p : s.orders) {
    o.passed = o.passed && p >= kStokesOrder;
    orders += (orders.empty() ? "" : "/") + fmt(p);
  }
  for (const auto& l : s.levels) div = std::max(div, l.max_div);
  o.passed = o.passed && div <= kMaxDiv && s.n0_linearity <= kN0Linearity;
  o.detail = "velocity L2 order " + orders + " over 16/32/64 (>= " + fmt(kStokesOrder) + "), max div " + fmt(div) +
             " (<= " + fmt(kMaxDiv) + "), N0 linearity " + fmt(s.n0_linearity) + " (<= " + fmt(kN0Linearity) + ")";
  return o;
}

Outcome check_balance() {
  const RefinementStudy& s = refinement();
  if (!s.ok()) return {false, "refinement run failed: " + s.levels.front().error};
  const auto& a = s.levels[0];
  const auto& b = s.levels[1];
  const double ratio = a.balance_max / b.balance_max;
  double worst = 0.0;
  for (const auto& l : s.levels) worst = std::min(worst, l.balance_min / l.E0);
  Outcome o;
  o.passed = s.zero_forcing && ratio >= kRatioLow && ratio <= kRatioHigh && worst >= -kNonnegFloor;
  o.detail = "max residual " + fmt(a.balance_max) + " -> " + fmt(b.balance_max) + " over " + std::to_string(a.steps) +
             " steps, ratio " + fmt(ratio) + " (in [" + fmt(kRatioLow) + ", " + fmt(kRatioHigh) +
             "]); min residual / E(0) " + fmt(worst) + " with G = 0 (>= -" + fmt(kNonnegFloor) + ")";
  return o;
}

struct DecayRuns {
  SimulationResult small, large;
};
DecayRuns& decay_runs() {
  static DecayRuns d = [] {
    RunConfig cfg = config("decay.ini");
    DecayRuns r;
    r.small = simulate(cfg);
    cfg.w0.amplitude *= kDecayAmplitudeFactor;
    r.large = simulate(cfg);
    return r;
  }();
  return d;
}

Outcome check_decay() {
  const DecayRuns& d = decay_runs();
  Outcome o;
  o.passed = d.small.error.empty() && d.large.error.empty();
  std::string detail;
  std::vector<double> rates;
  for (const SimulationResult* r : {&d.small, &d.large}) {
    const auto E = column(r->rows, &CsvRow::E_total);
    bool monotone = true;
    for (std::size_t i = 1; i < E.size(); ++i) monotone = monotone && E[i] <= E[i - 1];
    const double reached = E.back() / E.front();
    const DecayFit f = decay_fit(column(r->rows, &CsvRow::t), E, false);
    rates.push_back(f.rate);
    o.passed = o.passed && monotone && reached < kDecayTarget;
    detail += "E(T)/E(0) " + fmt(reached) + (monotone ? " monotone" : " NOT monotone") + ", rate " + fmt(f.rate) + "; ";
  }
  const double spread = std::abs(rates[0] - rates[1]) / std::max(rates[0], rates[1]);
  o.passed = o.passed && spread <= kDecayRateSpread;
  o.detail = detail + "rate spread " + fmt(spread) + " (<= " + fmt(kDecayRateSpread) + ") across x" +
             fmt(kDecayAmplitudeFactor) + " amplitude";
  return o;
}

Outcome check_higher_order() {
  const RefinementStudy& s = refinement();
  if (!s.ok()) return {false, "refinement run failed"};
  Outcome o;
  o.passed = true;
  std::string detail = "max residual";
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    detail += " " + fmt(s.levels[k].higher_max);
    if (k > 0) {
      const double ratio = s.levels[k - 1].higher_max / s.levels[k].higher_max;
      o.passed = o.passed && ratio >= kRatioLow && ratio <= kRatioHigh;
      detail += " (ratio " + fmt(ratio) + ")";
    }
  }
  o.detail = detail + " under dt halving; ratios in [" + fmt(kRatioLow) + ", " + fmt(kRatioHigh) + "]";
  return o;
}

Outcome check_lyapunov() {
  const RunConfig cfg = config("loaded.ini");
  const LyapunovStudy s = lyapunov_study(cfg);
  if (!s.error.empty()) return {false, s.error};
  Outcome o;
  o.passed = s.fit.rate > 0.0 && s.envelope_excess <= 0.0 && s.min_ratio > 0.0 && std::isfinite(s.max_ratio);
  o.detail = "fitted r " + fmt(s.fit.rate) + ", C " + fmt(s.fit.offset) + ", max Lambda - envelope " +
             fmt(s.envelope_excess) + " (<= 0); (Lambda - Cbar)/E~ in [" + fmt(s.min_ratio) + ", " +
             fmt(s.max_ratio) + "]";
  return o;
}

Outcome check_ball() {
  const RefinementStudy& s = refinement();
  if (!s.ok()) return {false, "refinement run failed"};
  std::vector<double> dts;
  for (const auto& l : s.levels) dts.push_back(l.dt);
  Outcome o;
  o.passed = s.omegas.size() >= 2;
  for (std::size_t w = 0; w < s.omegas.size(); ++w) {
    std::vector<double> res;
    for (const auto& l : s.levels) res.push_back(l.ball_max[w]);
    const TrendFit f = trend_fit(dts, res);
    o.passed = o.passed && f.max_excess <= kTrendFactor && f.order >= kTrendOrder;
    o.detail += "omega " + fmt(s.omegas[w]) + ": residual " + fmt(res.front()) + " -> " + fmt(res.back()) + ", order " +
                fmt(f.order) + ", max/trend " + fmt(f.max_excess) + "; ";
  }
  o.detail += "bounds: max/trend <= " + fmt(kTrendFactor) + ", order >= " + fmt(kTrendOrder);
  return o;
}

Outcome check_stationary() {
  const RunConfig cfg = config("loaded.ini");
  const Coupler c(cfg.model);
  const Forcing f = cfg.make_forcing(c);
  const StationaryState st = stationary_solve(c, f);
  const double defect = stationary_step_defect(c, st, f);
  const double bound = kStationaryFactor * cfg.model.tol_couple;

  const RunConfig zcfg = config("zero.ini");
  const Coupler zc(zcfg.model);
  const StationaryState z = stationary_solve(zc, zcfg.make_forcing(zc));
  bool zero = z.fluid.v.cwiseAbs().maxCoeff() == 0.0 && z.fluid.p.cwiseAbs().maxCoeff() == 0.0;
  for (int q = 0; q < 3; ++q) zero = zero && z.plate.u.c[q].cwiseAbs().maxCoeff() == 0.0;
  Outcome o;
  o.passed = defect <= bound && zero;
  o.detail = "step defect " + fmt(defect) + " (<= " + fmt(bound) + "), Picard residual " + fmt(st.plate_residual) +
             "; zero load gives " + (zero ? "the exact zero state" : "a NONZERO state");
  return o;
}

Outcome check_elastic() {
  const RunConfig cfg = config("refinement.ini");
  const PlateStudy s = plate_study(cfg.model.geometry, cfg.model.mu, cfg.seed, kDirections, kTensors);
  Outcome o;
  o.passed = s.min_order >= kGradOrderLow && s.max_order <= kGradOrderHigh && s.nonpositive == 0;
  o.detail = "central-difference error order in [" + fmt(s.min_order) + ", " + fmt(s.max_order) + "] over " +
             std::to_string(s.directions) + " directions (within [" + fmt(kGradOrderLow) + ", " + fmt(kGradOrderHigh) +
             "]); " + std::to_string(s.nonpositive) + " of " + std::to_string(s.tensors) +
             " tensors with (C e, e) <= 0, min ratio " + fmt(s.min_stress_ratio);
  return o;
}

std::string read_body(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  std::string all = s.str();
  return all.substr(all.find('\n') + 1);
}

Outcome check_determinism() {
  const RunConfig cfg = config("loaded.ini");
  const std::string a = kScratch + "/determinism_a", b = kScratch + "/determinism_b";
  const CommandResult ra = cmd_simulate(cfg, a);
  const CommandResult rb = cmd_simulate(cfg, b);
  const std::string ba = read_body(a + "/diagnostics.csv"), bb = read_body(b + "/diagnostics.csv");
  Outcome o;
  o.passed = ra.exit_code == 0 && rb.exit_code == 0 && !ba.empty() && ba == bb;
  o.detail = "two simulate runs, CSV bodies of " + std::to_string(ba.size()) + " bytes " +
             (ba == bb ? "identical" : "DIFFER");
  return o;
}

Outcome check_volume() {
  std::vector<double> g_volume;
  const DecayRuns& d = decay_runs();
  for (const SimulationResult* r : {&d.small, &d.large}) g_volume.push_back(volume_drift(r->rows));
  const SimulationResult loaded = simulate(config("loaded.ini"));
  g_volume.push_back(volume_drift(loaded.rows));
  for (const auto& l : refinement().levels) g_volume.push_back(l.volume_drift);
  double worst = 0.0;
  for (double v : g_volume) worst = std::max(worst, v);
  Outcome o;
  o.passed = worst <= kVolume;
  o.detail = "max |mean w(t) - mean w(0)| " + fmt(worst) + " over " + std::to_string(g_volume.size()) +
             " runs (<= " + fmt(kVolume) + ")";
  return o;
}

}  // namespace

int main() {
  std::filesystem::create_directories(kScratch);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Stokes correctness", check_stokes},
      {"Energy balance", check_balance},
      {"Volume preservation", check_volume},
      {"Zero-load decay", check_decay},
      {"Higher-order energy equality", check_higher_order},
      {"Lyapunov dissipativity", check_lyapunov},
      {"Ball identity", check_ball},
      {"Stationary consistency", check_stationary},
      {"Elastic-operator correctness", check_elastic},
      {"Determinism", check_determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << k + 1 << ". " << criteria[k].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
