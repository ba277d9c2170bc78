#include <doctest.h>

#include "fsilab/coupling.hpp"

#include <cmath>

using namespace fsilab;

namespace {

ModelParams small_params(double dt = 1e-2) {
  ModelParams p;
  p.geometry.nx = 8;
  p.geometry.ny = 8;
  p.geometry.nz = 6;
  p.dt = dt;
  p.nu = 1.0;
  p.mu = 0.3;
  return p;
}

double total_energy(const Coupler& c, const CoupledState& s) {
  const FluidGrid& fg = c.fluid_grid();
  const PlateGrid& pg = c.plate_grid();
  double e = 0.5 * fg.masses().cwiseProduct(s.fluid.v.cwiseAbs2()).sum();
  for (int q = 0; q < 3; ++q) e += 0.5 * pg.trapezoid().cwiseProduct(s.plate.ut.c[q].cwiseAbs2()).sum();
  return e + plate_energy(c.plate_ops(), s.plate.u, c.params().mu).total();
}

double mean_w(const PlateGrid& pg, const CoupledState& s) { return pg.trapezoid().dot(s.plate.u.c[2]) / pg.area(); }

CoupledState bump_state(const Coupler& c, double amp) {
  InitialSpec spec;
  spec.u0 = PlateVectorField::zeros(c.plate_grid());
  spec.u0.c[2] = plate_profile(c.plate_grid(), "bump", amp);
  return make_initial_state(c, spec);
}

}  // namespace

TEST_CASE("zero data stays exactly at rest") {
  const Coupler c(small_params());
  const CoupledState s0 = make_initial_state(c, {});
  const auto [s1, rep] = c.advance(s0, Forcing::zero(c.fluid_grid(), c.plate_grid()));
  CHECK(rep.subiterations == 1);
  CHECK(rep.interface_residual == 0.0);
  CHECK(s1.fluid.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.plate.u.max_abs() == 0.0);
  CHECK(s1.plate.ut.max_abs() == 0.0);
}

TEST_CASE("initial state is compatible") {
  const Coupler c(small_params());
  const PlateGrid& pg = c.plate_grid();
  InitialSpec spec;
  spec.u1 = PlateVectorField::zeros(pg);
  spec.u1.c[2] = plate_profile(pg, "bump", 0.3);
  const CoupledState s = make_initial_state(c, spec);
  const Vec b = boundary_from_plate(c.fluid_grid(), pg, s.plate.ut);
  for (Index t : c.fluid_grid().top()) CHECK(s.fluid.v[t] == doctest::Approx(b[t]).epsilon(1e-12));
  CHECK(ops::discrete_div(c.fluid_grid(), s.fluid.v).cwiseAbs().maxCoeff() < 1e-10);

  spec.u1.c[2] = plate_profile(pg, "cap", 0.3);
  CHECK_THROWS_AS(make_initial_state(c, spec), CompatibilityError);
  CHECK_THROWS_AS(plate_profile(pg, "nope", 1.0), std::invalid_argument);
}

TEST_CASE("unforced motion dissipates energy and conserves the enclosed volume") {
  const Coupler c(small_params());
  const PlateGrid& pg = c.plate_grid();
  CoupledState s = bump_state(c, 0.2);
  const Forcing zero = Forcing::zero(c.fluid_grid(), pg);
  const double m0 = mean_w(pg, s);
  double e_prev = total_energy(c, s);
  for (int n = 0; n < 20; ++n) {
    auto [next, rep] = c.advance(s, zero);
    const double e = total_energy(c, next);
    CHECK(e < e_prev);
    // implicit Euler: E_new - E_old + dissipation <= work
    CHECK(e - e_prev + rep.dissipation <= 1e-10 * e_prev);
    CHECK(std::abs(mean_w(pg, next) - m0) < 1e-12);
    CHECK(rep.subiterations >= 1);
    e_prev = e;
    s = std::move(next);
  }
}

TEST_CASE("forced run balances work against energy and dissipation") {
  const Coupler c(small_params());
  const FluidGrid& fg = c.fluid_grid();
  const PlateGrid& pg = c.plate_grid();
  Forcing f = Forcing::constant(fg, pg, {0.3, -0.2, 0.5}, {0.1, 0.2, 1.0});
  CoupledState s = bump_state(c, 0.1);
  const double m0 = mean_w(pg, s);
  for (int n = 0; n < 10; ++n) {
    const double e0 = total_energy(c, s);
    auto [next, rep] = c.advance(s, f);
    const double num = rep.work - (total_energy(c, next) - e0) - rep.dissipation;
    CHECK(num >= -1e-9);
    CHECK(std::abs(mean_w(pg, next) - m0) < 1e-12);
    s = std::move(next);
  }
}

TEST_CASE("run keeps the requested snapshots and is deterministic") {
  const Coupler c(small_params());
  const CoupledState s0 = bump_state(c, 0.1);
  const Forcing f = Forcing::constant(c.fluid_grid(), c.plate_grid(), {0.0, 0.0, 0.0}, {0.0, 0.0, 0.5});
  int calls = 0;
  const Trajectory a = run(c, s0, f, {0.07, 3}, {[&](int, const CoupledState&, const StepReport&) { ++calls; }});
  REQUIRE(a.ok());
  CHECK(calls == 8);
  CHECK(a.steps == std::vector<int>{0, 3, 6, 7});
  CHECK(a.times().back() == doctest::Approx(0.07));
  const Trajectory b = run(c, s0, f, {0.07, 3});
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK((a.snapshots[i].fluid.v.array() == b.snapshots[i].fluid.v.array()).all());
    CHECK((a.snapshots[i].plate.u.c[2].array() == b.snapshots[i].plate.u.c[2].array()).all());
    CHECK(a.dissipation_cum[i] == b.dissipation_cum[i]);
  }
  CHECK_THROWS_AS(run(c, s0, f, {0.07, 0}), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  ModelParams p = small_params();
  p.nu = 0.0;
  CHECK_THROWS_AS(Coupler{p}, std::invalid_argument);
  p = small_params();
  p.mu = 0.5;
  CHECK_THROWS_AS(Coupler{p}, std::invalid_argument);
  p = small_params();
  p.dt = -1.0;
  CHECK_THROWS_AS(Coupler{p}, std::invalid_argument);
}
