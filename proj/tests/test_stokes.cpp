#include <doctest.h>

#include "fsilab/stokes.hpp"
#include "fsilab/detail/stokes_mms.hpp"

#include <cmath>
#include <random>

using namespace fsilab;

namespace {

PlateVectorField random_plate_field(const PlateGrid& pg, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto out = PlateVectorField::zeros(pg);
  for (auto& c : out.c) {
    for (Index n : pg.interior()) c[n] = u(rng);
  }
  double mean = 0.0;
  for (Index n : pg.interior()) mean += out.c[2][n];
  mean /= double(pg.interior().size());
  for (Index n : pg.interior()) out.c[2][n] -= mean;
  return out;
}

struct MmsResult {
  double l2_error;
  double max_div;
  double formula_error;
  double reaction_error;
};

MmsResult run_mms(int n, double nu) {
  const BoxGeometry geo{1.0, 1.0, 1.0, n, n, n};
  const auto [fg, pg] = build_grids(geo);
  const Vec exact = fg.sample([](int q, double x, double y, double z) { return mms::velocity(q, x, y, z); });
  const Vec force = fg.sample([nu](int q, double x, double y, double z) { return mms::force(q, x, y, z, nu); });
  StokesWorkspace ws(fg, nu, 0.0);
  const FluidField f = ws.solve(force, Vec(), exact);
  const Vec err = f.v - exact;
  MmsResult r{};
  r.l2_error = std::sqrt(ops::fluid_inner(fg, err, err) / ops::fluid_inner(fg, exact, exact));
  r.max_div = ops::discrete_div(fg, f.v).cwiseAbs().maxCoeff();
  const auto tr = reaction_traction(fg, pg, ws.reaction(f, Vec(), force));
  const auto tf = traction_Tf(fg, pg, nu, f);
  const double gauge = fg.sample_cells([](double x, double y, double z) { return mms::pressure(x, y, z); }).mean();
  double ef = 0.0, er = 0.0, norm = 0.0;
  for (int q = 0; q < 3; ++q) {
    const Vec exact_t = pg.sample([&](double x, double y) { return mms::traction(q, x, y, nu) + (q == 2 ? gauge : 0.0); });
    for (Index n : pg.interior()) {
      ef += pg.node_area() * std::pow(tf.c[q][n] - exact_t[n], 2);
      er += pg.node_area() * std::pow(tr.c[q][n] - exact_t[n], 2);
      norm += pg.node_area() * exact_t[n] * exact_t[n];
    }
  }
  r.formula_error = std::sqrt(ef / norm);
  r.reaction_error = std::sqrt(er / norm);
  return r;
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
  const auto [fg, pg] = build_grids(BoxGeometry{1, 1, 1, 6, 6, 6});
  const auto f = solve_stokes(fg, pg, 1.0, Vec::Zero(fg.num_positions()), PlateVectorField::zeros(pg));
  CHECK(f.v.cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hydrostatic forcing is absorbed by the pressure") {
  const double depth = 0.8;
  const auto [fg, pg] = build_grids(BoxGeometry{1.0, 1.2, depth, 6, 7, 8});
  const double nu = 0.7;
  const Vec g = fg.sample([](int q, double, double, double) { return q == 2 ? -1.0 : 0.0; });
  StokesWorkspace ws(fg, nu, 0.0);
  const FluidField f = ws.solve(g, Vec(), Vec::Zero(fg.num_positions()));
  CHECK(f.v.cwiseAbs().maxCoeff() < 1e-12);
  const Vec zc = fg.sample_cells([](double, double, double z) { return z; });
  const Vec expected = -(zc.array() - zc.mean()).matrix();
  CHECK((f.p - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(f.p.mean()) < 1e-13);

  const auto tr = reaction_traction(fg, pg, ws.reaction(f, Vec(), g));
  const auto tf = traction_Tf(fg, pg, nu, f);
  for (Index n : pg.interior()) {
    CHECK(tr.c[2][n] == doctest::Approx(0.5 * depth).epsilon(1e-11));
    CHECK(tf.c[2][n] == doctest::Approx(0.5 * depth).epsilon(1e-11));
    CHECK(std::abs(tr.c[0][n]) < 1e-11);
    CHECK(std::abs(tf.c[1][n]) < 1e-11);
  }
}

TEST_CASE("formula traction differentiates a shear profile exactly") {
  const double depth = 1.5;
  const auto [fg, pg] = build_grids(BoxGeometry{1.0, 1.0, depth, 6, 6, 6});
  FluidField f = FluidField::zeros(fg);
  f.v = fg.sample([depth](int q, double, double, double z) { return q == 0 ? z * z + depth * z : 0.0; });
  const auto t = traction_Tf(fg, pg, 1.0, f);
  for (Index n : pg.interior()) {
    CHECK(t.c[0][n] == doctest::Approx(depth).epsilon(1e-12));
    CHECK(std::abs(t.c[1][n]) < 1e-12);
    CHECK(std::abs(t.c[2][n]) < 1e-12);
  }
}

TEST_CASE("manufactured solution converges at second order") {
  const double nu = 0.8;
  const auto a = run_mms(8, nu);
  const auto b = run_mms(16, nu);
  const auto c = run_mms(32, nu);
  const double o1 = std::log2(a.l2_error / b.l2_error);
  const double o2 = std::log2(b.l2_error / c.l2_error);
  MESSAGE("velocity errors " << a.l2_error << " " << b.l2_error << " " << c.l2_error);
  MESSAGE("formula traction errors " << a.formula_error << " " << b.formula_error << " " << c.formula_error);
  MESSAGE("reaction traction errors " << a.reaction_error << " " << b.reaction_error << " " << c.reaction_error);
  CHECK(o1 >= 1.8);
  CHECK(o2 >= 1.8);
  CHECK(c.max_div <= 1e-10);
  CHECK(std::log2(b.formula_error / c.formula_error) >= 1.0);
  CHECK(c.reaction_error < b.reaction_error);
}

TEST_CASE("lifting operator is linear, solenoidal and reproduces the trace") {
  const auto [fg, pg] = build_grids(BoxGeometry{1.0, 0.8, 0.6, 8, 6, 6});
  const double nu = 0.3;
  const auto psi1 = random_plate_field(pg, 1);
  const auto psi2 = random_plate_field(pg, 2);
  PlateVectorField combo;
  for (int q = 0; q < 3; ++q) combo.c[q] = 2.0 * psi1.c[q] - 0.5 * psi2.c[q];
  const auto n1 = lifting_N0(fg, pg, nu, psi1);
  const auto n2 = lifting_N0(fg, pg, nu, psi2);
  const auto nc = lifting_N0(fg, pg, nu, combo);
  const Vec lin = nc.v - (2.0 * n1.v - 0.5 * n2.v);
  CHECK(lin.cwiseAbs().maxCoeff() <= 1e-8 * nc.v.cwiseAbs().maxCoeff());
  CHECK(ops::discrete_div(fg, nc.v).cwiseAbs().maxCoeff() <= 1e-10);
  const auto tr = ops::trace_to_plate(fg, pg, n1.v);
  for (int q = 0; q < 3; ++q) CHECK((tr.c[q] - psi1.c[q]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("nonzero flux data are rejected") {
  const auto [fg, pg] = build_grids(BoxGeometry{1, 1, 1, 6, 6, 6});
  auto psi = PlateVectorField::zeros(pg);
  for (Index n : pg.interior()) psi.c[2][n] = 1.0;
  CHECK_THROWS_AS(lifting_N0(fg, pg, 1.0, psi), CompatibilityError);
}

TEST_CASE("implicit substep: reaction identity, steady fixed point and large-dt limit") {
  const auto [fg, pg] = build_grids(BoxGeometry{1.0, 1.0, 0.7, 6, 6, 6});
  const double nu = 0.4;
  const auto psi = random_plate_field(pg, 7);
  const Vec g = fg.sample([](int q, double x, double y, double z) { return std::sin(3 * x + q) * std::cos(2 * y - z); });
  const auto steady = solve_stokes(fg, pg, nu, g, psi);

  const auto same = fluid_substep(fg, pg, nu, steady, psi, g, 0.05);
  CHECK((same.v - steady.v).cwiseAbs().maxCoeff() <= 1e-10);

  const auto far = fluid_substep(fg, pg, nu, FluidField::zeros(fg), psi, g, 1e8);
  CHECK((far.v - steady.v).cwiseAbs().maxCoeff() <= 1e-6);

  FluidField old = FluidField::zeros(fg);
  old.v = steady.v * 0.3;
  const double dt = 0.02;
  StokesWorkspace ws(fg, nu, 1.0 / dt);
  SolveStats stats;
  const Vec b = boundary_from_plate(fg, pg, psi);
  const auto f = ws.solve(g, old.v, b, &stats);
  CHECK(stats.max_div <= 1e-10);
  CHECK(stats.momentum_residual <= 1e-9);
  const Vec R = ws.reaction(f, old.v, g);
  double top_work = 0.0;
  for (Index pos : fg.top()) top_work += R[pos] * f.v[pos];
  CHECK(f.v.dot(R) == doctest::Approx(top_work).epsilon(1e-9));
  // Energy identity of one implicit step.
  const Vec& m = fg.masses();
  const double lhs = 0.5 * (m.dot(f.v.cwiseProduct(f.v)) - m.dot(old.v.cwiseProduct(old.v))) / dt +
                     0.5 * m.dot((f.v - old.v).cwiseProduct(f.v - old.v)) / dt +
                     nu * ops::symmetric_gradient_form(fg, f.v, f.v);
  const double rhs = ops::fluid_inner(fg, g, f.v) + top_work;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
}
