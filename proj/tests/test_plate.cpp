#include <doctest.h>

#include "fsilab/plate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace fsilab;

namespace {

PlateVectorField random_displacement(const PlateGrid& g, std::mt19937& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  auto f = PlateVectorField::zeros(g);
  for (auto& c : f.c)
    for (Index n : g.interior()) c[n] = u(rng);
  return f;
}

PlateVectorField axpy(const PlateVectorField& a, double s, const PlateVectorField& b) {
  PlateVectorField out;
  for (int c = 0; c < 3; ++c) out.c[c] = a.c[c] + s * b.c[c];
  return out;
}

double dot(const PlateVectorField& a, const PlateVectorField& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += a.c[c].dot(b.c[c]);
  return s;
}

SymTensorField2D single(double a, double b, double c) {
  SymTensorField2D t = SymTensorField2D::zeros(1);
  t.e11[0] = a;
  t.e12[0] = b;
  t.e22[0] = c;
  return t;
}

}  // namespace

TEST_CASE("stress law evaluations") {
  const auto c = stress_C(single(1, 0, 1), 0.3);
  CHECK(c.e11[0] == doctest::Approx(2.0 / 0.7 * 1.3));
  CHECK(c.e22[0] == doctest::Approx(3.7142857142857));
  CHECK(c.e12[0] == 0.0);
  for (double mu : {0.1, 0.25, 0.45}) {
    const auto d = stress_C(single(1, 0, -1), mu);
    CHECK(d.e11[0] == doctest::Approx(2.0));
    CHECK(d.e22[0] == doctest::Approx(-2.0));
  }
  const auto z = stress_C(single(0, 0, 0), 0.3);
  CHECK(z.e11[0] == 0.0);
  CHECK_THROWS_AS(stress_C(single(1, 0, 1), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(stress_C(single(1, 0, 1), 0.0), std::invalid_argument);
}

TEST_CASE("stress law is positive definite on random symmetric tensors") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double mu = 0.01 + 0.48 * (0.5 + 0.5 * u(rng));
    const auto e = single(u(rng), u(rng), u(rng));
    const auto c = stress_C(e, mu);
    CHECK(c.e11[0] * e.e11[0] + 2.0 * c.e12[0] * e.e12[0] + c.e22[0] * e.e22[0] > 0.0);
  }
}

TEST_CASE("strains of simple fields") {
  const PlateGrid g(BoxGeometry{1.0, 1.0, 1.0, 6, 6, 4});
  const PlateOperators ops(g);
  auto u = PlateVectorField::zeros(g);
  u.c[2] = g.sample([](double x, double y) { return x + 2.0 * y; });
  const auto P = strain_P(ops, u);
  CHECK((P.e11.array() - 0.5).abs().maxCoeff() < 1e-12);
  CHECK((P.e12.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((P.e22.array() - 2.0).abs().maxCoeff() < 1e-12);

  auto v = PlateVectorField::zeros(g);
  v.c[0] = g.sample([](double x, double) { return x; });
  const auto Q = strain_P(ops, v);
  CHECK((Q.e11.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(Q.e12.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(Q.e22.cwiseAbs().maxCoeff() < 1e-12);

  // Constant stress has no interior divergence.
  const auto f = vonkarman_forces(ops, v, 0.3);
  CHECK(f.in_plane[0].cwiseAbs().maxCoeff() < 1e-10);
  CHECK(f.in_plane[1].cwiseAbs().maxCoeff() < 1e-10);
  CHECK(f.transversal.cwiseAbs().maxCoeff() == 0.0);

  std::mt19937 rng(3);
  const auto r = random_displacement(g, rng, 1.0);
  const auto S = strain_P(ops, r);
  const auto S0 = strain_P(ops, r, false);
  for (Index s = 0; s < S.size(); ++s) {
    const double a = S.e11[s] - S0.e11[s], b = S.e12[s] - S0.e12[s], c = S.e22[s] - S0.e22[s];
    CHECK(a >= 0.0);
    CHECK(c >= 0.0);
    CHECK(a * c - b * b >= -1e-12 * (a * c + 1.0));
  }
}

TEST_CASE("strain rate is the time derivative of the strain") {
  const PlateGrid g(BoxGeometry{1.0, 0.7, 1.0, 7, 5, 4});
  const PlateOperators ops(g);
  std::mt19937 rng(5);
  const auto u = random_displacement(g, rng, 0.3);
  const auto ut = random_displacement(g, rng, 1.0);
  const auto rate = strain_rate_P(ops, u, ut);
  double prev = 0.0;
  for (double d : {1e-2, 5e-3}) {
    const auto P1 = strain_P(ops, axpy(u, d, ut));
    const auto P0 = strain_P(ops, u);
    const double err = ((P1.e11 - P0.e11) / d - rate.e11).cwiseAbs().maxCoeff() +
                       ((P1.e12 - P0.e12) / d - rate.e12).cwiseAbs().maxCoeff();
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.01));
    prev = err;
  }
  const auto same = strain_rate_P(ops, u, u);
  const auto e0 = strain_P(ops, u, false);
  const auto o = grad_outer(ops, u.c[2], u.c[2]);
  CHECK((same.e12 - e0.e12 - o.e12).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("elastic forces are the exact gradient of the plate energy") {
  const PlateGrid g(BoxGeometry{1.2, 0.9, 1.0, 8, 7, 4});
  const PlateOperators ops(g);
  const double mu = 0.3;
  std::mt19937 rng(11);
  const auto u = random_displacement(g, rng, 0.5);
  const Vec grad = plate_energy_gradient(ops, u, mu);
  const Index n = g.num_nodes();
  const auto f = vonkarman_forces(ops, u, mu);
  const Vec bih = ops::biharmonic(g, u.c[2]);
  for (int k = 0; k < 100; ++k) {
    const auto d = random_displacement(g, rng, 1.0);
    auto central = [&](double h) {
      return (plate_energy(ops, axpy(u, h, d), mu).total() - plate_energy(ops, axpy(u, -h, d), mu).total()) / (2 * h);
    };
    double an = 0.0, via_forces = 0.0;
    for (int c = 0; c < 3; ++c) an += grad.segment(c * n, n).dot(d.c[c]);
    via_forces = g.node_area() * (bih.dot(d.c[2]) - f.transversal.dot(d.c[2]) - f.in_plane[0].dot(d.c[0]) -
                                  f.in_plane[1].dot(d.c[1]));
    // The energy is quartic, so the central difference error is exactly h^2/6 times a third derivative.
    const double e1 = central(2e-3) - an, e2 = central(1e-3) - an;
    CHECK(std::abs(e2) <= 1e-4 * std::abs(an));
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(via_forces == doctest::Approx(an).epsilon(1e-10));
  }
}

TEST_CASE("linear stiffness is the Hessian at rest and contains the biharmonic stencil") {
  const PlateGrid g(BoxGeometry{1.0, 1.3, 1.0, 6, 7, 4});
  const PlateOperators ops(g);
  const double mu = 0.27;
  const SpMat K = assemble_K_lin(ops, mu);
  std::mt19937 rng(2);
  const auto u = random_displacement(g, rng, 1.0);
  const Vec grad = plate_energy_gradient(ops, u, mu, false);
  PlateVectorField gf;
  const Index n = g.num_nodes();
  for (int c = 0; c < 3; ++c) gf.c[c] = grad.segment(c * n, n);
  CHECK((K * ops.to_dofs(u) - ops.to_dofs(gf)).cwiseAbs().maxCoeff() < 1e-9 * grad.cwiseAbs().maxCoeff());

  auto w = PlateVectorField::zeros(g);
  w.c[2] = u.c[2];
  const Vec bih = ops.to_dofs(PlateVectorField{{Vec::Zero(n), Vec::Zero(n), ops::biharmonic(g, u.c[2])}});
  CHECK((K * ops.to_dofs(w) / g.node_area() - bih).cwiseAbs().maxCoeff() < 1e-9 * bih.cwiseAbs().maxCoeff());
  // The nonlinear remainder starts at second order in the displacement.
  const double f1 = nonlinear_forces(ops, K, axpy(w, 1e-3 - 1.0, w), mu).cwiseAbs().maxCoeff();
  const double f2 = nonlinear_forces(ops, K, axpy(w, 2e-3 - 1.0, w), mu).cwiseAbs().maxCoeff();
  CHECK(f2 / f1 == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("plate substep: zero state, clamped boundary, mean and energy") {
  const PlateGrid g(BoxGeometry{1.0, 1.0, 1.0, 8, 8, 4});
  const PlateOperators ops(g);
  const double mu = 0.3;
  const auto zero = PlateField::zeros(g);
  const auto z = plate_substep(ops, zero, PlateVectorField::zeros(g), PlateVectorField::zeros(g), mu, 0.01);
  CHECK(z.u.max_abs() == 0.0);
  CHECK(z.ut.max_abs() == 0.0);

  std::mt19937 rng(8);
  PlateField s = PlateField::zeros(g);
  s.u = random_displacement(g, rng, 0.05);
  const double mean0 = s.u.c[2].sum();
  PlateStepper stepper(ops, mu, 0.01);
  double e_prev = plate_energy(ops, s.u, mu).total() + 0.5 * g.node_area() * dot(s.ut, s.ut);
  for (int k = 0; k < 40; ++k) {
    PlateStepStats st;
    s = stepper.step(s, PlateVectorField::zeros(g), PlateVectorField::zeros(g), &st);
    CHECK(st.picard_iterations <= 50);
    const double e = plate_energy(ops, s.u, mu).total() + 0.5 * g.node_area() * dot(s.ut, s.ut);
    CHECK(e <= e_prev);
    e_prev = e;
    CHECK(std::abs(s.ut.c[2].sum()) <= 1e-12 * s.ut.max_abs() * g.num_nodes());
    for (Index b : g.boundary())
      for (int c = 0; c < 3; ++c) CHECK(s.u.c[c][b] == 0.0);
  }
  CHECK(std::abs(s.u.c[2].sum() - mean0) <= 1e-12);
}

TEST_CASE("linear plate under a static load settles on the constrained biharmonic solution") {
  const PlateGrid g(BoxGeometry{1.0, 1.0, 1.0, 8, 8, 4});
  const PlateOperators ops(g);
  const double mu = 0.3;
  auto G = PlateVectorField::zeros(g);
  G.c[2] = g.sample([](double x, double y) { return 50.0 * (x - 0.3) + 10.0 * y * y; });
  G.c[0] = g.sample([](double, double y) { return 2.0 * y; });

  const SpMat K = assemble_K_lin(ops, mu);
  const Index m = ops.num_interior();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(3 * m + 1, 3 * m + 1);
  kkt.topLeftCorner(3 * m, 3 * m) = Eigen::MatrixXd(K);
  for (Index a = 0; a < m; ++a) kkt(2 * m + a, 3 * m) = kkt(3 * m, 2 * m + a) = 1.0;
  Vec rhs = Vec::Zero(3 * m + 1);
  rhs.head(3 * m) = g.node_area() * ops.to_dofs(G);
  const Vec oracle = kkt.lu().solve(rhs).head(3 * m);

  PlateStepper stepper(ops, mu, 0.5, false);
  PlateField s = PlateField::zeros(g);
  for (int k = 0; k < 400; ++k) s = stepper.step(s, PlateVectorField::zeros(g), G);
  CHECK((ops.to_dofs(s.u) - oracle).cwiseAbs().maxCoeff() <= 1e-8 * oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("coercivity probe terms") {
  const PlateGrid g(BoxGeometry{1.0, 1.0, 1.0, 8, 8, 4});
  const PlateOperators ops(g);
  const auto zero = coercivity_probe(ops, PlateVectorField::zeros(g), PlateVectorField::zeros(g), 0.3);
  CHECK(zero.lhs() == 0.0);
  std::mt19937 rng(4);
  const auto u = random_displacement(g, rng, 0.2);
  const auto t = coercivity_probe(ops, u, PlateVectorField::zeros(g), 0.3);
  CHECK(t.membrane > 0.0);
  CHECK(t.bending > 0.0);
  CHECK(t.ratio() > 0.0);
}
