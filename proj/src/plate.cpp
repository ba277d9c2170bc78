#include "fsilab/plate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fsilab {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

Vec ewise(const Vec& a, const Vec& b) { return a.cwiseProduct(b); }

struct Gradients {
  Vec x, y;
};

Gradients grad(const PlateOperators& ops, const Vec& f) { return {ops.grad_x() * f, ops.grad_y() * f}; }

// N = C(P), and the membrane energy gradient from N.
struct MembraneState {
  SymTensorField2D P, N;
  Gradients gw;
};

MembraneState membrane_state(const PlateOperators& ops, const PlateVectorField& u, double mu, bool nonlinear) {
  MembraneState s;
  s.P = strain_P(ops, u, nonlinear);
  s.N = stress_C(s.P, mu);
  if (nonlinear) s.gw = grad(ops, u.c[2]);
  return s;
}

Vec membrane_gradient(const PlateOperators& ops, const MembraneState& s, bool nonlinear) {
  const PlateGrid& g = ops.grid();
  const Index n = g.num_nodes();
  const double wt = ops.sample_weight();
  Vec out = Vec::Zero(3 * n);
  out.segment(0, n) = wt * (ops.grad_x().transpose() * s.N.e11 + ops.grad_y().transpose() * s.N.e12);
  out.segment(n, n) = wt * (ops.grad_x().transpose() * s.N.e12 + ops.grad_y().transpose() * s.N.e22);
  if (nonlinear) {
    const Vec qx = ewise(s.N.e11, s.gw.x) + ewise(s.N.e12, s.gw.y);
    const Vec qy = ewise(s.N.e12, s.gw.x) + ewise(s.N.e22, s.gw.y);
    out.segment(2 * n, n) = wt * (ops.grad_x().transpose() * qx + ops.grad_y().transpose() * qy);
  }
  return out;
}

void zero_boundary(const PlateGrid& g, Vec& full) {
  const Index n = g.num_nodes();
  for (int c = 0; c < full.size() / n; ++c)
    for (Index b : g.boundary()) full[c * n + b] = 0.0;
}

}  // namespace

PlateOperators::PlateOperators(const PlateGrid& grid) : grid_(grid) {
  const int nx = grid.nx(), ny = grid.ny();
  const double hx = grid.hx(), hy = grid.hy();
  const Index samples = Index(4) * nx * ny;
  Triplets tx, ty;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const Index s = 4 * (i + Index(nx) * j) + 2 * a + b;
          tx.emplace_back(s, grid.node(i + 1, j + a), 1.0 / hx);
          tx.emplace_back(s, grid.node(i, j + a), -1.0 / hx);
          ty.emplace_back(s, grid.node(i + b, j + 1), 1.0 / hy);
          ty.emplace_back(s, grid.node(i + b, j), -1.0 / hy);
        }
  grad_x_.resize(samples, grid.num_nodes());
  grad_x_.setFromTriplets(tx.begin(), tx.end());
  grad_y_.resize(samples, grid.num_nodes());
  grad_y_.setFromTriplets(ty.begin(), ty.end());

  auto reflect = [](int i, int n) { return i < 0 ? -i : (i > n ? 2 * n - i : i); };
  Triplets tl;
  const double ix = 1.0 / (hx * hx), iy = 1.0 / (hy * hy);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const Index r = grid.node(i, j);
      tl.emplace_back(r, r, -2.0 * (ix + iy));
      tl.emplace_back(r, grid.node(reflect(i - 1, nx), j), ix);
      tl.emplace_back(r, grid.node(reflect(i + 1, nx), j), ix);
      tl.emplace_back(r, grid.node(i, reflect(j - 1, ny)), iy);
      tl.emplace_back(r, grid.node(i, reflect(j + 1, ny)), iy);
    }
  lap_.resize(grid.num_nodes(), grid.num_nodes());
  lap_.setFromTriplets(tl.begin(), tl.end());
}

Vec PlateOperators::to_dofs(const PlateVectorField& f) const {
  const auto& in = grid_.interior();
  const Index m = Index(in.size());
  Vec d(3 * m);
  for (int c = 0; c < 3; ++c)
    for (Index a = 0; a < m; ++a) d[c * m + a] = f.c[c][in[a]];
  return d;
}

PlateVectorField PlateOperators::from_dofs(const Vec& d) const {
  const auto& in = grid_.interior();
  const Index m = Index(in.size());
  auto f = PlateVectorField::zeros(grid_);
  for (int c = 0; c < 3; ++c)
    for (Index a = 0; a < m; ++a) f.c[c][in[a]] = d[c * m + a];
  return f;
}

void require_poisson_ratio(double mu) {
  if (!(mu > 0.0 && mu < 0.5)) {
    std::ostringstream msg;
    msg << "Poisson ratio mu must lie in (0, 0.5), got " << mu;
    throw std::invalid_argument(msg.str());
  }
}

SymTensorField2D stress_C(const SymTensorField2D& eps, double mu) {
  require_poisson_ratio(mu);
  const double k = 2.0 / (1.0 - mu);
  const Vec tr = eps.e11 + eps.e22;
  SymTensorField2D out;
  out.e11 = k * (mu * tr + (1.0 - mu) * eps.e11);
  out.e22 = k * (mu * tr + (1.0 - mu) * eps.e22);
  out.e12 = 2.0 * eps.e12;
  return out;
}

SymTensorField2D strain_P(const PlateOperators& ops, const PlateVectorField& u, bool nonlinear) {
  const auto g1 = grad(ops, u.c[0]);
  const auto g2 = grad(ops, u.c[1]);
  SymTensorField2D P;
  P.e11 = g1.x;
  P.e22 = g2.y;
  P.e12 = 0.5 * (g1.y + g2.x);
  if (nonlinear) {
    const auto gw = grad(ops, u.c[2]);
    P.e11 += 0.5 * gw.x.cwiseProduct(gw.x);
    P.e22 += 0.5 * gw.y.cwiseProduct(gw.y);
    P.e12 += 0.5 * gw.x.cwiseProduct(gw.y);
  }
  return P;
}

SymTensorField2D grad_outer(const PlateOperators& ops, const Vec& a, const Vec& b) {
  const auto ga = grad(ops, a);
  const auto gb = grad(ops, b);
  SymTensorField2D out;
  out.e11 = ga.x.cwiseProduct(gb.x);
  out.e22 = ga.y.cwiseProduct(gb.y);
  out.e12 = 0.5 * (ga.x.cwiseProduct(gb.y) + ga.y.cwiseProduct(gb.x));
  return out;
}

SymTensorField2D strain_rate_P(const PlateOperators& ops, const PlateVectorField& u, const PlateVectorField& ut,
                               bool nonlinear) {
  SymTensorField2D out = strain_P(ops, ut, false);
  if (nonlinear) {
    const auto o = grad_outer(ops, u.c[2], ut.c[2]);
    out.e11 += o.e11;
    out.e12 += o.e12;
    out.e22 += o.e22;
  }
  return out;
}

double tensor_inner(const PlateOperators& ops, const SymTensorField2D& A, const SymTensorField2D& B) {
  return ops.sample_weight() * (A.e11.dot(B.e11) + 2.0 * A.e12.dot(B.e12) + A.e22.dot(B.e22));
}

double C_inner(const PlateOperators& ops, const SymTensorField2D& A, const SymTensorField2D& B, double mu) {
  return tensor_inner(ops, stress_C(A, mu), B);
}

VonKarmanForces vonkarman_forces(const PlateOperators& ops, const PlateVectorField& u, double mu, bool nonlinear) {
  const PlateGrid& g = ops.grid();
  const Index n = g.num_nodes();
  Vec full = -membrane_gradient(ops, membrane_state(ops, u, mu, nonlinear), nonlinear) / g.node_area();
  zero_boundary(g, full);
  VonKarmanForces out;
  out.in_plane[0] = full.segment(0, n);
  out.in_plane[1] = full.segment(n, n);
  out.transversal = full.segment(2 * n, n);
  return out;
}

PlateEnergy plate_energy(const PlateOperators& ops, const PlateVectorField& u, double mu, bool nonlinear) {
  const PlateGrid& g = ops.grid();
  PlateEnergy e;
  const Vec lap = ops.laplacian() * u.c[2];
  e.bending = 0.5 * (g.trapezoid().array() * lap.array().square()).sum();
  const auto P = strain_P(ops, u, nonlinear);
  e.membrane = 0.5 * C_inner(ops, P, P, mu);
  return e;
}

Vec plate_energy_gradient(const PlateOperators& ops, const PlateVectorField& u, double mu, bool nonlinear) {
  const PlateGrid& g = ops.grid();
  const Index n = g.num_nodes();
  Vec out = membrane_gradient(ops, membrane_state(ops, u, mu, nonlinear), nonlinear);
  const Vec lap = ops.laplacian() * u.c[2];
  out.segment(2 * n, n) += ops.laplacian().transpose() * g.trapezoid().cwiseProduct(lap);
  return out;
}

CoercivityTerms coercivity_probe(const PlateOperators& ops, const PlateVectorField& u, const PlateVectorField& G,
                                 double mu) {
  const PlateGrid& g = ops.grid();
  const auto e = plate_energy(ops, u, mu, true);
  CoercivityTerms t;
  t.bending = 2.0 * e.bending;
  t.membrane = 2.0 * e.membrane;
  for (int c = 0; c < 3; ++c) t.load += (g.trapezoid().array() * G.c[c].array() * u.c[c].array()).sum();
  const auto nw = ops::plate_norms(g, u.c[2]);
  const auto n1 = ops::plate_norms(g, u.c[0]);
  const auto n2 = ops::plate_norms(g, u.c[1]);
  t.norm_W_sq = nw.h2 * nw.h2 + n1.h1 * n1.h1 + n2.h1 * n2.h1;
  return t;
}

SpMat assemble_K_lin(const PlateOperators& ops, double mu) {
  require_poisson_ratio(mu);
  const PlateGrid& g = ops.grid();
  const Index n = g.num_nodes();
  const Index S = ops.num_samples();
  // Strain map eps0 = E u on all nodal dofs, rows (e11 | e22 | e12).
  Triplets te;
  for (int k = 0; k < ops.grad_x().outerSize(); ++k) {
    for (SpMat::InnerIterator it(ops.grad_x(), k); it; ++it) {
      te.emplace_back(it.row(), it.col(), it.value());              // e11 from u1_x
      te.emplace_back(2 * S + it.row(), n + it.col(), 0.5 * it.value());  // e12 from u2_x
    }
    for (SpMat::InnerIterator it(ops.grad_y(), k); it; ++it) {
      te.emplace_back(S + it.row(), n + it.col(), it.value());      // e22 from u2_y
      te.emplace_back(2 * S + it.row(), it.col(), 0.5 * it.value());  // e12 from u1_y
    }
  }
  SpMat E(3 * S, 3 * n);
  E.setFromTriplets(te.begin(), te.end());
  const double k = 2.0 / (1.0 - mu);
  const double wt = ops.sample_weight();
  Triplets tc;
  for (Index s = 0; s < S; ++s) {
    tc.emplace_back(s, s, wt * k);
    tc.emplace_back(S + s, S + s, wt * k);
    tc.emplace_back(s, S + s, wt * k * mu);
    tc.emplace_back(S + s, s, wt * k * mu);
    tc.emplace_back(2 * S + s, 2 * S + s, wt * 4.0);
  }
  SpMat C(3 * S, 3 * S);
  C.setFromTriplets(tc.begin(), tc.end());
  SpMat Km = SpMat(E.transpose()) * C * E;

  Triplets tw;
  for (Index b = 0; b < n; ++b) tw.emplace_back(b, b, g.trapezoid()[b]);
  SpMat W(n, n);
  W.setFromTriplets(tw.begin(), tw.end());
  SpMat Kb = SpMat(ops.laplacian().transpose()) * W * ops.laplacian();

  // Restrict to interior dofs.
  std::vector<Index> slot(3 * n, -1);
  const auto& in = g.interior();
  const Index m = Index(in.size());
  for (int c = 0; c < 3; ++c)
    for (Index a = 0; a < m; ++a) slot[c * n + in[a]] = c * m + a;
  Triplets tk;
  for (int col = 0; col < Km.outerSize(); ++col)
    for (SpMat::InnerIterator it(Km, col); it; ++it)
      if (slot[it.row()] >= 0 && slot[it.col()] >= 0) tk.emplace_back(slot[it.row()], slot[it.col()], it.value());
  for (int col = 0; col < Kb.outerSize(); ++col)
    for (SpMat::InnerIterator it(Kb, col); it; ++it) {
      const Index r = slot[2 * n + it.row()], c = slot[2 * n + it.col()];
      if (r >= 0 && c >= 0) tk.emplace_back(r, c, it.value());
    }
  SpMat K(3 * m, 3 * m);
  K.setFromTriplets(tk.begin(), tk.end());
  K.prune(0.0);
  return K;
}

Vec nonlinear_forces(const PlateOperators& ops, const SpMat& K_lin, const PlateVectorField& u, double mu) {
  const PlateGrid& g = ops.grid();
  const Index n = g.num_nodes();
  const Vec full = plate_energy_gradient(ops, u, mu, true);
  PlateVectorField gf;
  for (int c = 0; c < 3; ++c) gf.c[c] = full.segment(c * n, n);
  return -ops.to_dofs(gf) + K_lin * ops.to_dofs(u);
}

PlateStepper::PlateStepper(const PlateOperators& ops, double mu, double dt, bool nonlinear, PicardOptions options)
    : ops_(&ops), mu_(mu), dt_(dt), nonlinear_(nonlinear), options_(options) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  K_ = assemble_K_lin(ops, mu);
  const double mass = ops.grid().node_area();
  SpMat S = dt * K_;
  for (Index i = 0; i < S.rows(); ++i) S.coeffRef(i, i) += mass / dt;
  solver_.compute(S);
  if (solver_.info() != Eigen::Success) throw std::runtime_error("plate step matrix factorization failed");
  const Index m = ops.num_interior();
  Vec e = Vec::Zero(3 * m);
  e.segment(2 * m, m).setOnes();
  s_ = solver_.solve(e);
  es_ = s_.segment(2 * m, m).sum();
}

PlateField PlateStepper::step(const PlateField& old, const PlateVectorField& traction, const PlateVectorField& G,
                              PlateStepStats* stats) const {
  const PlateOperators& ops = *ops_;
  const Index m = ops.num_interior();
  const double mass = ops.grid().node_area();
  const Vec u0 = ops.to_dofs(old.u);
  const Vec z0 = ops.to_dofs(old.ut);
  PlateVectorField load;
  for (int c = 0; c < 3; ++c) load.c[c] = mass * (G.c[c] - traction.c[c]);
  const Vec base = (mass / dt_) * z0 - K_ * u0 + ops.to_dofs(load);

  auto solve_constrained = [&](const Vec& rhs, double* lambda) {
    Vec z = solver_.solve(rhs);
    const double lam = -z.segment(2 * m, m).sum() / es_;
    z += lam * s_;
    if (lambda) *lambda = lam;
    return z;
  };

  double lambda = 0.0;
  Vec z = z0;
  int it = 0;
  double res = 0.0;
  if (!nonlinear_) {
    z = solve_constrained(base, &lambda);
  } else {
    for (it = 1; it <= options_.max_iter; ++it) {
      const Vec u = u0 + dt_ * z;
      const Vec fnl = nonlinear_forces(ops, K_, ops.from_dofs(u), mu_);
      const Vec znew = solve_constrained(base + fnl, &lambda);
      res = (znew - z).cwiseAbs().maxCoeff();
      const double scale = std::max({znew.cwiseAbs().maxCoeff(), z0.cwiseAbs().maxCoeff(),
                                     1e-6 * u0.cwiseAbs().maxCoeff() / dt_});
      z = znew;
      if (res <= options_.tol * scale || res == 0.0) break;
    }
    if (it > options_.max_iter) {
      std::ostringstream msg;
      msg << "plate Picard iteration did not converge: last update " << res;
      throw PicardFailure(msg.str());
    }
  }
  PlateField out;
  out.ut = ops.from_dofs(z);
  out.u = ops.from_dofs(u0 + dt_ * z);
  if (stats) {
    stats->picard_iterations = it;
    stats->picard_residual = res;
    stats->multiplier = lambda;
  }
  return out;
}

PlateField plate_substep(const PlateOperators& ops, const PlateField& old, const PlateVectorField& traction,
                         const PlateVectorField& G, double mu, double dt, bool nonlinear,
                         const PicardOptions& options) {
  PlateStepper stepper(ops, mu, dt, nonlinear, options);
  return stepper.step(old, traction, G);
}

}  // namespace fsilab
