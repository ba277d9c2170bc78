#include "fsilab/stokes.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <sstream>

namespace fsilab {
namespace {

enum class Edge1D { Dirichlet, HalfWall, Neumann };

// Symmetric 1-D second-difference matrix scaled by 1/h^2.
Eigen::MatrixXd second_difference(int n, double h, Edge1D kind) {
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    T(i, i) = 2.0;
    if (i > 0) T(i, i - 1) = -1.0;
    if (i + 1 < n) T(i, i + 1) = -1.0;
  }
  const double end = kind == Edge1D::Dirichlet ? 2.0 : (kind == Edge1D::HalfWall ? 3.0 : 1.0);
  T(0, 0) = end;
  T(n - 1, n - 1) = end;
  return T / (h * h);
}

// Fast diagonalization of a Kronecker sum of three symmetric 1-D matrices.
class TensorEigen {
 public:
  TensorEigen() = default;
  explicit TensorEigen(const std::array<Eigen::MatrixXd, 3>& mats) {
    for (int d = 0; d < 3; ++d) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats[d]);
      q_[d] = es.eigenvectors();
      lam_[d] = es.eigenvalues();
      n_[d] = int(mats[d].rows());
    }
  }

  Index size() const { return Index(n_[0]) * n_[1] * n_[2]; }

  // x <- Q diag(f(lambda)) Q^T x
  template <class F>
  void apply(double* x, F&& f) const {
    transform(x, true);
    Index idx = 0;
    for (int k = 0; k < n_[2]; ++k)
      for (int j = 0; j < n_[1]; ++j)
        for (int i = 0; i < n_[0]; ++i, ++idx) x[idx] *= f(lam_[0][i] + lam_[1][j] + lam_[2][k]);
    transform(x, false);
  }

 private:
  void transform(double* x, bool forward) const {
    const int n0 = n_[0], n1 = n_[1], n2 = n_[2];
    Eigen::MatrixXd tmp;
    {
      Eigen::Map<Eigen::MatrixXd> X(x, n0, Index(n1) * n2);
      tmp = forward ? Eigen::MatrixXd(q_[0].transpose() * X) : Eigen::MatrixXd(q_[0] * X);
      X = tmp;
    }
    for (int k = 0; k < n2; ++k) {
      Eigen::Map<Eigen::MatrixXd> X(x + Index(k) * n0 * n1, n0, n1);
      tmp = forward ? Eigen::MatrixXd(X * q_[1]) : Eigen::MatrixXd(X * q_[1].transpose());
      X = tmp;
    }
    {
      Eigen::Map<Eigen::MatrixXd> X(x, Index(n0) * n1, n2);
      tmp = forward ? Eigen::MatrixXd(X * q_[2]) : Eigen::MatrixXd(X * q_[2].transpose());
      X = tmp;
    }
  }

  std::array<Eigen::MatrixXd, 3> q_;
  std::array<Eigen::VectorXd, 3> lam_;
  std::array<int, 3> n_{};
};

double project_mean(Vec& x) {
  const double m = x.mean();
  x.array() -= m;
  return m;
}

}  // namespace

PlateVectorField top_to_nodes(const FluidGrid& fg, const PlateGrid& pg, const Vec& top) {
  ops::require_compatible(fg, pg);
  auto out = PlateVectorField::zeros(pg);
  const int nx = pg.nx(), ny = pg.ny();
  for (int q = 0; q < 3; ++q) {
    const auto& L = fg.component(q);
    const int k = L.ext[2] - 1;
    for (int j = 1; j < ny; ++j)
      for (int i = 1; i < nx; ++i) {
        double sum = 0.0;
        int count = 0;
        for (int b = j; b <= (q == 1 ? j : j + 1); ++b)
          for (int a = i; a <= (q == 0 ? i : i + 1); ++a) {
            sum += top[L.index(a, b, k)];
            ++count;
          }
        out.c[q][pg.node(i, j)] = sum / count;
      }
  }
  return out;
}

struct StokesWorkspace::Impl {
  FluidGrid grid;
  double nu;
  double inv_dt;
  StokesOptions options;
  std::array<TensorEigen, 3> velocity;
  std::array<Index, 4> block{};  // component offsets inside the interior list
  TensorEigen pressure;
  Eigen::SparseMatrix<double, Eigen::RowMajor> B;  // cells x positions
  Eigen::SparseMatrix<double, Eigen::RowMajor> BI;  // cells x interior

  Impl(const FluidGrid& g, double nu_, double inv_dt_, StokesOptions opts)
      : grid(g), nu(nu_), inv_dt(inv_dt_), options(opts) {
    if (!(nu > 0.0)) throw std::invalid_argument("viscosity nu must be positive");
    if (!(inv_dt >= 0.0)) throw std::invalid_argument("inverse time step must be nonnegative");
    for (int q = 0; q < 3; ++q) {
      std::array<Eigen::MatrixXd, 3> mats;
      for (int d = 0; d < 3; ++d)
        mats[d] = d == q ? second_difference(g.n(d) - 1, g.h(d), Edge1D::Dirichlet)
                         : second_difference(g.n(d), g.h(d), Edge1D::HalfWall);
      velocity[q] = TensorEigen(mats);
      block[q + 1] = block[q] + velocity[q].size();
    }
    if (block[3] != Index(g.interior().size())) throw std::logic_error("interior layout mismatch");
    std::array<Eigen::MatrixXd, 3> cells;
    for (int d = 0; d < 3; ++d) cells[d] = second_difference(g.n(d), g.h(d), Edge1D::Neumann);
    pressure = TensorEigen(cells);

    std::vector<Eigen::Triplet<double>> trip;
    ops::for_each_div_entry(g, [&](Index c, Index pos, double coef) { trip.emplace_back(c, pos, coef); });
    B.resize(g.num_cells(), g.num_positions());
    B.setFromTriplets(trip.begin(), trip.end());
    std::vector<Index> slot(g.num_positions(), -1);
    for (Index a = 0; a < Index(g.interior().size()); ++a) slot[g.interior()[a]] = a;
    std::vector<Eigen::Triplet<double>> tripI;
    for (const auto& t : trip)
      if (slot[t.col()] >= 0) tripI.emplace_back(t.row(), slot[t.col()], t.value());
    BI.resize(g.num_cells(), Index(g.interior().size()));
    BI.setFromTriplets(tripI.begin(), tripI.end());
  }

  Vec solve_velocity(const Vec& f) const {
    Vec x = f;
    const double vol = grid.cell_volume();
    for (int q = 0; q < 3; ++q)
      velocity[q].apply(x.data() + block[q], [&](double lam) { return 1.0 / (vol * (inv_dt + nu * lam)); });
    return x;
  }

  Vec precondition(const Vec& r) const {
    const double vol = grid.cell_volume();
    Vec out = (nu / vol) * r;
    if (inv_dt > 0.0) {
      Vec z = r;
      const double hmin = std::min({grid.h(0), grid.h(1), grid.h(2)});
      const double cut = 1e-8 / (hmin * hmin);
      pressure.apply(z.data(), [&](double lam) { return lam > cut ? 1.0 / (vol * lam) : 0.0; });
      out += inv_dt * z;
    }
    project_mean(out);
    return out;
  }

  Vec schur(const Vec& d) const { return BI * solve_velocity(BI.transpose() * d); }
};

StokesWorkspace::StokesWorkspace(const FluidGrid& grid, double nu, double inv_dt, StokesOptions options)
    : impl_(std::make_unique<Impl>(grid, nu, inv_dt, options)) {}
StokesWorkspace::~StokesWorkspace() = default;
StokesWorkspace::StokesWorkspace(StokesWorkspace&&) noexcept = default;
StokesWorkspace& StokesWorkspace::operator=(StokesWorkspace&&) noexcept = default;

const FluidGrid& StokesWorkspace::grid() const { return impl_->grid; }
double StokesWorkspace::nu() const { return impl_->nu; }
double StokesWorkspace::inv_dt() const { return impl_->inv_dt; }

FluidField StokesWorkspace::solve(const Vec& force, const Vec& v_old, const Vec& boundary, SolveStats* stats) const {
  const Impl& w = *impl_;
  const FluidGrid& g = w.grid;
  const Vec& m = g.masses();
  const auto& interior = g.interior();
  const Index nI = Index(interior.size());

  Vec b = boundary;
  for (Index pos : interior) b[pos] = 0.0;
  {
    double flux = 0.0;
    int count = 0;
    for (Index pos : g.top())
      if (g.decode(pos)[0] == 2) {
        flux += b[pos];
        ++count;
      }
    const double shift = flux / count;
    for (Index pos : g.top())
      if (g.decode(pos)[0] == 2) b[pos] -= shift;
  }

  Vec rhs_full = m.cwiseProduct(force);
  if (w.inv_dt > 0.0 && v_old.size() == rhs_full.size()) rhs_full += w.inv_dt * m.cwiseProduct(v_old);
  rhs_full -= w.nu * ops::laplacian_energy_gradient(g, b);
  Vec f(nI);
  for (Index a = 0; a < nI; ++a) f[a] = rhs_full[interior[a]];
  const Vec gvec = -(w.B * b);

  double vscale = b.cwiseAbs().maxCoeff();
  const double hmin = std::min({g.h(0), g.h(1), g.h(2)});
  const double vol = g.cell_volume();

  Vec p = Vec::Zero(g.num_cells());
  Vec vI = w.solve_velocity(f);
  vscale = std::max(vscale, vI.cwiseAbs().maxCoeff());
  auto tolerance = [&]() { return std::max(w.options.tol_div, 1e-14 * vscale / hmin); };

  int iterations = 0;
  double max_div = 0.0;
  for (int restart = 0; restart < 4; ++restart) {
    Vec r = gvec - w.BI * vI;
    project_mean(r);
    max_div = r.cwiseAbs().maxCoeff() / vol;
    if (max_div <= tolerance()) break;
    Vec z = w.precondition(r);
    Vec d = z;
    double rz = r.dot(z);
    Vec dp = Vec::Zero(g.num_cells());
    while (iterations < w.options.max_iter) {
      ++iterations;
      const Vec q = w.schur(d);
      const double dq = d.dot(q);
      if (!(dq > 0.0)) break;
      const double alpha = rz / dq;
      dp += alpha * d;
      r -= alpha * q;
      project_mean(r);
      if (r.cwiseAbs().maxCoeff() / vol <= 0.1 * tolerance()) break;
      z = w.precondition(r);
      const double rz_new = r.dot(z);
      d = z + (rz_new / rz) * d;
      rz = rz_new;
    }
    p += dp;
    vI = w.solve_velocity(f + w.BI.transpose() * p);
    vscale = std::max(vscale, vI.cwiseAbs().maxCoeff());
    if (iterations >= w.options.max_iter) {
      Vec rr = gvec - w.BI * vI;
      max_div = rr.cwiseAbs().maxCoeff() / vol;
      break;
    }
  }
  if (max_div > tolerance()) {
    std::ostringstream msg;
    msg << "Stokes pressure iteration did not converge: max |div v| = " << max_div << " after " << iterations
        << " iterations";
    throw SolverFailure(msg.str());
  }
  project_mean(p);

  FluidField out{b, p};
  for (Index a = 0; a < nI; ++a) out.v[interior[a]] = vI[a];
  if (stats) {
    stats->iterations = iterations;
    stats->max_div = ops::discrete_div(g, out.v).cwiseAbs().maxCoeff();
    const Vec R = reaction(out, v_old, force);
    double worst = 0.0;
    for (Index pos : interior) worst = std::max(worst, std::abs(R[pos]) / m[pos]);
    stats->momentum_residual = worst;
  }
  return out;
}

Vec StokesWorkspace::reaction(const FluidField& f, const Vec& v_old, const Vec& force) const {
  const Impl& w = *impl_;
  const Vec& m = w.grid.masses();
  Vec R = w.nu * ops::symmetric_gradient_apply(w.grid, f.v) - w.B.transpose() * f.p - m.cwiseProduct(force);
  if (w.inv_dt > 0.0) {
    if (v_old.size() == f.v.size())
      R += w.inv_dt * m.cwiseProduct(f.v - v_old);
    else
      R += w.inv_dt * m.cwiseProduct(f.v);
  }
  return R;
}

void require_zero_flux(const PlateGrid& pg, const PlateVectorField& psi) {
  const double flux = psi.c[2].sum() * pg.node_area();
  const double scale = std::max(1.0, psi.c[2].cwiseAbs().sum() * pg.node_area());
  if (std::abs(flux) > 1e-10 * scale) {
    std::ostringstream msg;
    msg << "plate normal velocity has nonzero mean (integral " << flux << ")";
    throw CompatibilityError(msg.str());
  }
}

Vec boundary_from_plate(const FluidGrid& fg, const PlateGrid& pg, const PlateVectorField& psi) {
  return ops::lift_to_topface(fg, pg, psi);
}

FluidField solve_stokes(const FluidGrid& fg, const PlateGrid& pg, double nu, const Vec& g,
                        const PlateVectorField& psi, const StokesOptions& options) {
  require_zero_flux(pg, psi);
  if (!g.allFinite()) throw std::invalid_argument("volume force must be finite");
  StokesWorkspace ws(fg, nu, 0.0, options);
  return ws.solve(g, Vec(), boundary_from_plate(fg, pg, psi));
}

FluidField lifting_N0(const FluidGrid& fg, const PlateGrid& pg, double nu, const PlateVectorField& psi,
                      const StokesOptions& options) {
  return solve_stokes(fg, pg, nu, Vec::Zero(fg.num_positions()), psi, options);
}

FluidField fluid_substep(const FluidGrid& fg, const PlateGrid& pg, double nu, const FluidField& v_old,
                         const PlateVectorField& boundary_velocity, const Vec& G_fl, double dt,
                         const StokesOptions& options) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  require_zero_flux(pg, boundary_velocity);
  StokesWorkspace ws(fg, nu, 1.0 / dt, options);
  return ws.solve(G_fl, v_old.v, boundary_from_plate(fg, pg, boundary_velocity));
}

PlateVectorField traction_Tf(const FluidGrid& fg, const PlateGrid& pg, double nu, const FluidField& f) {
  ops::require_compatible(fg, pg);
  const int nx = fg.n(0), ny = fg.n(1), nz = fg.n(2);
  const double hx = fg.h(0), hy = fg.h(1), hz = fg.h(2);
  const auto& L0 = fg.component(0);
  const auto& L1 = fg.component(1);
  const auto& L2 = fg.component(2);
  const Vec& v = f.v;
  Vec top = Vec::Zero(fg.num_positions());
  for (int J = 1; J <= ny; ++J)
    for (int i = 1; i < nx; ++i) {
      const double d3 = (8.0 * v[L0.index(i, J, nz + 1)] - 9.0 * v[L0.index(i, J, nz)] + v[L0.index(i, J, nz - 1)]) /
                        (3.0 * hz);
      const double d1 = (v[L2.index(i + 1, J, nz)] - v[L2.index(i, J, nz)]) / hx;
      top[L0.index(i, J, nz + 1)] = nu * (d3 + d1);
    }
  for (int j = 1; j < ny; ++j)
    for (int I = 1; I <= nx; ++I) {
      const double d3 = (8.0 * v[L1.index(I, j, nz + 1)] - 9.0 * v[L1.index(I, j, nz)] + v[L1.index(I, j, nz - 1)]) /
                        (3.0 * hz);
      const double d2 = (v[L2.index(I, j + 1, nz)] - v[L2.index(I, j, nz)]) / hy;
      top[L1.index(I, j, nz + 1)] = nu * (d3 + d2);
    }
  for (int J = 1; J <= ny; ++J)
    for (int I = 1; I <= nx; ++I) {
      const double d3 =
          (3.0 * v[L2.index(I, J, nz)] - 4.0 * v[L2.index(I, J, nz - 1)] + v[L2.index(I, J, nz - 2)]) / (2.0 * hz);
      const double p0 = 1.5 * f.p[fg.cell(I - 1, J - 1, nz - 1)] - 0.5 * f.p[fg.cell(I - 1, J - 1, nz - 2)];
      top[L2.index(I, J, nz)] = 2.0 * nu * d3 - p0;
    }
  return top_to_nodes(fg, pg, top);
}

Vec project_solenoidal(const FluidGrid& fg, const Vec& v) {
  std::array<Eigen::MatrixXd, 3> cells;
  for (int d = 0; d < 3; ++d) cells[d] = second_difference(fg.n(d), fg.h(d), Edge1D::Neumann);
  const TensorEigen poisson(cells);
  Vec vi = Vec::Zero(fg.num_positions());
  for (Index pos : fg.interior()) vi[pos] = v[pos];
  Vec bv = Vec::Zero(fg.num_cells());
  ops::for_each_div_entry(fg, [&](Index c, Index pos, double coef) { bv[c] += coef * vi[pos]; });
  const double vol = fg.cell_volume();
  const double hmin = std::min({fg.h(0), fg.h(1), fg.h(2)});
  const double cut = 1e-8 / (hmin * hmin);
  poisson.apply(bv.data(), [&](double lam) { return lam > cut ? 1.0 / (vol * lam) : 0.0; });
  Vec btp = Vec::Zero(fg.num_positions());
  ops::for_each_div_entry(fg, [&](Index c, Index pos, double coef) { btp[pos] += coef * bv[c]; });
  for (Index pos : fg.interior()) vi[pos] -= btp[pos] / vol;
  return vi;
}

PlateVectorField reaction_traction(const FluidGrid& fg, const PlateGrid& pg, const Vec& reaction) {
  Vec top = Vec::Zero(fg.num_positions());
  for (Index pos : fg.top()) top[pos] = reaction[pos];
  auto out = ops::lift_adjoint(fg, pg, top);
  for (auto& c : out.c) c /= pg.node_area();
  return out;
}

}  // namespace fsilab
