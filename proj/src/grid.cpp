#include "fsilab/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace fsilab {

void validate(const BoxGeometry& geometry) {
  if (!(geometry.lx > 0.0) || !(geometry.ly > 0.0) || !(geometry.depth > 0.0)) {
    throw std::invalid_argument("box extents lx, ly, depth must be positive");
  }
  if (geometry.nx < 4 || geometry.ny < 4 || geometry.nz < 4) {
    std::ostringstream msg;
    msg << "cell counts must be >= 4 (got " << geometry.nx << ", " << geometry.ny << ", "
        << geometry.nz << ")";
    throw std::invalid_argument(msg.str());
  }
}

FluidGrid::FluidGrid(const BoxGeometry& geometry) : geometry_(geometry) {
  validate(geometry);
  counts_ = {geometry.nx, geometry.ny, geometry.nz};
  spacing_ = {geometry.lx / geometry.nx, geometry.ly / geometry.ny, geometry.depth / geometry.nz};

  Index offset = 0;
  for (int q = 0; q < 3; ++q) {
    auto& L = layout_[q];
    L.comp = q;
    for (int d = 0; d < 3; ++d) L.ext[d] = (d == q) ? counts_[d] + 1 : counts_[d] + 2;
    L.offset = offset;
    offset += L.size();
  }
  num_positions_ = offset;

  kinds_.resize(num_positions_);
  masses_.resize(num_positions_);
  for (int q = 0; q < 3; ++q) {
    const auto& L = layout_[q];
    for (int k = 0; k < L.ext[2]; ++k)
      for (int j = 0; j < L.ext[1]; ++j)
        for (int i = 0; i < L.ext[0]; ++i) {
          const std::array<int, 3> idx{i, j, k};
          bool interior[3];
          for (int d = 0; d < 3; ++d) {
            const int last = L.ext[d] - 1;
            interior[d] = idx[d] > 0 && idx[d] < last;
          }
          const bool at_top = idx[2] == L.ext[2] - 1;
          const Index pos = L.index(i, j, k);
          if (interior[0] && interior[1] && interior[2]) {
            kinds_[pos] = PositionKind::Interior;
            interior_.push_back(pos);
          } else if (interior[0] && interior[1] && at_top) {
            kinds_[pos] = PositionKind::Top;
            top_.push_back(pos);
          } else {
            kinds_[pos] = PositionKind::Wall;
          }
          masses_[pos] = dual_width(q, 0, i) * dual_width(q, 1, j) * dual_width(q, 2, k);
        }
  }
}

double FluidGrid::coord(int q, int axis, int idx) const {
  const double lo = axis == 2 ? -geometry_.depth : 0.0;
  const double h = spacing_[axis];
  const int n = counts_[axis];
  if (axis == q) return lo + idx * h;
  if (idx == 0) return lo;
  if (idx == n + 1) return lo + n * h;
  return lo + (idx - 0.5) * h;
}

double FluidGrid::dual_width(int q, int axis, int idx) const {
  const double h = spacing_[axis];
  const int n = counts_[axis];
  if (axis == q) return (idx == 0 || idx == n) ? 0.5 * h : h;
  return (idx == 0 || idx == n + 1) ? 0.0 : h;
}

std::array<int, 4> FluidGrid::decode(Index pos) const {
  int q = 0;
  while (q < 2 && pos >= layout_[q + 1].offset) ++q;
  const auto& L = layout_[q];
  Index r = pos - L.offset;
  const int i = int(r % L.ext[0]);
  r /= L.ext[0];
  const int j = int(r % L.ext[1]);
  const int k = int(r / L.ext[1]);
  return {q, i, j, k};
}

std::array<double, 3> FluidGrid::point(Index pos) const {
  const auto c = decode(pos);
  return {coord(c[0], 0, c[1]), coord(c[0], 1, c[2]), coord(c[0], 2, c[3])};
}

PlateGrid::PlateGrid(const BoxGeometry& geometry) {
  validate(geometry);
  nx_ = geometry.nx;
  ny_ = geometry.ny;
  hx_ = geometry.lx / nx_;
  hy_ = geometry.ly / ny_;
  trapezoid_.resize(num_nodes());
  for (int j = 0; j <= ny_; ++j)
    for (int i = 0; i <= nx_; ++i) {
      const Index n = node(i, j);
      if (on_boundary(i, j))
        boundary_.push_back(n);
      else
        interior_.push_back(n);
      const double wx = (i == 0 || i == nx_) ? 0.5 : 1.0;
      const double wy = (j == 0 || j == ny_) ? 0.5 : 1.0;
      trapezoid_[n] = wx * wy * hx_ * hy_;
    }
}

std::pair<FluidGrid, PlateGrid> build_grids(const BoxGeometry& geometry) {
  return {FluidGrid(geometry), PlateGrid(geometry)};
}

namespace ops {
namespace {

// Strain-rate samples of the symmetric-gradient form.  Each sample is a
// linear combination of at most four positions; E(v, v) = sum weight * S(v)^2.
struct StrainSample {
  double weight;
  int count;
  Index idx[4];
  double coef[4];
};

template <class F>
void for_each_strain_sample(const FluidGrid& g, F&& f) {
  const double vol = g.cell_volume();
  // Normal strain rates at cell centres, weight 2 * volume.
  for (int ck = 0; ck < g.n(2); ++ck)
    for (int cj = 0; cj < g.n(1); ++cj)
      for (int ci = 0; ci < g.n(0); ++ci) {
        const std::array<int, 3> c{ci, cj, ck};
        for (int q = 0; q < 3; ++q) {
          std::array<int, 3> lo{ci + 1, cj + 1, ck + 1};
          lo[q] = c[q];
          std::array<int, 3> hi = lo;
          hi[q] += 1;
          const auto& L = g.component(q);
          StrainSample s{2.0 * vol, 2, {L.index(hi[0], hi[1], hi[2]), L.index(lo[0], lo[1], lo[2])},
                         {1.0 / g.h(q), -1.0 / g.h(q)}};
          f(s);
        }
      }
  // Shear rates on cell edges: S_ab = d_a v^b + d_b v^a.
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const int c = 3 - a - b;
      const auto& La = g.component(a);
      const auto& Lb = g.component(b);
      for (int pc = 1; pc <= g.n(c); ++pc)
        for (int ib = 0; ib <= g.n(b); ++ib)
          for (int ia = 0; ia <= g.n(a); ++ia) {
            const double weight = g.dual_width(a, a, ia) * g.dual_width(b, b, ib) * g.h(c);
            StrainSample s{weight, 4, {}, {}};
            // d_a v^b: component b, centre/wall positions ia and ia+1 along a.
            std::array<int, 3> p0{}, p1{};
            p0[a] = ia;
            p1[a] = ia + 1;
            p0[b] = p1[b] = ib;
            p0[c] = p1[c] = pc;
            const double sa = g.gap(b, a, ia);
            s.idx[0] = Lb.index(p1[0], p1[1], p1[2]);
            s.idx[1] = Lb.index(p0[0], p0[1], p0[2]);
            s.coef[0] = 1.0 / sa;
            s.coef[1] = -1.0 / sa;
            // d_b v^a: component a, centre/wall positions ib and ib+1 along b.
            std::array<int, 3> r0{}, r1{};
            r0[b] = ib;
            r1[b] = ib + 1;
            r0[a] = r1[a] = ia;
            r0[c] = r1[c] = pc;
            const double sb = g.gap(a, b, ib);
            s.idx[2] = La.index(r1[0], r1[1], r1[2]);
            s.idx[3] = La.index(r0[0], r0[1], r0[2]);
            s.coef[2] = 1.0 / sb;
            s.coef[3] = -1.0 / sb;
            f(s);
          }
    }
}

double eval(const StrainSample& s, const Vec& v) {
  double out = 0.0;
  for (int m = 0; m < s.count; ++m) out += s.coef[m] * v[s.idx[m]];
  return out;
}

// Pseudo-inverse of the 1-D node-to-position averaging map on interior nodes.
Eigen::MatrixXd averaging_pinv(int n, bool node_aligned) {
  if (node_aligned) return Eigen::MatrixXd::Identity(n - 1, n - 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n - 1);
  for (int I = 1; I <= n; ++I) {
    if (I - 1 >= 1) A(I - 1, I - 2) += 0.5;
    if (I <= n - 1) A(I - 1, I - 1) += 0.5;
  }
  return (A.transpose() * A).ldlt().solve(A.transpose());
}

// Plate-node weights feeding a fluid top position along one axis.
int axis_weights(int idx, int n, bool node_aligned, int nodes[2], double w[2]) {
  if (node_aligned) {
    nodes[0] = idx;
    w[0] = 1.0;
    return 1;
  }
  if (idx == 0) {
    nodes[0] = 0;
    w[0] = 1.0;
    return 1;
  }
  if (idx == n + 1) {
    nodes[0] = n;
    w[0] = 1.0;
    return 1;
  }
  nodes[0] = idx - 1;
  nodes[1] = idx;
  w[0] = w[1] = 0.5;
  return 2;
}

template <class F>
void for_each_lift_entry(const FluidGrid& fg, const PlateGrid& pg, F&& f) {
  for (Index pos : fg.top()) {
    const auto c = fg.decode(pos);
    int nxs[2], nys[2];
    double wx[2], wy[2];
    const int cx = axis_weights(c[1], pg.nx(), c[0] == 0, nxs, wx);
    const int cy = axis_weights(c[2], pg.ny(), c[0] == 1, nys, wy);
    for (int a = 0; a < cx; ++a)
      for (int b = 0; b < cy; ++b) f(c[0], pos, pg.node(nxs[a], nys[b]), wx[a] * wy[b]);
  }
}

}  // namespace

Vec discrete_div(const FluidGrid& g, const Vec& v) {
  Vec out = Vec::Zero(g.num_cells());
  for_each_div_entry(g, [&](Index c, Index pos, double coef) { out[c] += coef * v[pos]; });
  return out / g.cell_volume();
}

Vec discrete_grad_p(const FluidGrid& g, const Vec& p) {
  // grad = -M^{-1} B^T on interior positions.
  Vec out = Vec::Zero(g.num_positions());
  for_each_div_entry(g, [&](Index c, Index pos, double coef) { out[pos] -= coef * p[c]; });
  const Vec& m = g.masses();
  for (Index pos = 0; pos < g.num_positions(); ++pos)
    out[pos] = g.kind(pos) == PositionKind::Interior ? out[pos] / m[pos] : 0.0;
  return out;
}

Vec laplacian_energy_gradient(const FluidGrid& g, const Vec& v) {
  Vec out = Vec::Zero(g.num_positions());
  for_each_laplacian_pair(g, [&](Index a, Index b, double coef) {
    const double d = coef * (v[a] - v[b]);
    out[a] += d;
    out[b] -= d;
  });
  return out;
}

Vec vector_laplacian(const FluidGrid& g, const Vec& v) {
  Vec grad = laplacian_energy_gradient(g, v);
  const Vec& m = g.masses();
  Vec out = Vec::Zero(g.num_positions());
  for (Index pos : g.interior()) out[pos] = -grad[pos] / m[pos];
  return out;
}

double symmetric_gradient_form(const FluidGrid& g, const Vec& v, const Vec& phi) {
  double sum = 0.0;
  for_each_strain_sample(g, [&](const StrainSample& s) { sum += s.weight * eval(s, v) * eval(s, phi); });
  return sum;
}

Vec symmetric_gradient_apply(const FluidGrid& g, const Vec& v) {
  Vec out = Vec::Zero(g.num_positions());
  for_each_strain_sample(g, [&](const StrainSample& s) {
    const double val = s.weight * eval(s, v);
    for (int m = 0; m < s.count; ++m) out[s.idx[m]] += s.coef[m] * val;
  });
  return out;
}

double fluid_inner(const FluidGrid& g, const Vec& a, const Vec& b) {
  return (g.masses().array() * a.array() * b.array()).sum();
}

std::vector<double> fill_clamped_ghosts(const PlateGrid& g, const Vec& w) {
  const int nx = g.nx(), ny = g.ny();
  const int stride = g.padded_stride();
  std::vector<double> pad(std::size_t(stride) * (ny + 5), 0.0);
  auto at = [&](int i, int j) -> double& { return pad[std::size_t(i + 2) + std::size_t(stride) * (j + 2)]; };
  auto reflect = [](int i, int n) { return i < 0 ? -i : (i > n ? 2 * n - i : i); };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) at(i, j) = w[g.node(i, j)];
  for (int j = -2; j <= ny + 2; ++j)
    for (int i = -2; i <= nx + 2; ++i) {
      const bool out_x = i < 0 || i > nx;
      const bool out_y = j < 0 || j > ny;
      if (!out_x && !out_y) continue;
      if (out_x && out_y) {
        // Corner: average of the reflections across the x edge and the y edge.
        const double from_x = w[g.node(reflect(i, nx), reflect(j, ny))];
        const double from_y = w[g.node(reflect(i, nx), reflect(j, ny))];
        at(i, j) = 0.5 * (from_x + from_y);
      } else {
        at(i, j) = w[g.node(reflect(i, nx), reflect(j, ny))];
      }
    }
  return pad;
}

Vec plate_laplacian(const PlateGrid& g, const Vec& w) {
  const auto pad = fill_clamped_ghosts(g, w);
  const int stride = g.padded_stride();
  auto at = [&](int i, int j) { return pad[std::size_t(i + 2) + std::size_t(stride) * (j + 2)]; };
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  Vec out(g.num_nodes());
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      out[g.node(i, j)] = (at(i - 1, j) - 2.0 * at(i, j) + at(i + 1, j)) * ihx2 +
                          (at(i, j - 1) - 2.0 * at(i, j) + at(i, j + 1)) * ihy2;
  return out;
}

Vec biharmonic(const PlateGrid& g, const Vec& w) {
  const auto pad = fill_clamped_ghosts(g, w);
  const int stride = g.padded_stride();
  auto at = [&](int i, int j) { return pad[std::size_t(i + 2) + std::size_t(stride) * (j + 2)]; };
  const double hx = g.hx(), hy = g.hy();
  const double ax = 1.0 / (hx * hx * hx * hx), ay = 1.0 / (hy * hy * hy * hy);
  const double axy = 2.0 / (hx * hx * hy * hy);
  Vec out = Vec::Zero(g.num_nodes());
  for (int j = 1; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) {
      const double dxxxx = at(i - 2, j) - 4.0 * at(i - 1, j) + 6.0 * at(i, j) - 4.0 * at(i + 1, j) + at(i + 2, j);
      const double dyyyy = at(i, j - 2) - 4.0 * at(i, j - 1) + 6.0 * at(i, j) - 4.0 * at(i, j + 1) + at(i, j + 2);
      const double dxxyy = at(i - 1, j - 1) + at(i + 1, j - 1) + at(i - 1, j + 1) + at(i + 1, j + 1) -
                           2.0 * (at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1)) + 4.0 * at(i, j);
      out[g.node(i, j)] = ax * dxxxx + ay * dyyyy + axy * dxxyy;
    }
  return out;
}

PlateNorms plate_norms(const PlateGrid& g, const Vec& f) {
  const Vec& tw = g.trapezoid();
  const double l2sq = (tw.array() * f.array().square()).sum();
  double grad = 0.0, mixed = 0.0;
  const double hx = g.hx(), hy = g.hy();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double f00 = f[g.node(i, j)], f10 = f[g.node(i + 1, j)];
      const double f01 = f[g.node(i, j + 1)], f11 = f[g.node(i + 1, j + 1)];
      const double dxb = (f10 - f00) / hx, dxt = (f11 - f01) / hx;
      const double dyl = (f01 - f00) / hy, dyr = (f11 - f10) / hy;
      grad += 0.5 * hx * hy * (dxb * dxb + dxt * dxt + dyl * dyl + dyr * dyr);
      const double fxy = (f11 - f10 - f01 + f00) / (hx * hy);
      mixed += hx * hy * fxy * fxy;
    }
  const auto pad = fill_clamped_ghosts(g, f);
  const int stride = g.padded_stride();
  auto at = [&](int i, int j) { return pad[std::size_t(i + 2) + std::size_t(stride) * (j + 2)]; };
  double second = 0.0;
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      const double fxx = (at(i - 1, j) - 2.0 * at(i, j) + at(i + 1, j)) / (hx * hx);
      const double fyy = (at(i, j - 1) - 2.0 * at(i, j) + at(i, j + 1)) / (hy * hy);
      second += tw[g.node(i, j)] * (fxx * fxx + fyy * fyy);
    }
  PlateNorms out;
  out.l2 = std::sqrt(l2sq);
  out.h1 = std::sqrt(l2sq + grad);
  out.h2 = std::sqrt(l2sq + grad + second + 2.0 * mixed);
  return out;
}

FluidNorms fluid_norms(const FluidGrid& g, const Vec& v) {
  const double l2sq = fluid_inner(g, v, v);
  double grad = 0.0;
  for_each_laplacian_pair(g, [&](Index a, Index b, double coef) {
    const double d = v[a] - v[b];
    grad += coef * d * d;
  });
  return {std::sqrt(l2sq), std::sqrt(l2sq + grad)};
}

void require_compatible(const FluidGrid& fg, const PlateGrid& pg) {
  const auto& geo = fg.geometry();
  if (fg.n(0) != pg.nx() || fg.n(1) != pg.ny() || std::abs(fg.h(0) - pg.hx()) > 1e-14 * geo.lx ||
      std::abs(fg.h(1) - pg.hy()) > 1e-14 * geo.ly) {
    throw std::invalid_argument("fluid and plate grids were built from different geometries");
  }
}

Vec lift_to_topface(const FluidGrid& fg, const PlateGrid& pg, const PlateVectorField& b) {
  require_compatible(fg, pg);
  Vec out = Vec::Zero(fg.num_positions());
  for_each_lift_entry(fg, pg, [&](int q, Index pos, Index node, double w) { out[pos] += w * b.c[q][node]; });
  return out;
}

PlateVectorField lift_adjoint(const FluidGrid& fg, const PlateGrid& pg, const Vec& top_values) {
  require_compatible(fg, pg);
  auto out = PlateVectorField::zeros(pg);
  for_each_lift_entry(fg, pg,
                      [&](int q, Index pos, Index node, double w) { out.c[q][node] += w * top_values[pos]; });
  for (auto& comp : out.c)
    for (Index n : pg.boundary()) comp[n] = 0.0;
  return out;
}

PlateVectorField trace_to_plate(const FluidGrid& fg, const PlateGrid& pg, const Vec& v) {
  require_compatible(fg, pg);
  auto out = PlateVectorField::zeros(pg);
  const int nx = pg.nx(), ny = pg.ny();
  for (int q = 0; q < 3; ++q) {
    const bool xn = q == 0, yn = q == 1;
    const int mx = xn ? nx - 1 : nx;
    const int my = yn ? ny - 1 : ny;
    Eigen::MatrixXd T(mx, my);
    const auto& L = fg.component(q);
    const int ktop = L.ext[2] - 1;
    for (int b = 0; b < my; ++b)
      for (int a = 0; a < mx; ++a) T(a, b) = v[L.index(a + 1, b + 1, ktop)];
    const Eigen::MatrixXd Px = averaging_pinv(nx, xn);
    const Eigen::MatrixXd Py = averaging_pinv(ny, yn);
    const Eigen::MatrixXd P = Px * T * Py.transpose();
    for (int j = 1; j < ny; ++j)
      for (int i = 1; i < nx; ++i) out.c[q][pg.node(i, j)] = P(i - 1, j - 1);
  }
  return out;
}

}  // namespace ops
}  // namespace fsilab
