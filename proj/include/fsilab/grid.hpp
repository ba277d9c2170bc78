/// @file grid.hpp
/// @brief Box geometry, the extended MAC fluid grid, the nodal plate grid and
///        the discrete differential operators shared by every other module.
///
/// Fluid velocities are stored on an *extended* staggered layout: every
/// component keeps its interior unknowns together with the positions that
/// carry Dirichlet data (side walls, bottom, and the top face x3 = 0 that is
/// attached to the plate).  Along its own axis a component lives on faces
/// (nodes 0..n); along the other two axes it lives on cell centres 1..n with
/// two extra wall positions 0 and n+1 sitting exactly on the boundary.
///
/// The plate is a nodal grid (nx+1)x(ny+1) whose outer ring is the clamped
/// boundary.  Plate nodes are linked to the fluid top face through a fixed
/// averaging map (lift) and its least-squares left inverse (trace).
#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fsilab {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;

struct BoxGeometry {
  double lx = 1.0;
  double ly = 1.0;
  double depth = 1.0;
  int nx = 8;
  int ny = 8;
  int nz = 8;
};

/// Throws std::invalid_argument when extents are nonpositive or a cell count is below 4.
void validate(const BoxGeometry& geometry);

enum class PositionKind : std::uint8_t { Interior, Top, Wall };

/// One velocity component on the extended staggered layout.
struct ComponentLayout {
  int comp = 0;
  std::array<int, 3> ext{};  // positions per axis
  Index offset = 0;

  Index size() const { return Index(ext[0]) * ext[1] * ext[2]; }
  Index index(int i, int j, int k) const {
    return offset + i + Index(ext[0]) * (j + Index(ext[1]) * k);
  }
};

class FluidGrid {
 public:
  explicit FluidGrid(const BoxGeometry& geometry);

  const BoxGeometry& geometry() const { return geometry_; }
  int n(int axis) const { return counts_[axis]; }
  double h(int axis) const { return spacing_[axis]; }
  double cell_volume() const { return spacing_[0] * spacing_[1] * spacing_[2]; }
  /// Face area normal to `axis`.
  double area(int axis) const { return cell_volume() / spacing_[axis]; }

  const ComponentLayout& component(int q) const { return layout_[q]; }
  Index num_positions() const { return num_positions_; }
  Index num_cells() const { return Index(counts_[0]) * counts_[1] * counts_[2]; }
  Index cell(int ci, int cj, int ck) const {
    return ci + Index(counts_[0]) * (cj + Index(counts_[1]) * ck);
  }

  /// Coordinate of position index `idx` of component q along `axis`.
  double coord(int q, int axis, int idx) const;
  /// Dual (control-volume) width of position `idx` of component q along `axis`.
  double dual_width(int q, int axis, int idx) const;
  /// Distance between positions idx and idx+1 of component q along `axis`.
  double gap(int q, int axis, int idx) const { return coord(q, axis, idx + 1) - coord(q, axis, idx); }

  PositionKind kind(Index pos) const { return kinds_[pos]; }
  /// Lumped mass (control volume) of every position; zero on walls and on
  /// tangential top positions, half a cell for the top normal faces.
  const Vec& masses() const { return masses_; }
  const std::vector<Index>& interior() const { return interior_; }
  const std::vector<Index>& top() const { return top_; }

  /// Decodes a global position into (component, i, j, k).
  std::array<int, 4> decode(Index pos) const;
  std::array<double, 3> point(Index pos) const;

  /// Samples a vector function f(x, y, z) -> component value at every position.
  template <class F>
  Vec sample(F&& f) const {
    Vec out(num_positions_);
    for (Index pos = 0; pos < num_positions_; ++pos) {
      const auto c = decode(pos);
      const auto x = point(pos);
      out[pos] = f(c[0], x[0], x[1], x[2]);
    }
    return out;
  }
  /// Samples a scalar function at cell centres.
  template <class F>
  Vec sample_cells(F&& f) const {
    Vec out(num_cells());
    for (int k = 0; k < counts_[2]; ++k)
      for (int j = 0; j < counts_[1]; ++j)
        for (int i = 0; i < counts_[0]; ++i)
          out[cell(i, j, k)] = f((i + 0.5) * spacing_[0], (j + 0.5) * spacing_[1],
                                 -geometry_.depth + (k + 0.5) * spacing_[2]);
    return out;
  }

 private:
  BoxGeometry geometry_;
  std::array<int, 3> counts_{};
  std::array<double, 3> spacing_{};
  std::array<ComponentLayout, 3> layout_{};
  Index num_positions_ = 0;
  std::vector<PositionKind> kinds_;
  Vec masses_;
  std::vector<Index> interior_;
  std::vector<Index> top_;
};

class PlateGrid {
 public:
  explicit PlateGrid(const BoxGeometry& geometry);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double lx() const { return nx_ * hx_; }
  double ly() const { return ny_ * hy_; }
  double area() const { return lx() * ly(); }
  double node_area() const { return hx_ * hy_; }

  Index num_nodes() const { return Index(nx_ + 1) * (ny_ + 1); }
  Index node(int i, int j) const { return i + Index(nx_ + 1) * j; }
  bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ || j == ny_; }
  const std::vector<Index>& interior() const { return interior_; }
  const std::vector<Index>& boundary() const { return boundary_; }
  /// Trapezoidal quadrature weights (hx*hy scaled, halved on edges, quartered on corners).
  const Vec& trapezoid() const { return trapezoid_; }

  template <class F>
  Vec sample(F&& f) const {
    Vec out(num_nodes());
    for (int j = 0; j <= ny_; ++j)
      for (int i = 0; i <= nx_; ++i) out[node(i, j)] = f(i * hx_, j * hy_);
    return out;
  }

  /// Padded copy with two ghost layers per side; index (i+2) + (nx+5)*(j+2).
  int padded_stride() const { return nx_ + 5; }

 private:
  int nx_, ny_;
  double hx_, hy_;
  std::vector<Index> interior_;
  std::vector<Index> boundary_;
  Vec trapezoid_;
};

std::pair<FluidGrid, PlateGrid> build_grids(const BoxGeometry& geometry);

/// Three-component field on plate nodes: (u1, u2, w) or (v1, v2, v3) traces.
struct PlateVectorField {
  std::array<Vec, 3> c;

  static PlateVectorField zeros(const PlateGrid& g) {
    PlateVectorField out;
    for (auto& x : out.c) x = Vec::Zero(g.num_nodes());
    return out;
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& x : c) m = std::max(m, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
    return m;
  }
};

namespace ops {

/// Conservative staggered divergence per cell.
Vec discrete_div(const FluidGrid& g, const Vec& v);
/// Pressure gradient at interior positions (zero elsewhere).
Vec discrete_grad_p(const FluidGrid& g, const Vec& p);
/// Componentwise 7-point Laplacian at interior positions, using the Dirichlet
/// values stored on wall/top positions (half-spacing next to the boundary).
Vec vector_laplacian(const FluidGrid& g, const Vec& v);
/// Gradient of the Laplacian energy 0.5*sum |grad v|^2 over every position.
Vec laplacian_energy_gradient(const FluidGrid& g, const Vec& v);

/// Symmetric-gradient bilinear form E(v, phi) = 1/2 sum_ij (v^j_i + v^i_j)(phi^j_i + phi^i_j).
double symmetric_gradient_form(const FluidGrid& g, const Vec& v, const Vec& phi);
/// Gradient of 0.5*E(v, v) with respect to every position value.
Vec symmetric_gradient_apply(const FluidGrid& g, const Vec& v);

/// Mass-weighted L2 inner product over all positions.
double fluid_inner(const FluidGrid& g, const Vec& a, const Vec& b);

/// Visits every Laplacian pair: f(pos_a, pos_b, coef) where the energy is 0.5*coef*(v_a - v_b)^2.
template <class F>
void for_each_laplacian_pair(const FluidGrid& g, F&& f);
/// Visits every divergence entry: f(cell, pos, coef) with (div v)_cell * vol = sum coef * v_pos.
template <class F>
void for_each_div_entry(const FluidGrid& g, F&& f);

/// Clamped ghost fill: copies w into a padded array, reflecting w about each
/// boundary edge (w_{-k} = w_{k}) so the centred normal derivative vanishes.
/// Corner ghosts average the two edge reflections.
std::vector<double> fill_clamped_ghosts(const PlateGrid& g, const Vec& w);
/// 13-point biharmonic stencil at interior nodes (zero on the boundary ring).
Vec biharmonic(const PlateGrid& g, const Vec& w);
/// 5-point Laplacian at every node with the clamped ghost fill.
Vec plate_laplacian(const PlateGrid& g, const Vec& w);

struct PlateNorms {
  double l2 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};
PlateNorms plate_norms(const PlateGrid& g, const Vec& scalar);

struct FluidNorms {
  double l2 = 0.0;
  double h1 = 0.0;
};
FluidNorms fluid_norms(const FluidGrid& g, const Vec& v);

/// Writes plate values into the fluid top positions (averaging map).
Vec lift_to_topface(const FluidGrid& fg, const PlateGrid& pg, const PlateVectorField& b);
/// Adjoint of the lift: accumulates top-position values onto plate nodes.
PlateVectorField lift_adjoint(const FluidGrid& fg, const PlateGrid& pg, const Vec& top_values);
/// Least-squares left inverse of the lift on interior plate nodes.
PlateVectorField trace_to_plate(const FluidGrid& fg, const PlateGrid& pg, const Vec& v);

/// Checks that the two grids were built from the same geometry.
void require_compatible(const FluidGrid& fg, const PlateGrid& pg);

}  // namespace ops
}  // namespace fsilab

#include "fsilab/detail/grid_visit.hpp"
