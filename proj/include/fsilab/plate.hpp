/// @file plate.hpp
/// @brief Full von Karman plate: stress law, strains, elastic energy and its
///        exact discrete gradient, and the implicit plate sub-step.
///
/// Strains live on four quadrature samples per plate cell.  Sample (a, b) of
/// cell (i, j) takes x-differences along row j+a and y-differences along
/// column i+b, each with weight hx*hy/4.  Every elastic force in this module is
/// the exact negative gradient of the corresponding discrete energy.
#pragma once

#include "fsilab/grid.hpp"

#include <Eigen/Sparse>

namespace fsilab {

using SpMat = Eigen::SparseMatrix<double>;

/// Displacements u = (u1, u2, w) and velocities ut = (u1_t, u2_t, w_t).
struct PlateField {
  PlateVectorField u;
  PlateVectorField ut;

  static PlateField zeros(const PlateGrid& g) { return {PlateVectorField::zeros(g), PlateVectorField::zeros(g)}; }
  const Vec& w() const { return u.c[2]; }
  const Vec& wt() const { return ut.c[2]; }
};

struct SymTensorField2D {
  Vec e11, e12, e22;

  static SymTensorField2D zeros(Index n) { return {Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)}; }
  Index size() const { return e11.size(); }
};

/// Sparse difference operators shared by every plate computation.
class PlateOperators {
 public:
  explicit PlateOperators(const PlateGrid& grid);

  const PlateGrid& grid() const { return grid_; }
  Index num_samples() const { return grad_x_.rows(); }
  double sample_weight() const { return 0.25 * grid_.node_area(); }
  /// Scalar gradient at quadrature samples (samples x nodes).
  const SpMat& grad_x() const { return grad_x_; }
  const SpMat& grad_y() const { return grad_y_; }
  /// 5-point Laplacian with clamped reflection at every node (nodes x nodes).
  const SpMat& laplacian() const { return lap_; }

  /// Interior degrees of freedom, ordered (u1 | u2 | w) over grid().interior().
  Index num_dofs() const { return 3 * Index(grid_.interior().size()); }
  Index num_interior() const { return Index(grid_.interior().size()); }
  Vec to_dofs(const PlateVectorField& f) const;
  PlateVectorField from_dofs(const Vec& d) const;

 private:
  PlateGrid grid_;
  SpMat grad_x_, grad_y_, lap_;
};

void require_poisson_ratio(double mu);

/// C(eps) = 2/(1-mu) [mu tr(eps) I + (1-mu) eps], pointwise.
SymTensorField2D stress_C(const SymTensorField2D& eps, double mu);
/// P(u) = eps0(ubar) + 1/2 grad w (x) grad w at quadrature samples.
SymTensorField2D strain_P(const PlateOperators& ops, const PlateVectorField& u, bool nonlinear = true);
/// P(u, ut) = eps0(ubar_t) + 1/2 [grad w (x) grad w_t + grad w_t (x) grad w].
SymTensorField2D strain_rate_P(const PlateOperators& ops, const PlateVectorField& u, const PlateVectorField& ut,
                               bool nonlinear = true);
/// Quadrature of (C(A), B) over the plate.
double C_inner(const PlateOperators& ops, const SymTensorField2D& A, const SymTensorField2D& B, double mu);
/// Quadrature of (A, B) (Frobenius) over the plate.
double tensor_inner(const PlateOperators& ops, const SymTensorField2D& A, const SymTensorField2D& B);
/// grad a (x) grad b symmetrized: 1/2 [grad a (x) grad b + grad b (x) grad a].
SymTensorField2D grad_outer(const PlateOperators& ops, const Vec& a, const Vec& b);

struct VonKarmanForces {
  Vec transversal;              // div(N grad w), per unit area
  std::array<Vec, 2> in_plane;  // div N, per unit area
};
/// Membrane forces with N = C(P(u)); the negative membrane-energy gradient
/// divided by the node area, zero on the boundary ring.
VonKarmanForces vonkarman_forces(const PlateOperators& ops, const PlateVectorField& u, double mu,
                                 bool nonlinear = true);

struct PlateEnergy {
  double bending = 0.0;   // 1/2 |Lap w|^2
  double membrane = 0.0;  // 1/2 (C(P(u)), P(u))
  double total() const { return bending + membrane; }
};
PlateEnergy plate_energy(const PlateOperators& ops, const PlateVectorField& u, double mu, bool nonlinear = true);
/// Gradient of plate_energy with respect to every nodal displacement (3 x nodes, component-major).
Vec plate_energy_gradient(const PlateOperators& ops, const PlateVectorField& u, double mu, bool nonlinear = true);

struct CoercivityTerms {
  double bending = 0.0;       // |Lap w|^2
  double membrane = 0.0;      // (C(P(u)), P(u))
  double load = 0.0;          // (G, u)
  double norm_W_sq = 0.0;     // |w|_{H2}^2 + |u1|_{H1}^2 + |u2|_{H1}^2
  double lhs() const { return bending + membrane + load; }
  double ratio() const { return (bending + membrane) > 0.0 ? norm_W_sq / (bending + membrane) : 0.0; }
};
CoercivityTerms coercivity_probe(const PlateOperators& ops, const PlateVectorField& u, const PlateVectorField& G,
                                 double mu);

/// Hessian of the elastic energy at u = 0 on interior dofs.
SpMat assemble_K_lin(const PlateOperators& ops, double mu);
/// Nonlinear part of the elastic force on interior dofs: -grad E(u) + K_lin u.
Vec nonlinear_forces(const PlateOperators& ops, const SpMat& K_lin, const PlateVectorField& u, double mu);

struct PicardOptions {
  double tol = 1e-9;
  int max_iter = 50;
};

struct PlateStepStats {
  int picard_iterations = 0;
  double picard_residual = 0.0;
  double multiplier = 0.0;  // uniform pressure enforcing zero mean w_t
};

class PicardFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Implicit Euler in velocity:  M (z - z_old)/dt = -grad E(u_old + dt z) + A (G - T) + lambda e_w,
/// sum of z_w = 0.  The linear stiffness is factored once; the nonlinear part is
/// iterated by Picard.
class PlateStepper {
 public:
  PlateStepper(const PlateOperators& ops, double mu, double dt, bool nonlinear = true, PicardOptions options = {});

  /// traction and G are force densities at plate nodes.
  PlateField step(const PlateField& old, const PlateVectorField& traction, const PlateVectorField& G,
                  PlateStepStats* stats = nullptr) const;

  const PlateOperators& ops() const { return *ops_; }
  double dt() const { return dt_; }
  const SpMat& K_lin() const { return K_; }

 private:
  const PlateOperators* ops_;
  double mu_, dt_;
  bool nonlinear_;
  PicardOptions options_;
  SpMat K_;
  Eigen::SimplicialLDLT<SpMat> solver_;
  Vec s_;  // S^{-1} e_w
  double es_ = 0.0;
};

PlateField plate_substep(const PlateOperators& ops, const PlateField& old, const PlateVectorField& traction,
                         const PlateVectorField& G, double mu, double dt, bool nonlinear = true,
                         const PicardOptions& options = {});

}  // namespace fsilab
