#pragma once

#include <vector>

#include "apnn/gpc.hpp"
#include "apnn/phase_space.hpp"

namespace apnn {

/// Velocities at which micro fields are evaluated, with integration weights.
/// Moments are always taken on the quadrature grid; a set that is not the grid
/// only changes where the residual is sampled.
struct VelocitySet {
  Mat v;                   ///< dim x S
  Vec w;                   ///< integration weights
  Mat E;                   ///< S x count, phi_a M at v
  std::vector<Mat> Egrad;  ///< per axis, d/dv_b of phi_a M at v
  std::vector<Mat> T;      ///< per axis, diag(v_a) E - E A_a
  Mat interp;              ///< S x N quadratic interpolation (empty on the grid)
  bool is_grid = false;
  Eigen::Index size() const { return v.cols(); }
};

VelocitySet make_grid_set(const FluidBasis& basis);
VelocitySet make_velocity_set(const FluidBasis& basis, const Mat& v, const Vec& w, bool need_interp);
/// The set translated by delta along axis b.
VelocitySet shifted_set(const FluidBasis& basis, const VelocitySet& s, int b, double delta, bool need_interp);

/// Macro fields (count x P) and derivatives at P space-time points.
struct MacroBlock {
  Mat val, dt;
  std::vector<Mat> dx;
  void resize_zero(Eigen::Index rows, Eigen::Index cols, int dim);
};

/// Micro fields (S x P) at P space-time points and S velocities.
struct MicroBlock {
  Mat val, dt;
  std::vector<Mat> dx, dv;
  void resize_zero(Eigen::Index rows, Eigen::Index cols, int dim, bool with_dv);
};

/// Residual kernels of the micro-macro Galerkin system, with adjoints.
/// Micro inputs are raw network outputs; the fluid projection is removed
/// inside every kernel.
class MicroMacro {
 public:
  MicroMacro(const FluidBasis& basis, const SgCoupling& coupling, double eps);

  const FluidBasis& basis() const { return basis_; }
  const SgCoupling& coupling() const { return coupling_; }
  double eps() const { return eps_; }
  int dim() const { return basis_.dim(); }

  /// g - pi_L(g) for grid columns.
  Mat postprocess(const Mat& g_grid) const;

  Mat macro_residual(const MacroBlock& m, const MicroBlock& g_grid) const;
  void macro_residual_adjoint(const Mat& d1bar, MacroBlock& mbar, MicroBlock& ggbar) const;

  /// d2 of mode i sampled on `set`. g_grid[k] / g_set[k] hold every mode;
  /// when `set.is_grid` the two lists may alias.
  Mat micro_residual(int i, const MacroBlock& m, const std::vector<const MicroBlock*>& g_grid,
                     const std::vector<const MicroBlock*>& g_set, const VelocitySet& set) const;
  void micro_residual_adjoint(int i, const Mat& d2bar, const VelocitySet& set, MacroBlock& mbar,
                              const std::vector<MicroBlock*>& ggbar,
                              const std::vector<MicroBlock*>& gsbar) const;

  /// Assembled h = h~ + eps g on `set`. kind 0: value, 1+a: d/dx_a, 1+dim+b: d/dv_b.
  Mat assemble_h(int kind, const MacroBlock& m, const MicroBlock& g_grid, const MicroBlock& g_set,
                 const VelocitySet& set) const;
  void assemble_h_adjoint(int kind, const Mat& hbar, const VelocitySet& set, MacroBlock& mbar,
                          MicroBlock& ggbar, MicroBlock& gsbar) const;

  /// Throws ProjectionNotApplied when grid columns carry a fluid part.
  void check_projected(const Mat& g_grid, double tol) const;

 private:
  const FluidBasis& basis_;
  const SgCoupling& coupling_;
  double eps_;
  std::vector<Mat> F_;  ///< (diag(v_a) W E)^T
};

/// Right-hand side of the acoustic system, -sum_a A_a dm/dx_a.
Mat acoustic_rhs(const FluidBasis& basis, const std::vector<Mat>& m_dx);

/// A = -d1 . (phi M) - d2 on grid columns.
Mat recombine_residual(const Mat& d1, const Mat& d2, const FluidBasis& basis);

/// Full residual dt h + v . grad_x h - (1/eps) sum_k L_ik h_k on grid columns,
/// from dense node values (used as an independent oracle).
Mat full_residual(int i, const std::vector<Mat>& h_dt, const std::vector<std::vector<Mat>>& h_dx,
                  const std::vector<Mat>& h, const FluidBasis& basis, const SgCoupling& c, double eps);

}  // namespace apnn
