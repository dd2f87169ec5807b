#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace apnn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Periodic tensor grid on [-pi, pi)^dim with n points per axis.
class SpatialGrid {
 public:
  SpatialGrid(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double spacing() const { return h_; }
  std::size_t size() const { return size_; }
  double cell_volume() const;
  /// Lebesgue measure of the torus, (2 pi)^dim.
  double measure() const;

  int index_along(std::size_t idx, int axis) const;
  double coord(std::size_t idx, int axis) const;
  std::size_t shift(std::size_t idx, int axis, int offset) const;

  bool operator==(const SpatialGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }

 private:
  int dim_, n_;
  double h_;
  std::size_t size_;
};

/// Uniform truncated velocity grid on [-vmax, vmax]^dim with a tensor
/// trapezoid rule. Flat index j = j0 + n*j1 + n^2*j2.
class VelocityGrid {
 public:
  VelocityGrid(int dim, int n, double vmax, double tol_mass = 1e-6);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double vmax() const { return vmax_; }
  double spacing() const { return dv_; }
  std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }

  const Mat& nodes() const { return nodes_; }  ///< dim x N
  double node(std::size_t j, int axis) const { return nodes_(axis, static_cast<Eigen::Index>(j)); }
  const Vec& weights() const { return weights_; }
  const Vec& maxwellian() const { return maxw_; }       ///< standard normal density
  const Vec& root_maxwellian() const { return root_; }  ///< its square root
  const Vec& speed() const { return speed_; }

  int index_along(std::size_t j, int axis) const;
  std::size_t shift(std::size_t j, int axis, int offset) const;
  /// Node values of a 1-D axis.
  double axis_node(int i) const { return -vmax_ + i * dv_; }

  bool operator==(const VelocityGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && vmax_ == o.vmax_;
  }

 private:
  int dim_, n_;
  double vmax_, dv_;
  Mat nodes_;
  Vec weights_, maxw_, root_, speed_;
};

double maxwellian(const double* v, int dim);
double root_maxwellian(const double* v, int dim);

/// Orthonormal basis {phi_a sqrt(M)} of the collision kernel, tabulated on a grid.
/// The analytic functions are orthonormalized once more against the grid
/// weights, so the discrete Gram matrix is the identity to round-off.
class FluidBasis {
 public:
  FluidBasis(std::shared_ptr<const VelocityGrid> vgrid, double tol_gram = 1e-8);

  int count() const { return dim_ + 2; }
  int dim() const { return dim_; }
  const VelocityGrid& grid() const { return *vgrid_; }
  std::shared_ptr<const VelocityGrid> grid_ptr() const { return vgrid_; }

  const Mat& values() const { return E_; }     ///< N x count, phi_a(v_j) M(v_j)
  const Mat& weighted() const { return WE_; }  ///< diag(w) * values
  const Mat& gram() const { return gram_; }
  /// Grid moment matrices A_a(b, c) = <v_a (phi_b M)(phi_c M)>.
  const std::vector<Mat>& flux_matrices() const { return flux_; }

  static double phi(int a, const double* v, int dim);
  /// phi_a M at arbitrary velocities (vel: dim x S) -> S x count.
  Mat eval(const Mat& vel) const;
  /// d/dv_b of phi_a M at arbitrary velocities -> S x count.
  Mat eval_grad(const Mat& vel, int b) const;

  /// Projector matrix P = E E^T W acting on node values.
  Mat projector() const;

 private:
  std::shared_ptr<const VelocityGrid> vgrid_;
  int dim_;
  Mat E_, WE_, gram_;
  Mat orth_;  ///< G0^{-1/2} of the raw basis
  std::vector<Mat> flux_;
};

/// Phase-space field stored as an (N_v x N_x) matrix: column = spatial node.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::shared_ptr<const SpatialGrid> xg, std::shared_ptr<const VelocityGrid> vg);
  GridFunction(std::shared_ptr<const SpatialGrid> xg, std::shared_ptr<const VelocityGrid> vg,
               Mat values);

  const SpatialGrid& xgrid() const { return *xg_; }
  const VelocityGrid& vgrid() const { return *vg_; }
  std::shared_ptr<const SpatialGrid> xgrid_ptr() const { return xg_; }
  std::shared_ptr<const VelocityGrid> vgrid_ptr() const { return vg_; }

  Mat& data() { return values_; }
  const Mat& data() const { return values_; }
  double operator()(std::size_t ix, std::size_t iv) const {
    return values_(static_cast<Eigen::Index>(iv), static_cast<Eigen::Index>(ix));
  }
  double& operator()(std::size_t ix, std::size_t iv) {
    return values_(static_cast<Eigen::Index>(iv), static_cast<Eigen::Index>(ix));
  }

  bool same_grids(const GridFunction& o) const;
  bool all_finite() const { return values_.allFinite(); }

 private:
  std::shared_ptr<const SpatialGrid> xg_;
  std::shared_ptr<const VelocityGrid> vg_;
  Mat values_;
};

/// Coefficients m = (rho, u, T) per spatial node, stored count x N_x.
struct FluidMoments {
  Mat coeffs;
  int dim = 1;
  double rho(std::size_t ix) const { return coeffs(0, static_cast<Eigen::Index>(ix)); }
  double u(std::size_t ix, int a) const { return coeffs(1 + a, static_cast<Eigen::Index>(ix)); }
  double T(std::size_t ix) const { return coeffs(dim + 1, static_cast<Eigen::Index>(ix)); }
};

struct Projection {
  FluidMoments moments;
  GridFunction fluid;
  GridFunction perp;
};

Projection project_pi_L(const GridFunction& h, const FluidBasis& basis);
GridFunction reconstruct(const FluidMoments& m, const FluidBasis& basis,
                         std::shared_ptr<const SpatialGrid> xg);

double inner(const GridFunction& a, const GridFunction& b);
double l2_norm(const GridFunction& h);
double lambda_norm(const GridFunction& h, double gamma);

/// Per spatial node the moments <v_a h phi_i M>; data row index i + count*a.
struct MacroFlux {
  int count = 0, dim = 0;
  Mat data;
  double operator()(std::size_t ix, int i, int a) const {
    return data(i + count * a, static_cast<Eigen::Index>(ix));
  }
};
MacroFlux macro_flux(const GridFunction& h, const FluidBasis& basis);

/// Central difference in x (periodic).
GridFunction grad_x(const GridFunction& h, int axis);
/// Central difference in v; second-order one-sided at the box faces.
GridFunction grad_v(const GridFunction& h, int axis);

struct H1Parts {
  double l2 = 0, grad_x = 0, grad_v = 0;
  double total() const { return l2 + grad_x + grad_v; }
};
/// Squared H1 norm with finite-difference gradients.
H1Parts h1_norm_sq(const GridFunction& h);
/// Squared H1 norm with externally supplied gradients.
H1Parts h1_norm_sq(const GridFunction& h, const std::vector<GridFunction>& gx,
                   const std::vector<GridFunction>& gv);

void write_csv(const GridFunction& h, const std::string& path);
void write_binary(const GridFunction& h, const std::string& path);
GridFunction read_binary(const std::string& path);

}  // namespace apnn
