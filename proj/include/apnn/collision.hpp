#pragma once

#include <string>
#include <vector>

#include "apnn/phase_space.hpp"

namespace apnn {

/// Collision kernel B = C |rel|^gamma (b0(eta) + z b1(eta)), eta = cos(theta).
/// b0 and b1 are polynomials in eta given by their coefficients.
struct KernelSpec {
  double gamma = 0.0;
  double C = 1.0;
  std::vector<double> b0, b1;
  double C_z = 1.0;
  int q = 3;
  int n_angles = 16;

  double b0_at(double eta) const;
  double b1_at(double eta) const;
  /// Integral of b0 (resp. b1) against the angular measure used in `dim`.
  double angular_mass_b0(int dim) const;
  double angular_mass_b1(int dim) const;
  /// Throws KernelMarginViolated unless b0 >= (2^q + 2)|b1| C_z on a check grid.
  void check_margin(int n_check = 401) const;

  /// Maxwell-molecule kernel with unit angular mass.
  static KernelSpec maxwell(int dim);
};

/// Area of the angular set: 2 pi (dim 1 rotation angle, dim 2 circle), 4 pi (dim 3).
double angular_measure(int dim);

enum class Backend { bgk, boltzmann };
std::string to_string(Backend b);

struct CollisionMatrix {
  Backend backend = Backend::bgk;
  Mat L, K, Lambda;
  Vec nu;
  double sym_defect_raw = 0.0;  ///< before symmetrization
  long dropped = 0;             ///< collisions leaving the velocity box
  long sampled = 0;

  GridFunction apply(const GridFunction& h) const;
};

/// Collision frequency nu(v_j, z).
Vec collision_frequency(const KernelSpec& spec, const VelocityGrid& vgrid, double z);

CollisionMatrix assemble_bgk_surrogate(const FluidBasis& basis);

/// The b0 and b1 parts of the quadrature operator; L(z) = L0 + z L1.
struct BoltzmannParts {
  CollisionMatrix part0, part1;
};
BoltzmannParts assemble_boltzmann_parts(const KernelSpec& spec, const FluidBasis& basis);
CollisionMatrix assemble_boltzmann_matrix(const KernelSpec& spec, const FluidBasis& basis, double z);
CollisionMatrix combine(const CollisionMatrix& a, double ca, const CollisionMatrix& b, double cb);

/// Tensor quadratic Lagrange stencil of a point; returns false outside the box.
struct Stencil {
  int count = 0;
  int idx[27];
  double coef[27];
};
bool quadratic_stencil(const VelocityGrid& vg, const double* v, Stencil& st);
/// Dense interpolation matrix from grid values to arbitrary velocities (S x N).
Mat interpolation_matrix(const VelocityGrid& vg, const Mat& vel);

/// Discrete v-gradient along an axis (same stencil as grad_v), N x N.
Mat velocity_gradient_matrix(const VelocityGrid& vg, int axis);

struct HypoReport {
  std::string backend;
  double sym_defect = 0, sym_defect_raw = 0;
  int kernel_dim = 0;
  double kernel_residual = 0;
  double lambda_gap = 0;
  double nu[5] = {0, 0, 0, 0, 0};
  std::vector<std::pair<double, double>> K_reg;  ///< (delta, C(delta))
  double C_pi = 0, C_pi1 = 0, C_p = 1.0;
  double gamma = 0;
  long dropped = 0, sampled = 0;

  std::string to_json() const;
};

struct HypoOptions {
  double tol_kernel = 1e-6;
  std::vector<double> deltas = {1.0, 0.5, 0.1, 0.01};
};

HypoReport verify_hypocoercivity(const CollisionMatrix& L, const FluidBasis& basis, double gamma,
                                 const HypoOptions& opt = {});

void write_matrix_binary(const Mat& m, const std::string& path);

}  // namespace apnn
