#pragma once

#include <vector>

#include "apnn/phase_space.hpp"

namespace apnn {

/// Linear hyperbolic system dt m + sum_a A_a dx_a m = 0.
struct AcousticSystem {
  int dim = 1;
  std::vector<Mat> A;

  static AcousticSystem from_basis(const FluidBasis& basis);
  /// Plane waves along `axis` of a basis in any dimension: unknowns (rho, u_axis, T).
  static AcousticSystem reduced(const FluidBasis& basis, int axis);

  /// Characteristic speeds of the one-dimensional flux matrix along `axis`.
  Vec speeds(int axis) const;
  int count() const { return static_cast<int>(A.at(0).rows()); }
};

enum class AcousticMethod { spectral, upwind };

/// Solution of the acoustic system at each requested time, count x N_x per time.
/// spectral: exact exponential per Fourier mode; upwind: flux-split forward
/// Euler with dt = cfl * dx / max speed.
std::vector<Mat> solve_acoustic(const AcousticSystem& sys, const SpatialGrid& xg, const Mat& m0,
                                const std::vector<double>& times, AcousticMethod method = AcousticMethod::spectral,
                                double cfl = 0.5);

double acoustic_energy(const Mat& m, const SpatialGrid& xg);

}  // namespace apnn
