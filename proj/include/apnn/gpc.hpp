#pragma once

#include <string>
#include <vector>

#include "apnn/collision.hpp"
#include "apnn/phase_space.hpp"
#include "apnn/quadrature.hpp"

namespace apnn {

/// Orthonormal polynomial chaos for z uniform on [-C_z, C_z].
struct GpcBasis {
  int K = 1;
  double C_z = 1.0;
  Mat coeffs;  ///< K x K, row i holds phi_{i+1} in powers of s = z / C_z
  Rule1D quad; ///< nodes in z, weights sum to 1
  double p_growth = 0.0;

  double eval(int i, double z) const;  ///< i is 0-based
  /// <z phi_i phi_k> under the probability measure.
  Mat zfactor() const;
};

GpcBasis build_gpc_basis(int K, double C_z);

/// Galerkin operators L_ik = delta_ik L0 + Zf_ik L1.
class SgCoupling {
 public:
  int K = 1;
  int q = 3;
  Backend backend = Backend::bgk;
  Mat zf;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> chi;
  Mat L0, L1;
  /// BGK only: L0 = c0 (P - I), L1 = c1 (P - I).
  double c0 = 0, c1 = 0;

  double scalar(int i, int k) const { return (i == k ? c0 : 0.0) + zf(i, k) * c1; }
  Mat block(int i, int k) const;
  /// out += alpha * L_ik g for grid-node columns g (N_v x P).
  void apply(int i, int k, const Mat& g, Mat& out, double alpha = 1.0) const;
};

SgCoupling assemble_sg_coupling(const KernelSpec& spec, const GpcBasis& gpc, const FluidBasis& basis,
                                Backend backend);

/// Kernel S_ik(eta) (angular factor times the z-average) by direct z-quadrature,
/// and by the closed form b0 delta_ik + b1 <z phi_i phi_k>.
double sg_kernel_quadrature(const KernelSpec& spec, const GpcBasis& gpc, int i, int k, double eta);
double sg_kernel_analytic(const KernelSpec& spec, const GpcBasis& gpc, int i, int k, double eta);

std::vector<GridFunction> sg_apply(const SgCoupling& c, const std::vector<GridFunction>& h);

/// sum_i i^{2q} |h_i|_{H1}^2 (mode index 1-based).
double energy_EK(const std::vector<H1Parts>& parts, int q);
bool q_admissible(int q, double p_growth);

void write_coupling_csv(const SgCoupling& c, const std::string& path);

}  // namespace apnn
