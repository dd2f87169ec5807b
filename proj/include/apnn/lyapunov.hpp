#pragma once

#include <string>
#include <vector>

#include "apnn/phase_space.hpp"

namespace apnn {

/// a1 |h|^2 + a2 |grad_x h|^2 + a3 |grad_v h_perp|^2 + a4 eps <grad_x h, grad_v h>.
struct LyapunovWeights {
  double a1 = 0, a2 = 0, a3 = 1, a4 = 1;

  /// Constructive choice: fix a3, a4, take eta = 2 a4 / a3, then a2 and a1
  /// just large enough for a positive lower bracket with unit margins.
  static LyapunovWeights defaults(double C_pi1, double a3 = 1.0, double a4 = 1.0, double margin = 1.0);
};

struct LyapunovTerms {
  double l2 = 0, grad_x = 0, grad_v_perp = 0, grad_v = 0, cross = 0;
  double value(const LyapunovWeights& w, double eps) const {
    return w.a1 * l2 + w.a2 * grad_x + w.a3 * grad_v_perp + w.a4 * eps * cross;
  }
  double h1() const { return l2 + grad_x + grad_v; }
};

/// Terms of one field with the finite-difference gradients of the phase-space module.
LyapunovTerms lyapunov_terms(const GridFunction& h, const FluidBasis& basis);

/// max |grad_v pi_L h|^2 / |pi_L h|^2 over the discrete fluid space.
double projection_gradient_constant(const FluidBasis& basis);

/// sum_i i^{2q} of the per-mode functional.
double lyapunov_functional(const std::vector<GridFunction>& modes, const FluidBasis& basis, double eps, int q,
                           const LyapunovWeights& w);
/// sum_i i^{2q} |h_i|_{H1}^2 with the same gradients.
double weighted_h1(const std::vector<GridFunction>& modes, const FluidBasis& basis, int q);

/// Eps-independent bracket c1 H1 <= E_perp <= c2 H1 valid for 0 < eps <= 1.
struct Bracket {
  double c1 = 0, c2 = 0, eta = 0;
  std::string to_json() const;
};
Bracket equivalence_bracket(const LyapunovWeights& w, double C_pi1);

}  // namespace apnn
