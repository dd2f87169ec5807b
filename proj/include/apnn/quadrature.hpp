#pragma once

#include <vector>

namespace apnn {

struct Rule1D {
  std::vector<double> nodes, weights;
};

/// Gauss-Legendre rule on [a, b]; weights sum to b - a.
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Points on the unit sphere S^{dim-1} with weights summing to its area
/// (2 for dim 1, 2 pi for dim 2, 4 pi for dim 3). Row-major: point s is
/// dirs[s*dim .. s*dim+dim).
struct SphereRule {
  int dim = 0;
  std::vector<double> dirs, weights;
  std::size_t size() const { return weights.size(); }
};
SphereRule sphere_rule(int dim, int n);

/// Uniform rule on the circle [0, 2 pi) with midpoints; weights sum to 2 pi.
Rule1D circle_rule(int n);

}  // namespace apnn
