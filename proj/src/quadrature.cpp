#include "apnn/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "apnn/errors.hpp"

namespace apnn {

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre rule needs n >= 1");
  Rule1D r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Tricomi initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto k = static_cast<std::size_t>(n - 1 - i);
    r.nodes[k] = 0.5 * (b - a) * x + 0.5 * (b + a);
    r.weights[k] = 0.5 * (b - a) * w;
  }
  return r;
}

Rule1D circle_rule(int n) {
  Rule1D r;
  for (int m = 0; m < n; ++m) {
    r.nodes.push_back(2.0 * std::numbers::pi * (m + 0.5) / n);
    r.weights.push_back(2.0 * std::numbers::pi / n);
  }
  return r;
}

SphereRule sphere_rule(int dim, int n) {
  SphereRule s;
  s.dim = dim;
  if (dim == 1) {
    s.dirs = {-1.0, 1.0};
    s.weights = {1.0, 1.0};
  } else if (dim == 2) {
    const Rule1D c = circle_rule(n);
    for (std::size_t m = 0; m < c.nodes.size(); ++m) {
      s.dirs.push_back(std::cos(c.nodes[m]));
      s.dirs.push_back(std::sin(c.nodes[m]));
      s.weights.push_back(c.weights[m]);
    }
  } else if (dim == 3) {
    const int nt = std::max(2, n / 2);
    const Rule1D gl = gauss_legendre(nt);
    const Rule1D c = circle_rule(n);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double ct = gl.nodes[i], st = std::sqrt(1.0 - ct * ct);
      for (std::size_t m = 0; m < c.nodes.size(); ++m) {
        s.dirs.push_back(st * std::cos(c.nodes[m]));
        s.dirs.push_back(st * std::sin(c.nodes[m]));
        s.dirs.push_back(ct);
        s.weights.push_back(gl.weights[i] * c.weights[m]);
      }
    }
  } else {
    throw InvalidArgument("sphere rule dimension must be 1..3");
  }
  return s;
}

}  // namespace apnn
