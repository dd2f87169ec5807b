#include "apnn/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "apnn/collision.hpp"
#include "apnn/errors.hpp"

namespace apnn {

LyapunovWeights LyapunovWeights::defaults(double C_pi1, double a3, double a4, double margin) {
  if (!(a3 > 0) || !(a4 > 0) || !(margin > 0)) throw InvalidArgument("Lyapunov weights must be positive");
  LyapunovWeights w;
  w.a3 = a3;
  w.a4 = a4;
  const double eta = 2 * a4 / a3;
  w.a2 = a4 * eta / 2 + margin;
  w.a1 = a3 * C_pi1 + margin;
  return w;
}

LyapunovTerms lyapunov_terms(const GridFunction& h, const FluidBasis& basis) {
  LyapunovTerms t;
  const int d = h.xgrid().dim();
  const Projection pr = project_pi_L(h, basis);
  t.l2 = inner(h, h);
  std::vector<GridFunction> gx;
  for (int a = 0; a < d; ++a) {
    gx.push_back(grad_x(h, a));
    t.grad_x += inner(gx.back(), gx.back());
  }
  for (int b = 0; b < d; ++b) {
    const GridFunction gv = grad_v(h, b);
    const GridFunction gp = grad_v(pr.perp, b);
    t.grad_v += inner(gv, gv);
    t.grad_v_perp += inner(gp, gp);
    t.cross += inner(gx[static_cast<std::size_t>(b)], gv);
  }
  return t;
}

double projection_gradient_constant(const FluidBasis& basis) {
  const VelocityGrid& vg = basis.grid();
  const Vec& w = vg.weights();
  Mat G = Mat::Zero(basis.count(), basis.count());
  for (int b = 0; b < vg.dim(); ++b) {
    const Mat DE = velocity_gradient_matrix(vg, b) * basis.values();
    G += DE.transpose() * w.asDiagonal() * DE;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(0.5 * (G + G.transpose()), basis.gram());
  // slack for the Gram matrix deviating from the identity at round-off level
  return es.eigenvalues().maxCoeff() * (1 + 1e-6);
}

double lyapunov_functional(const std::vector<GridFunction>& modes, const FluidBasis& basis, double eps, int q,
                           const LyapunovWeights& w) {
  double s = 0;
  for (std::size_t i = 0; i < modes.size(); ++i)
    s += std::pow(static_cast<double>(i + 1), 2 * q) * lyapunov_terms(modes[i], basis).value(w, eps);
  return s;
}

double weighted_h1(const std::vector<GridFunction>& modes, const FluidBasis& basis, int q) {
  double s = 0;
  for (std::size_t i = 0; i < modes.size(); ++i)
    s += std::pow(static_cast<double>(i + 1), 2 * q) * lyapunov_terms(modes[i], basis).h1();
  return s;
}

Bracket equivalence_bracket(const LyapunovWeights& w, double C) {
  Bracket b;
  b.eta = 2 * w.a4 / w.a3;
  const double lo[3] = {w.a1 - w.a3 * C, w.a2 - w.a4 * b.eta / 2, w.a3 / 2 - w.a4 / (2 * b.eta)};
  const double hi[3] = {w.a1 + 2 * w.a3 * C, w.a2 + w.a4 * b.eta / 2, 2 * w.a3 + w.a4 / (2 * b.eta)};
  b.c1 = *std::min_element(lo, lo + 3);
  b.c2 = *std::max_element(hi, hi + 3);
  if (!(b.c1 > 0)) throw InvalidArgument("Lyapunov weights do not give a positive lower bracket");
  return b;
}

std::string Bracket::to_json() const {
  nlohmann::ordered_json j;
  j["c1"] = c1;
  j["c2"] = c2;
  j["eta"] = eta;
  return j.dump(2);
}

}  // namespace apnn
