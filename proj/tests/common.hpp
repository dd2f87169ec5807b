#pragma once

#include <memory>
#include <random>
#include <vector>

#include "apnn/collision.hpp"
#include "apnn/gpc.hpp"
#include "apnn/micro_macro.hpp"
#include "apnn/phase_space.hpp"

namespace apnn::testing {

/// Velocity grid, fluid basis and Galerkin coupling for small test problems.
struct Setup {
  std::shared_ptr<const VelocityGrid> vg;
  std::unique_ptr<FluidBasis> basis;
  KernelSpec spec;
  GpcBasis gpc;
  SgCoupling coupling;

  Setup(int dim, int nv, double vmax, int K, Backend backend = Backend::bgk, double b1_ratio = 0.05,
        double tol_gram = 1e-5) {
    vg = std::make_shared<const VelocityGrid>(dim, nv, vmax);
    basis = std::make_unique<FluidBasis>(vg, tol_gram);
    spec = KernelSpec::maxwell(dim);
    spec.b1 = {spec.b0[0] * b1_ratio};
    gpc = build_gpc_basis(K, spec.C_z);
    coupling = assemble_sg_coupling(spec, gpc, *basis, backend);
  }
};

inline Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

/// Random field scaled by sqrt(M) so it lives in the weighted space.
inline GridFunction random_field(std::shared_ptr<const SpatialGrid> xg, std::shared_ptr<const VelocityGrid> vg,
                                 std::mt19937_64& rng) {
  GridFunction h(xg, vg);
  h.data() = vg->root_maxwellian().asDiagonal() * random_mat(static_cast<Eigen::Index>(vg->size()),
                                                             static_cast<Eigen::Index>(xg->size()), rng);
  return h;
}

/// Smooth random field: a few Fourier modes in x times Hermite-like profiles in v.
inline GridFunction smooth_random_field(std::shared_ptr<const SpatialGrid> xg, std::shared_ptr<const VelocityGrid> vg,
                                        std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GridFunction h(xg, vg);
  const int d = xg->dim();
  for (int term = 0; term < 4; ++term) {
    int k[3] = {0, 0, 0};
    std::uniform_int_distribution<int> kd(-2, 2);
    for (int a = 0; a < d; ++a) k[a] = kd(rng);
    const double amp = n(rng), ph = n(rng);
    double c[4];
    for (double& ci : c) ci = n(rng);
    for (std::size_t ix = 0; ix < xg->size(); ++ix) {
      double arg = ph;
      for (int a = 0; a < d; ++a) arg += k[a] * xg->coord(ix, a);
      const double sx = amp * std::cos(arg);
      for (std::size_t j = 0; j < vg->size(); ++j) {
        const double v0 = vg->node(j, 0);
        const double p = c[0] + c[1] * v0 + c[2] * (v0 * v0 - 1) + c[3] * v0 * v0 * v0;
        h(ix, j) += sx * p * vg->maxwellian()(static_cast<Eigen::Index>(j));
      }
    }
  }
  return h;
}

inline MacroBlock random_macro(int count, Eigen::Index P, int dim, std::mt19937_64& rng) {
  MacroBlock m;
  m.val = random_mat(count, P, rng);
  m.dt = random_mat(count, P, rng);
  for (int a = 0; a < dim; ++a) m.dx.push_back(random_mat(count, P, rng));
  return m;
}

inline MicroBlock random_micro(const VelocityGrid& vg, Eigen::Index P, int dim, std::mt19937_64& rng) {
  const auto N = static_cast<Eigen::Index>(vg.size());
  auto weighted = [&] { return Mat(vg.root_maxwellian().asDiagonal() * random_mat(N, P, rng)); };
  MicroBlock g;
  g.val = weighted();
  g.dt = weighted();
  for (int a = 0; a < dim; ++a) g.dx.push_back(weighted());
  return g;
}

}  // namespace apnn::testing
