#include <doctest.h>

#include "apnn/gpc.hpp"
#include "common.hpp"

using namespace apnn;

TEST_CASE("chaos basis is orthonormal under the uniform measure") {
  const GpcBasis g = build_gpc_basis(6, 1.0);
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 6; ++k) {
      double s = 0;
      for (std::size_t n = 0; n < g.quad.nodes.size(); ++n) s += g.quad.weights[n] * g.eval(i, g.quad.nodes[n]) * g.eval(k, g.quad.nodes[n]);
      CHECK(s == doctest::Approx(i == k ? 1.0 : 0.0).epsilon(1e-12));
    }
  CHECK(g.eval(0, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("z factor is symmetric and tridiagonal") {
  const GpcBasis g = build_gpc_basis(7, 2.0);
  const Mat Z = g.zfactor();
  CHECK((Z - Z.transpose()).cwiseAbs().maxCoeff() < 1e-13);
  for (int i = 0; i < 7; ++i)
    for (int k = 0; k < 7; ++k)
      if (std::abs(i - k) != 1) CHECK(std::abs(Z(i, k)) < 1e-13);
  // Legendre recurrence: <z P_i P_{i+1}> = C_z (i+1) / sqrt((2i+1)(2i+3))
  for (int i = 0; i + 1 < 7; ++i)
    CHECK(std::abs(Z(i, i + 1)) == doctest::Approx(2.0 * (i + 1) / std::sqrt((2.0 * i + 1) * (2.0 * i + 3))));
}

TEST_CASE("Galerkin kernel: closed form equals quadrature") {
  KernelSpec k = KernelSpec::maxwell(2);
  k.b0 = {0.1, 0.03};
  k.b1 = {0.01};
  const GpcBasis g = build_gpc_basis(4, 1.0);
  for (double eta : {-1.0, -0.3, 0.0, 0.8})
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(sg_kernel_analytic(k, g, i, j, eta) == doctest::Approx(sg_kernel_quadrature(k, g, i, j, eta)).epsilon(1e-12));
}

TEST_CASE("coupling reduces to the deterministic operator for K = 1") {
  testing::Setup s(1, 24, 8.0, 1, Backend::bgk, 0.0);
  const Mat P = s.basis->projector();
  CHECK((s.coupling.block(0, 0) - (P - Mat::Identity(P.rows(), P.cols()))).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.coupling.chi(0, 0));
}

TEST_CASE("the Galerkin collision operator is dissipative as a whole") {
  // sum_ik <L_ik h_k, h_i> <= 0 whenever the margin condition holds
  testing::Setup s(1, 24, 8.0, 4, Backend::bgk, 0.05);
  std::mt19937_64 rng(8);
  auto xg = std::make_shared<const SpatialGrid>(1, 4);
  for (int t = 0; t < 20; ++t) {
    std::vector<GridFunction> h;
    for (int i = 0; i < 4; ++i) h.push_back(testing::random_field(xg, s.vg, rng));
    const auto Lh = sg_apply(s.coupling, h);
    double q = 0;
    for (int i = 0; i < 4; ++i) q += inner(Lh[i], h[i]);
    CHECK(q <= 1e-12);
  }
}

TEST_CASE("weighted energy and q admissibility") {
  std::vector<H1Parts> p(3);
  for (auto& x : p) x.l2 = 1.0;
  CHECK(energy_EK(p, 1) == doctest::Approx(1 + 4 + 9));
  CHECK(q_admissible(3, 0.5));
  CHECK_FALSE(q_admissible(2, 0.5));
}
