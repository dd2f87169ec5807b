#include <doctest.h>

#include <random>

#include "apnn/collision.hpp"
#include "apnn/errors.hpp"
#include "common.hpp"

using namespace apnn;

TEST_CASE("BGK surrogate has the exact hypocoercivity constants") {
  testing::Setup s(2, 16, 6.0, 1);
  const CollisionMatrix L = assemble_bgk_surrogate(*s.basis);
  const HypoReport r = verify_hypocoercivity(L, *s.basis, 0.0);
  CHECK(r.sym_defect < 1e-12);
  CHECK(r.kernel_dim == 4);
  CHECK(r.lambda_gap == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.nu[0] == doctest::Approx(1.0));
  CHECK(r.nu[1] == doctest::Approx(1.0));
  CHECK(r.nu[2] == doctest::Approx(1.0));
  CHECK(r.C_p == 1.0);
}

TEST_CASE("quadrature collision operator conserves and dissipates") {
  testing::Setup s(1, 32, 8.0, 1, Backend::boltzmann, 0.0);
  const CollisionMatrix L = assemble_boltzmann_matrix(s.spec, *s.basis, 0.0);
  const Vec& w = s.vg->weights();
  // conservation: L(phi_a M) ~ 0 and <L h, phi_a M> ~ 0
  CHECK((L.L * s.basis->values()).cwiseAbs().maxCoeff() < 1e-6);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vec h = s.vg->root_maxwellian().cwiseProduct(testing::random_mat(w.size(), 1, rng).col(0));
    const Vec Lh = L.L * h;
    CHECK(w.dot(Lh.cwiseProduct(h)) <= 1e-12);
    CHECK((s.basis->weighted().transpose() * Lh).cwiseAbs().maxCoeff() < 1e-6 * std::sqrt(w.dot(h.cwiseAbs2())));
  }
  const HypoReport r = verify_hypocoercivity(L, *s.basis, 0.0);
  CHECK(r.kernel_dim == 3);
  CHECK(r.lambda_gap > 0);
  CHECK(r.sym_defect < 1e-12);
}

TEST_CASE("the z-dependent operator is affine in z") {
  testing::Setup s(1, 24, 8.0, 1, Backend::boltzmann, 0.05);
  const BoltzmannParts p = assemble_boltzmann_parts(s.spec, *s.basis);
  const CollisionMatrix Lz = assemble_boltzmann_matrix(s.spec, *s.basis, 0.7);
  const CollisionMatrix C = combine(p.part0, 1.0, p.part1, 0.7);
  CHECK((Lz.L - C.L).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("collision frequency is positive and kernel margin is enforced") {
  testing::Setup s(1, 24, 8.0, 1);
  const Vec nu = collision_frequency(s.spec, *s.vg, 0.3);
  CHECK(nu.minCoeff() > 0);
  KernelSpec bad = s.spec;
  bad.b1 = {bad.b0[0]};  // |b1| C_z (2^q + 2) > b0
  CHECK_THROWS_AS(bad.check_margin(), KernelMarginViolated);
  CHECK_NOTHROW(s.spec.check_margin());
}

TEST_CASE("quadratic interpolation reproduces quadratics") {
  auto vg = std::make_shared<const VelocityGrid>(2, 12, 5.5);
  Mat v(2, 4);
  v << 0.13, -2.2, 3.9, 0.0, 1.7, 0.4, -3.3, 0.01;
  const Mat I = interpolation_matrix(*vg, v);
  Vec f(static_cast<Eigen::Index>(vg->size()));
  for (std::size_t j = 0; j < vg->size(); ++j) {
    const double a = vg->node(j, 0), b = vg->node(j, 1);
    f(static_cast<Eigen::Index>(j)) = 1 + a - 2 * b + a * b + 0.5 * a * a;
  }
  const Vec g = I * f;
  for (int s = 0; s < 4; ++s) {
    const double a = v(0, s), b = v(1, s);
    CHECK(g(s) == doctest::Approx(1 + a - 2 * b + a * b + 0.5 * a * a).epsilon(1e-12));
  }
}
