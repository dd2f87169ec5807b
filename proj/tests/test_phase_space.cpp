#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "apnn/errors.hpp"
#include "apnn/phase_space.hpp"
#include "common.hpp"

using namespace apnn;

TEST_CASE("velocity grid integrates the Maxwellian moments") {
  for (int d = 1; d <= 3; ++d) {
    VelocityGrid vg(d, d == 3 ? 14 : 24, d == 3 ? 6.5 : 8.0);
    const Vec& w = vg.weights();
    CHECK(w.dot(vg.maxwellian()) == doctest::Approx(1.0).epsilon(1e-6));
    double second = 0;
    for (std::size_t j = 0; j < vg.size(); ++j) second += w(static_cast<Eigen::Index>(j)) * vg.node(j, 0) * vg.node(j, 0) * vg.maxwellian()(static_cast<Eigen::Index>(j));
    CHECK(second == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("a box too small for the Maxwellian is rejected") {
  CHECK_THROWS_AS(VelocityGrid(1, 16, 2.0), InvalidArgument);
}

TEST_CASE("fluid basis is orthonormal and its projector idempotent") {
  auto vg = std::make_shared<const VelocityGrid>(2, 16, 6.0);
  FluidBasis b(vg, 1e-5);
  CHECK(b.count() == 4);
  CHECK((b.gram() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-13);
  const Mat P = b.projector();
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
  // the tabulated values agree with evaluation at the nodes
  CHECK((b.eval(vg->nodes()) - b.values()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("coarse grids fail the Gram check") {
  auto vg = std::make_shared<const VelocityGrid>(1, 12, 6.0);
  CHECK_THROWS_AS(FluidBasis(vg, 1e-10), GramNotOrthonormal);
}

TEST_CASE("analytic basis gradient matches central differences") {
  auto vg = std::make_shared<const VelocityGrid>(2, 20, 8.0);
  FluidBasis b(vg);
  Mat v(2, 3);
  v << 0.3, -1.2, 2.0, 0.7, 0.1, -0.4;
  const double h = 1e-6;
  for (int a = 0; a < 2; ++a) {
    Mat vp = v, vm = v;
    vp.row(a).array() += h;
    vm.row(a).array() -= h;
    const Mat fd = (b.eval(vp) - b.eval(vm)) / (2 * h);
    CHECK((fd - b.eval_grad(v, a)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("projection: Pythagoras and idempotence on random fields") {
  std::mt19937_64 rng(1);
  auto vg = std::make_shared<const VelocityGrid>(1, 24, 8.0);
  auto xg = std::make_shared<const SpatialGrid>(1, 16);
  FluidBasis b(vg);
  for (int t = 0; t < 10; ++t) {
    const GridFunction h = testing::random_field(xg, vg, rng);
    const Projection p = project_pi_L(h, b);
    CHECK(inner(h, h) == doctest::Approx(inner(p.fluid, p.fluid) + inner(p.perp, p.perp)).epsilon(1e-12));
    const Projection q = project_pi_L(p.perp, b);
    CHECK(q.moments.coeffs.cwiseAbs().maxCoeff() < 1e-12);
    // reconstruct from moments gives the fluid part back
    const GridFunction r = reconstruct(p.moments, b, xg);
    CHECK((r.data() - p.fluid.data()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("central difference in x is second order") {
  auto vg = std::make_shared<const VelocityGrid>(1, 16, 6.0);
  double prev = 0;
  for (int n : {16, 32, 64}) {
    auto xg = std::make_shared<const SpatialGrid>(1, n);
    GridFunction h(xg, vg);
    for (std::size_t ix = 0; ix < xg->size(); ++ix)
      for (std::size_t j = 0; j < vg->size(); ++j) h(ix, j) = std::sin(xg->coord(ix, 0)) * vg->maxwellian()(static_cast<Eigen::Index>(j));
    const GridFunction g = grad_x(h, 0);
    double err = 0;
    for (std::size_t ix = 0; ix < xg->size(); ++ix)
      err = std::max(err, std::abs(g(ix, 8) - std::cos(xg->coord(ix, 0)) * vg->maxwellian()(8)));
    if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("spatial grid indexing wraps periodically") {
  SpatialGrid g(2, 8);
  CHECK(g.size() == 64);
  CHECK(g.measure() == doctest::Approx(4 * std::numbers::pi * std::numbers::pi));
  const std::size_t i = 7 + 8 * 3;
  CHECK(g.index_along(g.shift(i, 0, 1), 0) == 0);
  CHECK(g.index_along(g.shift(i, 1, -4), 1) == 7);
  CHECK(g.coord(0, 0) == doctest::Approx(-std::numbers::pi));
}

TEST_CASE("binary round trip and H1 parts") {
  std::mt19937_64 rng(2);
  auto vg = std::make_shared<const VelocityGrid>(1, 16, 6.0);
  auto xg = std::make_shared<const SpatialGrid>(1, 8);
  const GridFunction h = testing::random_field(xg, vg, rng);
  const auto path = (std::filesystem::temp_directory_path() / "apnn_gf.bin").string();
  write_binary(h, path);
  const GridFunction r = read_binary(path);
  CHECK(r.data() == h.data());
  const H1Parts p = h1_norm_sq(h);
  CHECK(p.l2 == doctest::Approx(inner(h, h)));
  CHECK(p.total() >= p.l2);
}
