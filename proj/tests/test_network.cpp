#include <doctest.h>

#include <numbers>
#include <random>

#include "apnn/mlp.hpp"
#include "apnn/network.hpp"
#include "common.hpp"

using namespace apnn;

TEST_CASE("MLP input tangents match finite differences") {
  std::mt19937_64 rng(1);
  Mlp net(3, 8, 3, 2);
  std::vector<double> p(net.num_params());
  net.init(rng, p.data());
  const Mat X = testing::random_mat(3, 5, rng);
  std::vector<Mat> Xd = {Mat::Zero(3, 5)};
  Xd[0].row(1).setOnes();
  Mat Y;
  std::vector<Mat> Yd;
  net.forward(p.data(), X, Xd, Y, Yd, nullptr);
  const double h = 1e-6;
  Mat Xp = X, Xm = X, Yp, Ym;
  Xp.row(1).array() += h;
  Xm.row(1).array() -= h;
  std::vector<Mat> none;
  net.forward(p.data(), Xp, {}, Yp, none, nullptr);
  net.forward(p.data(), Xm, {}, Ym, none, nullptr);
  CHECK(((Yp - Ym) / (2 * h) - Yd[0]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("MLP parameter gradient of values and tangents") {
  std::mt19937_64 rng(2);
  Mlp net(2, 6, 2, 3);
  std::vector<double> p(net.num_params());
  net.init(rng, p.data());
  const Mat X = testing::random_mat(2, 4, rng);
  const std::vector<Mat> Xd = {testing::random_mat(2, 4, rng)};
  const Mat Yb = testing::random_mat(3, 4, rng);
  const std::vector<Mat> Ydb = {testing::random_mat(3, 4, rng)};
  auto functional = [&](const std::vector<double>& q) {
    Mat Y;
    std::vector<Mat> Yd;
    net.forward(q.data(), X, Xd, Y, Yd, nullptr);
    return (Yb.array() * Y.array()).sum() + (Ydb[0].array() * Yd[0].array()).sum();
  };
  Mat Y;
  std::vector<Mat> Yd;
  Mlp::Cache cache;
  net.forward(p.data(), X, Xd, Y, Yd, &cache);
  std::vector<double> g(net.num_params(), 0.0);
  net.backward(p.data(), cache, Yb, Ydb, g.data());
  for (std::size_t k = 0; k < p.size(); k += 3) {
    auto a = p, b = p;
    a[k] += 1e-6;
    b[k] -= 1e-6;
    CHECK(g[k] == doctest::Approx((functional(a) - functional(b)) / 2e-6).epsilon(1e-6));
  }
}

TEST_CASE("bundle fields are periodic in x and micro output decays in v") {
  NetworkSpec ns;
  ns.width = 8;
  NetworkBundle nb(1, 2, ns);
  nb.init(3);
  Mat tx(2, 2);
  tx << 0.2, 0.2, -std::numbers::pi, std::numbers::pi;
  MacroBlock m;
  nb.macro(1, tx, 0, m, false);
  CHECK((m.val.col(0) - m.val.col(1)).cwiseAbs().maxCoeff() < 1e-12);
  Mat vel(1, 2);
  vel << 0.0, 12.0;
  MicroBlock g;
  nb.micro(0, tx, vel, 0, g, false);
  CHECK(std::abs(g.val(1, 0)) < 1e-12);
}

TEST_CASE("initialisation is seeded") {
  NetworkSpec ns;
  NetworkBundle a(2, 2, ns), b(2, 2, ns), c(2, 2, ns);
  a.init(5);
  b.init(5);
  c.init(6);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());
  CHECK(a.num_params() == static_cast<std::size_t>(a.params().size()));
}
