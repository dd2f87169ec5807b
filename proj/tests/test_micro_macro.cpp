#include <doctest.h>

#include "apnn/errors.hpp"
#include "apnn/micro_macro.hpp"
#include "common.hpp"

using namespace apnn;

namespace {

double dot(const MacroBlock& a, const MacroBlock& b) {
  double s = (a.val.array() * b.val.array()).sum() + (a.dt.array() * b.dt.array()).sum();
  for (std::size_t k = 0; k < a.dx.size(); ++k) s += (a.dx[k].array() * b.dx[k].array()).sum();
  return s;
}
double dot(const MicroBlock& a, const MicroBlock& b) {
  double s = (a.val.array() * b.val.array()).sum() + (a.dt.array() * b.dt.array()).sum();
  for (std::size_t k = 0; k < a.dx.size(); ++k) s += (a.dx[k].array() * b.dx[k].array()).sum();
  for (std::size_t k = 0; k < std::min(a.dv.size(), b.dv.size()); ++k) s += (a.dv[k].array() * b.dv[k].array()).sum();
  return s;
}

}  // namespace

TEST_CASE("post-processing removes the fluid part") {
  std::mt19937_64 rng(1);
  testing::Setup s(1, 24, 8.0, 2);
  MicroMacro mm(*s.basis, s.coupling, 0.1);
  const Mat g = testing::random_mat(24, 5, rng);
  const Mat p = mm.postprocess(g);
  CHECK((s.basis->weighted().transpose() * p).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_NOTHROW(mm.check_projected(p, 1e-10));
  CHECK_THROWS_AS(mm.check_projected(s.basis->values(), 1e-10), ProjectionNotApplied);
}

TEST_CASE("recombined residual equals minus the kinetic residual") {
  std::mt19937_64 rng(2);
  for (const Backend be : {Backend::bgk, Backend::boltzmann}) {
    testing::Setup s(1, 20, 7.0, 2, be);
    const double eps = 0.05;
    MicroMacro mm(*s.basis, s.coupling, eps);
    const VelocitySet grid = make_grid_set(*s.basis);
    const Mat& E = s.basis->values();
    std::vector<MacroBlock> m;
    std::vector<MicroBlock> g;
    for (int i = 0; i < 2; ++i) {
      m.push_back(testing::random_macro(3, 4, 1, rng));
      g.push_back(testing::random_micro(*s.vg, 4, 1, rng));
    }
    const std::vector<const MicroBlock*> gp = {&g[0], &g[1]};
    std::vector<Mat> h, ht;
    std::vector<std::vector<Mat>> hx;
    for (int i = 0; i < 2; ++i) {
      h.push_back(E * m[i].val + eps * mm.postprocess(g[i].val));
      ht.push_back(E * m[i].dt + eps * mm.postprocess(g[i].dt));
      hx.push_back({E * m[i].dx[0] + eps * mm.postprocess(g[i].dx[0])});
    }
    for (int i = 0; i < 2; ++i) {
      const Mat r = recombine_residual(mm.macro_residual(m[i], g[i]), mm.micro_residual(i, m[i], gp, gp, grid), *s.basis);
      const Mat A = full_residual(i, ht, hx, h, *s.basis, s.coupling, eps);
      CHECK((r + A).norm() <= 1e-12 * A.norm());
    }
  }
}

TEST_CASE("residual adjoints pass the dot-product test") {
  std::mt19937_64 rng(3);
  testing::Setup s(2, 13, 6.0, 2, Backend::bgk);
  MicroMacro mm(*s.basis, s.coupling, 0.3);
  const int P = 3, nm = 4;
  const auto N = static_cast<Eigen::Index>(s.vg->size());
  Mat vel = testing::random_mat(2, 6, rng);
  const VelocitySet set = make_velocity_set(*s.basis, vel, Vec::Constant(6, 0.1), true);
  MacroBlock m = testing::random_macro(nm, P, 2, rng);
  std::vector<MicroBlock> gg, gs;
  for (int k = 0; k < 2; ++k) {
    gg.push_back(testing::random_micro(*s.vg, P, 2, rng));
    MicroBlock b;
    b.val = testing::random_mat(6, P, rng);
    b.dt = testing::random_mat(6, P, rng);
    b.dx = {testing::random_mat(6, P, rng), testing::random_mat(6, P, rng)};
    gs.push_back(b);
  }
  const std::vector<const MicroBlock*> ggc = {&gg[0], &gg[1]}, gsc = {&gs[0], &gs[1]};

  // macro residual
  const Mat D1 = testing::random_mat(nm, P, rng);
  MacroBlock mb;
  mb.resize_zero(nm, P, 2);
  MicroBlock gb;
  gb.resize_zero(N, P, 2, false);
  mm.macro_residual_adjoint(D1, mb, gb);
  CHECK((D1.array() * mm.macro_residual(m, gg[0]).array()).sum() == doctest::Approx(dot(mb, m) + dot(gb, gg[0])));

  // micro residual on an off-grid set (affine only through linear terms)
  const Mat D2 = testing::random_mat(6, P, rng);
  mb.resize_zero(nm, P, 2);
  std::vector<MicroBlock> ggb(2), gsb(2);
  for (int k = 0; k < 2; ++k) {
    ggb[k].resize_zero(N, P, 2, false);
    gsb[k].resize_zero(6, P, 2, false);
  }
  mm.micro_residual_adjoint(1, D2, set, mb, {&ggb[0], &ggb[1]}, {&gsb[0], &gsb[1]});
  double rhs = dot(mb, m);
  for (int k = 0; k < 2; ++k) rhs += dot(ggb[k], gg[k]) + dot(gsb[k], gs[k]);
  CHECK((D2.array() * mm.micro_residual(1, m, ggc, gsc, set).array()).sum() == doctest::Approx(rhs));

  // assembled h, every kind
  for (int kind = 0; kind <= 4; ++kind) {
    MicroBlock ggv = gg[0], gsv = gs[0];
    if (kind > 2) {
      ggv.dv = {testing::random_mat(N, P, rng), testing::random_mat(N, P, rng)};
      gsv.dv = {testing::random_mat(6, P, rng), testing::random_mat(6, P, rng)};
    }
    const Mat H = testing::random_mat(6, P, rng);
    mb.resize_zero(nm, P, 2);
    MicroBlock a, b;
    a.resize_zero(N, P, 2, true);
    b.resize_zero(6, P, 2, true);
    mm.assemble_h_adjoint(kind, H, set, mb, a, b);
    CHECK((H.array() * mm.assemble_h(kind, m, ggv, gsv, set).array()).sum() ==
          doctest::Approx(dot(mb, m) + dot(a, ggv) + dot(b, gsv)));
  }
}

TEST_CASE("acoustic right-hand side uses the flux matrices") {
  testing::Setup s(1, 24, 8.0, 1);
  Mat mx = Mat::Zero(3, 1);
  mx(0, 0) = 1.0;  // density gradient drives velocity only
  const Mat r = acoustic_rhs(*s.basis, {mx});
  CHECK(std::abs(r(0, 0)) < 1e-12);
  CHECK(std::abs(r(2, 0)) < 1e-12);
  CHECK(r(1, 0) == doctest::Approx(-1.0).epsilon(1e-8));
}
