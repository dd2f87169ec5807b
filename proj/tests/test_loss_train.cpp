#include <doctest.h>

#include <filesystem>

#include "apnn/errors.hpp"
#include "apnn/exact_bgk.hpp"
#include "apnn/loss.hpp"
#include "apnn/train.hpp"
#include "common.hpp"

using namespace apnn;

namespace {

struct Desk {
  testing::Setup s{1, 24, 8.0, 2};
  MicroMacro mm{*s.basis, s.coupling, 1.0};
  FourierHermiteInit init = FourierHermiteInit::standard(1, 2, 0.1);
  LossAssembler la{mm, init, 3};
  CollocationConfig cc = [] {
    CollocationConfig c;
    c.n_interior = 16;
    c.n_initial = 8;
    c.n_boundary = 4;
    return c;
  }();
};

}  // namespace

TEST_CASE("the closed-form solution has a vanishing loss") {
  Desk d;
  ExactBgkSolution ex(*d.s.basis, d.s.coupling, 1.0, d.init);
  for (const auto vm : {VelocitySampling::grid, VelocitySampling::uniform}) {
    CollocationConfig c = d.cc;
    c.v_mode = vm;
    c.n_velocity = 24;
    const LossBreakdown lb = d.la.evaluate(ex, sample_collocation(c, 3));
    CHECK(lb.total < 1e-12);
  }
}

TEST_CASE("loss breakdown adds up") {
  Desk d;
  NetworkSpec ns;
  ns.width = 8;
  NetworkBundle nb(1, 2, ns);
  nb.init(1);
  const LossBreakdown lb = d.la.evaluate(nb, sample_collocation(d.cc, 4));
  CHECK(lb.total > 0);
  CHECK(lb.recomputed_total() == doctest::Approx(lb.total).epsilon(1e-12));
  CHECK(lb.weight[1] == doctest::Approx(64.0));
  for (const auto& r : lb.raw) CHECK(r.r1v == 0.0);
}

TEST_CASE("Adam minimises a quadratic") {
  AdamConfig ac;
  ac.lr = 0.05;
  Adam opt(3, ac);
  Vec x(3);
  x << 1.0, -2.0, 0.5;
  for (int k = 0; k < 2000; ++k) opt.step(x, 2 * x);
  CHECK(x.norm() < 1e-3);
  AdamConfig dc;
  dc.lr = 1.0;
  dc.lr_decay = 0.5;
  dc.decay_every = 10;
  Adam d(1, dc);
  Vec y = Vec::Zero(1);
  for (int k = 0; k < 20; ++k) d.step(y, Vec::Ones(1));
  CHECK(d.current_lr() == doctest::Approx(0.25));
}

TEST_CASE("short training lowers the loss and checkpoints round-trip") {
  Desk d;
  NetworkSpec ns;
  ns.width = 8;
  NetworkBundle nb(1, 2, ns);
  nb.init(2);
  TrainConfig tc;
  tc.steps = 40;
  tc.adam.lr = 3e-3;
  tc.collocation = d.cc;
  tc.checkpoint_steps = {0, 40};
  tc.config_hash = 77;
  const auto dir = std::filesystem::temp_directory_path() / "apnn_ckpt_test";
  std::filesystem::remove_all(dir);
  tc.checkpoint_dir = dir.string();
  const TrainState st = train(nb, d.la, tc);
  REQUIRE(st.loss_history.size() == 41);
  CHECK(st.loss_history.back() < st.loss_history.front());
  REQUIRE(st.checkpoints.size() == 2);
  CHECK(st.checkpoints[1].params == nb.params());
  const auto file = (dir / "ckpt_0000040.bin").string();
  const TrainState back = load_checkpoint(file, 77);
  CHECK(back.params == nb.params());
  CHECK(back.step == 40);
  CHECK_THROWS_AS(load_checkpoint(file, 78), IoError);
}

TEST_CASE("a diverging run is stopped") {
  Desk d;
  NetworkSpec ns;
  ns.width = 8;
  NetworkBundle nb(1, 2, ns);
  nb.init(2);
  TrainConfig tc;
  tc.steps = 5;
  tc.collocation = d.cc;
  tc.diverge_threshold = 1e-30;
  CHECK_THROWS_AS(train(nb, d.la, tc), DivergedLoss);
}
