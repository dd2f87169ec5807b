#include "apnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "apnn/errors.hpp"

namespace apnn {

Adam::Adam(std::size_t n, const AdamConfig& cfg)
    : cfg_(cfg), m_(Vec::Zero(static_cast<Eigen::Index>(n))), v_(Vec::Zero(static_cast<Eigen::Index>(n))) {
  if (cfg.lr < 0) throw InvalidArgument("learning rate must be nonnegative");
  if (cfg.decay_every < 1) throw InvalidArgument("decay_every must be positive");
}

double Adam::current_lr() const {
  return cfg_.lr * std::pow(cfg_.lr_decay, static_cast<double>(t_ / cfg_.decay_every));
}

void Adam::step(Vec& params, const Vec& grad) {
  const double lr = current_lr();
  ++t_;
  m_ = cfg_.beta1 * m_ + (1 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1 - cfg_.beta2) * grad.cwiseAbs2();
  const double bc1 = 1 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -= lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.eps);
}

TrainState train(NetworkBundle& bundle, const LossAssembler& loss, const TrainConfig& cfg, const StepHook& hook) {
  if (cfg.steps < 0) throw InvalidArgument("steps must be nonnegative");
  Adam opt(bundle.num_params(), cfg.adam);
  TrainState st;
  st.seed = cfg.seed;
  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    if (!log) throw IoError("cannot open " + cfg.log_path);
  }
  if (!cfg.checkpoint_dir.empty()) std::filesystem::create_directories(cfg.checkpoint_dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t batch_seed = cfg.seed;
  CollocationBatch batch = sample_collocation(cfg.collocation, batch_seed);
  Vec grad(bundle.params().size());

  auto take_checkpoint = [&](int step, double value) {
    Checkpoint c;
    c.step = step;
    c.loss = value;
    c.params = bundle.params();
    st.checkpoints.push_back(c);
    if (!cfg.checkpoint_dir.empty()) {
      TrainState tmp;
      tmp.params = bundle.params();
      tmp.m = opt.m();
      tmp.v = opt.v();
      tmp.step = step;
      tmp.seed = cfg.seed;
      char name[64];
      std::snprintf(name, sizeof name, "ckpt_%07d.bin", step);
      save_checkpoint((std::filesystem::path(cfg.checkpoint_dir) / name).string(), tmp, cfg.config_hash);
    }
  };
  auto wants_checkpoint = [&](int step) {
    return std::find(cfg.checkpoint_steps.begin(), cfg.checkpoint_steps.end(), step) != cfg.checkpoint_steps.end();
  };

  for (int step = 0; step <= cfg.steps; ++step) {
    if (cfg.resample_every > 0 && step > 0 && step % cfg.resample_every == 0)
      batch = sample_collocation(cfg.collocation, ++batch_seed);
    grad.setZero();
    const bool update = step < cfg.steps;
    LossBreakdown lb = loss.evaluate(bundle, batch, update ? &grad : nullptr);
    if (!(lb.total <= cfg.diverge_threshold))
      throw DivergedLoss("loss " + std::to_string(lb.total) + " at step " + std::to_string(step));
    st.loss_history.push_back(lb.total);
    if (wants_checkpoint(step)) take_checkpoint(step, lb.total);
    if (log && (step % std::max(1, cfg.log_every) == 0 || step == cfg.steps)) {
      nlohmann::ordered_json j;
      j["step"] = step;
      j["loss"] = lb.total;
      for (std::size_t i = 0; i < lb.raw.size(); ++i) {
        const auto v = lb.raw[i].values();
        for (int k = 0; k < ModeLoss::kParts; ++k)
          j["mode" + std::to_string(i + 1) + "." + ModeLoss::names()[static_cast<std::size_t>(k)]] =
              v[static_cast<std::size_t>(k)];
      }
      j["lr"] = opt.current_lr();
      j["wall_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log << j.dump() << '\n';
    }
    if (hook) hook(step, lb);
    st.last = lb;
    if (update) {
      if (!grad.allFinite()) throw NonFiniteOutput("non-finite gradient at step " + std::to_string(step));
      opt.step(bundle.params(), grad);
    }
  }
  st.params = bundle.params();
  st.m = opt.m();
  st.v = opt.v();
  st.step = opt.steps();
  return st;
}

namespace {
constexpr char kMagic[4] = {'A', 'P', 'C', 'K'};
}

void save_checkpoint(const std::string& path, const TrainState& s, std::uint64_t config_hash) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  const std::int64_t n = s.params.size(), step = s.step;
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&config_hash), sizeof config_hash);
  f.write(reinterpret_cast<const char*>(&s.seed), sizeof s.seed);
  f.write(reinterpret_cast<const char*>(&step), sizeof step);
  f.write(reinterpret_cast<const char*>(&n), sizeof n);
  auto put = [&](const Vec& v) {
    if (v.size() != n) throw InvalidArgument("checkpoint vectors differ in length");
    f.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  };
  put(s.params);
  put(s.m);
  put(s.v);
  if (!f) throw IoError("write failed for " + path);
}

TrainState load_checkpoint(const std::string& path, std::uint64_t config_hash) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || !std::equal(magic, magic + 4, kMagic)) throw IoError(path + " is not a checkpoint");
  std::uint64_t hash = 0;
  std::int64_t step = 0, n = 0;
  TrainState s;
  f.read(reinterpret_cast<char*>(&hash), sizeof hash);
  f.read(reinterpret_cast<char*>(&s.seed), sizeof s.seed);
  f.read(reinterpret_cast<char*>(&step), sizeof step);
  f.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!f || n < 0) throw IoError("truncated checkpoint " + path);
  if (hash != config_hash) throw IoError("checkpoint " + path + " was written under a different config");
  s.step = step;
  for (Vec* v : {&s.params, &s.m, &s.v}) {
    v->resize(n);
    f.read(reinterpret_cast<char*>(v->data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
  if (!f) throw IoError("truncated checkpoint " + path);
  return s;
}

}  // namespace apnn
