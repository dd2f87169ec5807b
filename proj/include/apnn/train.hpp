#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apnn/collocation.hpp"
#include "apnn/loss.hpp"
#include "apnn/network.hpp"

namespace apnn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr_decay = 1.0;    ///< lr multiplied by lr_decay every decay_every steps
  int decay_every = 1000;
};

/// Adam with bias correction.
class Adam {
 public:
  Adam(std::size_t n, const AdamConfig& cfg);
  void step(Vec& params, const Vec& grad);
  double current_lr() const;
  long steps() const { return t_; }

  Vec& m() { return m_; }
  Vec& v() { return v_; }
  const Vec& m() const { return m_; }
  const Vec& v() const { return v_; }
  void set_steps(long t) { t_ = t; }

 private:
  AdamConfig cfg_;
  Vec m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  int steps = 1000;
  AdamConfig adam;
  std::uint64_t seed = 1;
  int resample_every = 0;       ///< 0: one fixed batch (full-batch, deterministic)
  int log_every = 100;
  std::vector<int> checkpoint_steps;  ///< steps after which a checkpoint is taken
  std::string checkpoint_dir;         ///< empty: keep checkpoints in memory only
  std::string log_path;               ///< JSON-lines log, empty to disable
  double diverge_threshold = 1e6;
  std::uint64_t config_hash = 0;
  CollocationConfig collocation;
};

struct Checkpoint {
  int step = 0;
  double loss = 0;
  Vec params;
};

struct TrainState {
  Vec params, m, v;
  long step = 0;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;  ///< loss before each update
  std::vector<Checkpoint> checkpoints;
  LossBreakdown last;
};

/// Called after every step with (step, breakdown); may be empty.
using StepHook = std::function<void(int, const LossBreakdown&)>;

TrainState train(NetworkBundle& bundle, const LossAssembler& loss, const TrainConfig& cfg,
                 const StepHook& hook = {});

void save_checkpoint(const std::string& path, const TrainState& s, std::uint64_t config_hash);
/// Restores params, moments and step; throws IoError on a hash mismatch.
TrainState load_checkpoint(const std::string& path, std::uint64_t config_hash);

}  // namespace apnn
