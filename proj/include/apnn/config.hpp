#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "apnn/collision.hpp"
#include "apnn/collocation.hpp"
#include "apnn/loss.hpp"
#include "apnn/network.hpp"
#include "apnn/reference.hpp"
#include "apnn/train.hpp"

namespace apnn {

struct GridConfig {
  int dim = 1;
  int n_x = 128;
  int n_v = 32;
  double v_max = 8.0;
  double tol_mass = 1e-6;
  double tol_gram = 1e-8;
};

struct InitConfig {
  std::string kind = "standard";  ///< standard | fluid
  double amp = 0.1;
};

struct TrainSection {
  int steps = 20000;
  AdamConfig adam{3e-3, 0.9, 0.999, 1e-8, 0.85, 1000};
  int resample_every = 1;
  int log_every = 100;
  std::vector<int> checkpoints;  ///< explicit checkpoint steps
  int eval_interior = 512;       ///< fresh batch for the reported final loss
  int eval_initial = 256;
  int eval_boundary = 64;
  std::uint64_t eval_seed = 999;
};

struct HypoSection {
  double gamma = 0.0;
  double tol_kernel = 1e-6;
  double z = 0.0;  ///< random input at which the deterministic operator is taken
};

struct ApSection {
  std::vector<double> eps_list{1.0, 1e-2, 1e-4, 1e-6};
};

struct Theorem2Section {
  int steps = 3000;
  int n_checkpoints = 12;
  std::vector<double> remark_eps{1.0, 0.1, 0.01};
  double remark_loss = 1e-3;
};

struct LyapunovSection {
  double a3 = 1.0, a4 = 1.0, margin = 1.0;
  double a1 = 0.0, a2 = 0.0;  ///< 0: constructive default
};

struct TailsSection {
  std::vector<double> boxes{2, 3, 4, 5, 6, 7, 8};
};

struct ExperimentConfig {
  std::string mode = "solve";
  std::uint64_t seed = 1;
  std::string out = "out";
  GridConfig grid;
  KernelSpec kernel;
  Backend backend = Backend::bgk;
  int K = 2;
  double eps = 1.0;
  InitConfig init;
  NetworkSpec network;
  CollocationConfig collocation;
  LossConfig loss;
  TrainSection train;
  SolverConfig solver;
  HypoSection hypo;
  ApSection ap;
  Theorem2Section theorem2;
  LyapunovSection lyapunov;
  TailsSection tails;

  /// Fully resolved config (defaults filled in), stable key order.
  nlohmann::ordered_json to_json() const;
  /// FNV-1a of the canonical dump.
  std::uint64_t hash() const;
};

const std::vector<std::string>& experiment_modes();

/// Parses and validates; every problem raises ConfigError naming its key.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});
/// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& j, const std::string& kv);

std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace apnn
