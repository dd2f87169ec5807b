#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "apnn/config.hpp"
#include "apnn/exact_bgk.hpp"
#include "apnn/lyapunov.hpp"
#include "apnn/micro_macro.hpp"
#include "apnn/reference.hpp"

namespace apnn {

/// Grids, bases and operators built from a config. Holds the objects that
/// MicroMacro refers to, so it is neither copyable nor movable.
class Problem {
 public:
  explicit Problem(const ExperimentConfig& cfg);
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;

  const ExperimentConfig& config() const { return cfg_; }
  const FluidBasis& basis() const { return *basis_; }
  const GpcBasis& gpc() const { return gpc_; }
  const SgCoupling& coupling() const { return coupling_; }
  const MicroMacro& mm() const { return *mm_; }
  std::shared_ptr<const SpatialGrid> xgrid() const { return xg_; }
  const FourierHermiteInit& init() const { return *init_; }

  /// Micro-macro kernels at another Knudsen number (same basis and coupling).
  std::unique_ptr<MicroMacro> with_eps(double eps) const;
  /// Closed-form reference, BGK only.
  std::unique_ptr<ExactBgkSolution> exact(double eps) const;
  /// Reference trajectory with n + 1 snapshots on [0, t_end]: closed form
  /// for BGK, IMEX otherwise.
  Trajectory reference(double eps, double t_end, int n) const;
  /// IMEX solution with the solver section of the config at the given eps.
  Trajectory imex(double eps) const;
  /// Lyapunov weights from the config; zero a1/a2 take the constructive defaults.
  LyapunovWeights lyapunov_weights() const;

 private:
  ExperimentConfig cfg_;
  std::shared_ptr<const VelocityGrid> vg_;
  std::unique_ptr<FluidBasis> basis_;
  std::shared_ptr<const SpatialGrid> xg_;
  GpcBasis gpc_;
  SgCoupling coupling_;
  std::unique_ptr<MicroMacro> mm_;
  std::unique_ptr<FourierHermiteInit> init_;
};

/// a + scale * b, field by field.
class SumSource : public FieldSource {
 public:
  SumSource(FieldSource& a, FieldSource& b, double scale) : a_(a), b_(b), scale_(scale) {}
  int modes() const override { return a_.modes(); }
  int dim() const override { return a_.dim(); }
  int macro(int mode, const Mat& tx, unsigned flags, MacroBlock& out, bool record) override;
  int micro(int mode, const Mat& tx, const Mat& vel, unsigned flags, MicroBlock& out, bool record) override;

 private:
  FieldSource& a_;
  FieldSource& b_;
  double scale_;
};

struct RunResult {
  int exit_code = 0;
  nlohmann::ordered_json summary;  ///< also written to report.json
};

/// Runs one experiment into cfg.out and writes manifest.json. Numerical
/// failures are caught, recorded in error.json and give exit code 1.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Machine-readable failure record; `key` is empty unless a config key is at fault.
void write_error_record(const std::string& dir, const std::string& kind, const std::string& key,
                        const std::string& message);

std::string library_version();

}  // namespace apnn
