#pragma once

#include <array>
#include <string>
#include <vector>

#include "apnn/collocation.hpp"
#include "apnn/micro_macro.hpp"
#include "apnn/network.hpp"

namespace apnn {

struct LossConfig {
  double fd_step = 1e-3;  ///< step of the central differences for grad_x / grad_v of residuals
};

/// Unweighted loss parts of one gPC mode.
struct ModeLoss {
  double r1 = 0, r2 = 0, rini = 0, rb = 0;
  double r1x = 0, r2x = 0, rinix = 0, rbx = 0;
  double r1v = 0, r2v = 0, riniv = 0, rbv = 0;

  static constexpr int kParts = 12;
  static const std::array<const char*, kParts>& names();
  std::array<double, kParts> values() const;
  double sum() const;
};

struct LossBreakdown {
  std::vector<ModeLoss> raw;
  std::vector<double> weight;  ///< i^{2q}
  double total = 0;

  /// Sum of weighted parts recomputed from the components.
  double recomputed_total() const;
  std::string to_json() const;
};

/// Monte-Carlo/quadrature estimate of the H1-type micro-macro loss and its
/// parameter gradient.
class LossAssembler {
 public:
  LossAssembler(const MicroMacro& mm, const InitialData& init, int q, const LossConfig& cfg = {});

  LossBreakdown evaluate(FieldSource& src, const CollocationBatch& batch, Vec* grad = nullptr) const;

  const MicroMacro& micro_macro() const { return mm_; }

 private:
  const MicroMacro& mm_;
  const InitialData& init_;
  int q_;
  LossConfig cfg_;
  VelocitySet grid_;
  std::vector<VelocitySet> grid_shifted_;
};

}  // namespace apnn
