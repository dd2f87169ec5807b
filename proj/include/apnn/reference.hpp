#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "apnn/gpc.hpp"
#include "apnn/micro_macro.hpp"
#include "apnn/network.hpp"

namespace apnn {

struct SolverConfig {
  double eps = 1.0;
  double dt = 0.0;      ///< 0: derived from cfl
  double t_end = 0.5;
  double cfl = 0.5;     ///< dt <= cfl * dx / v_max
  int n_snapshots = 10; ///< stored intervals (plus the initial state)
};

/// Stored states (m_i, g_i) of every gPC mode.
struct Trajectory {
  std::shared_ptr<const SpatialGrid> xg;
  std::shared_ptr<const VelocityGrid> vg;
  double eps = 1.0;
  double dt = 0.0;
  int K = 1;
  std::vector<double> times;
  std::vector<std::vector<Mat>> m;  ///< [snapshot][mode], count x N_x
  std::vector<std::vector<Mat>> g;  ///< [snapshot][mode], N_v x N_x

  /// h = E m + eps g on the grid.
  GridFunction h(std::size_t snap, int mode, const FluidBasis& basis) const;
  void write_csv(const std::string& path) const;
};

/// Full source S_i(t) on the grid (N_v x N_x) added to the kinetic equation.
using SourceFn = std::function<Mat(int mode, double t)>;

/// Spatial node coordinates as a dim x N_x matrix.
Mat spatial_nodes(const SpatialGrid& xg);

/// First-order IMEX micro-macro scheme: explicit transport (Lax-Wendroff for the
/// macro flux, upwind for the micro flux), backward Euler for (1/eps^2) L_ik.
Trajectory solve_sg_micromacro(const FluidBasis& basis, const SgCoupling& coupling,
                               std::shared_ptr<const SpatialGrid> xg, const InitialData& init,
                               const SolverConfig& cfg, const SourceFn& source = {});

/// Same, from explicit per-mode grid states h_i(0) (N_v x N_x).
Trajectory solve_sg_micromacro(const FluidBasis& basis, const SgCoupling& coupling,
                               std::shared_ptr<const SpatialGrid> xg, const std::vector<Mat>& h0,
                               const SolverConfig& cfg, const SourceFn& source = {});

/// Evaluates a field source on the grid at the given times (micro part projected).
Trajectory sample_trajectory(FieldSource& src, const MicroMacro& mm, std::shared_ptr<const SpatialGrid> xg,
                             const std::vector<double>& times);

/// sum_i i^{2q} |h_i - h_theta,i|_{H1}^2 per stored time.
std::vector<double> error_EK(FieldSource& src, const MicroMacro& mm, const Trajectory& traj, int q);
std::vector<double> error_EK(const Trajectory& a, const Trajectory& b, const FluidBasis& basis, int q);

/// Relative L2 error of all moments between two trajectories at a snapshot.
double relative_moment_error(const std::vector<Mat>& m, const std::vector<Mat>& ref);

struct MmsLevel {
  int n_x = 0;
  double dt = 0;
  double error = 0;
};
struct MmsReport {
  std::vector<MmsLevel> levels;
  std::vector<double> ratios;  ///< error[l] / error[l+1]
  std::string to_json() const;
};

/// Manufactured solution h*_i = (1 + sin t / 2) (sin x M (1 + v_1) + cos x v_1^3 M / 2) / i
/// with the source that makes it exact; dt and dx halve together.
MmsReport run_mms(const FluidBasis& basis, const SgCoupling& coupling, double eps, double t_end, int n_x0,
                  int levels, double cfl);

struct TailReport {
  std::vector<double> boxes;               ///< half-widths of the trial boxes
  std::vector<std::vector<double>> c;      ///< [box][mode] sup_t |g|^2 outside the box
  std::vector<std::vector<double>> c_dx;   ///< gradient in x
  std::vector<std::vector<double>> c_dv;   ///< gradient in v
  std::vector<std::vector<double>> c_lambda;  ///< (1+|v|)^gamma weighted
  std::vector<std::vector<double>> r_tilde;   ///< fluid part h~ outside the box
  std::string to_json() const;
};

TailReport tail_report(const Trajectory& traj, const FluidBasis& basis, const std::vector<double>& boxes,
                       double gamma);

}  // namespace apnn
