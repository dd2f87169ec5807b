#pragma once

#include <cstdint>
#include <string>

#include "apnn/phase_space.hpp"

namespace apnn {

enum class VelocitySampling { grid, uniform, maxwellian };

struct CollocationConfig {
  int dim = 1;
  double t_end = 0.5;
  int n_interior = 32;
  int n_initial = 32;
  int n_boundary = 16;
  VelocitySampling v_mode = VelocitySampling::grid;
  int n_velocity = 32;  ///< sampled modes only
  double v_max = 8.0;
};

/// Points for every integral in the loss. Space-time points share one
/// velocity set; all gPC modes use the same points (the Galerkin coupling
/// needs every mode at each point).
struct CollocationBatch {
  Mat interior;  ///< (1+dim) x P, rows (t, x)
  Vec w_interior;
  Mat initial;   ///< dim x P
  Vec w_initial;
  Mat boundary;  ///< (1+dim) x P; x_a is replaced by +-pi per paired face
  Vec w_boundary;
  bool velocity_on_grid = true;
  Mat velocity;  ///< dim x S, sampled modes only
  Vec w_velocity;
};

CollocationBatch sample_collocation(const CollocationConfig& cfg, std::uint64_t seed);

VelocitySampling parse_velocity_sampling(const std::string& s);

}  // namespace apnn
