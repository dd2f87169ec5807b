#include "apnn/collocation.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "apnn/errors.hpp"

namespace apnn {

VelocitySampling parse_velocity_sampling(const std::string& s) {
  if (s == "grid") return VelocitySampling::grid;
  if (s == "uniform") return VelocitySampling::uniform;
  if (s == "maxwellian") return VelocitySampling::maxwellian;
  throw InvalidArgument("unknown velocity sampling '" + s + "'");
}

CollocationBatch sample_collocation(const CollocationConfig& cfg, std::uint64_t seed) {
  if (cfg.n_interior < 1 || cfg.n_initial < 1 || cfg.n_boundary < 1)
    throw InvalidArgument("collocation batch sizes must be positive");
  const int d = cfg.dim;
  const double pi = std::numbers::pi;
  const double vol_x = std::pow(2 * pi, d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  CollocationBatch b;

  b.interior.resize(1 + d, cfg.n_interior);
  for (int p = 0; p < cfg.n_interior; ++p) {
    b.interior(0, p) = cfg.t_end * U(rng);
    for (int a = 0; a < d; ++a) b.interior(1 + a, p) = -pi + 2 * pi * U(rng);
  }
  b.w_interior = Vec::Constant(cfg.n_interior, cfg.t_end * vol_x / cfg.n_interior);

  b.initial.resize(d, cfg.n_initial);
  for (int p = 0; p < cfg.n_initial; ++p)
    for (int a = 0; a < d; ++a) b.initial(a, p) = -pi + 2 * pi * U(rng);
  b.w_initial = Vec::Constant(cfg.n_initial, vol_x / cfg.n_initial);

  b.boundary.resize(1 + d, cfg.n_boundary);
  for (int p = 0; p < cfg.n_boundary; ++p) {
    b.boundary(0, p) = cfg.t_end * U(rng);
    for (int a = 0; a < d; ++a) b.boundary(1 + a, p) = -pi + 2 * pi * U(rng);
  }
  b.w_boundary = Vec::Constant(cfg.n_boundary, cfg.t_end * vol_x / (2 * pi) / cfg.n_boundary);

  b.velocity_on_grid = cfg.v_mode == VelocitySampling::grid;
  if (!b.velocity_on_grid) {
    const int S = cfg.n_velocity;
    const double L = cfg.v_max;
    b.velocity.resize(d, S);
    b.w_velocity.resize(S);
    if (cfg.v_mode == VelocitySampling::uniform) {
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < d; ++a) b.velocity(a, s) = -L + 2 * L * U(rng);
      b.w_velocity.setConstant(std::pow(2 * L, d) / S);
    } else {
      // Standard normal truncated to the box; importance weights integrate over the box.
      std::normal_distribution<double> N(0.0, 1.0);
      const double mass1 = std::erf(L / std::sqrt(2.0));
      const double mass = std::pow(mass1, d);
      for (int s = 0; s < S; ++s) {
        double r2 = 0;
        for (int a = 0; a < d; ++a) {
          double x;
          do x = N(rng);
          while (std::abs(x) > L);
          b.velocity(a, s) = x;
          r2 += x * x;
        }
        const double dens = std::exp(-0.5 * r2) / std::pow(2 * pi, 0.5 * d) / mass;
        b.w_velocity(s) = 1.0 / (S * dens);
      }
    }
  }
  return b;
}

}  // namespace apnn
