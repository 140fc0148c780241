#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "oldroyd/errors.hpp"

namespace oldroyd::solver {

/// Seeded random initial data: band 1 <= |xi| <= k_max, spectral weight
/// (1 + |xi|^2)^{-spectrum_decay/2}, rescaled to the given H^3 norms.
struct InitSpec {
  double u_h3 = 0.01;
  double tau_h3 = 0.01;
  bool div_free_tau = false;
  double spectrum_decay = 2.0;
  int k_max = 4;

  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

/// Parameters of one run. mu = 0 and K1 = K2 = 1 are fixed by the model.
struct SimConfig {
  int dim = 2;
  int n = 64;
  double nu = 1.0;
  double alpha = 0.0;
  double a = 0.0;
  double dt = 2e-3;
  double t_end = 1.0;
  int output_stride = 50;
  int snapshot_stride = 0;  // 0: no snapshots
  std::uint64_t seed = 1;
  int k0 = 2;
  bool nonlinear = true;
  InitSpec init{};

  /// Number of steps to reach t_end (rounded to the nearest integer).
  long steps() const { return std::lround(t_end / dt); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
  if (c.dim != 2 && c.dim != 3) fail("dim", "must be 2 or 3");
  if (c.n < 8 || c.n % 2 != 0) fail("n", "must be even and >= 8");
  if (!(c.nu > 0.0) || !std::isfinite(c.nu)) fail("nu", "must be positive");
  if (!(c.alpha >= -1.0 && c.alpha <= 1.0)) fail("alpha", "must lie in [-1, 1]");
  if (!(c.a >= 0.0) || !std::isfinite(c.a)) fail("a", "must be nonnegative");
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) fail("dt", "must be positive");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) fail("t_end", "must be nonnegative");
  if (std::abs(static_cast<double>(c.steps()) * c.dt - c.t_end) > 1e-9 * std::max(1.0, c.t_end))
    fail("t_end", "must be an integer multiple of dt");
  if (c.output_stride < 1) fail("output_stride", "must be >= 1");
  if (c.snapshot_stride < 0) fail("snapshot_stride", "must be >= 0");
  if (c.k0 < 1) fail("k0", "must be >= 1");
  if (!(c.init.u_h3 >= 0.0)) fail("init.u_h3", "must be nonnegative");
  if (!(c.init.tau_h3 >= 0.0)) fail("init.tau_h3", "must be nonnegative");
  if (!std::isfinite(c.init.spectrum_decay)) fail("init.spectrum_decay", "must be finite");
  if (c.init.k_max < 1 || 3 * c.init.k_max > c.n) fail("init.k_max", "must satisfy 1 <= k_max <= n/3");
}

}  // namespace oldroyd::solver
