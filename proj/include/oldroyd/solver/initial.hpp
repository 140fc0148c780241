#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "oldroyd/lp/norms.hpp"
#include "oldroyd/solver/config.hpp"
#include "oldroyd/solver/state.hpp"

namespace oldroyd::solver {

inline constexpr int kMaxProjectionSweeps = 200;
inline constexpr double kDivFreeTolerance = 1e-10;

namespace detail {

// Hermitian random field, every component drawn independently on the band
// 1 <= |xi| <= k_max with amplitude weight (1 + |xi|^2)^{-decay/2}.
inline SpectralField random_band(const PeriodicGrid& g, Rank rank, const InitSpec& spec, std::mt19937_64& rng) {
  SpectralField raw(g, rank);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto k2 = g.k2();
  const double kmax2 = static_cast<double>(spec.k_max) * spec.k_max;
  for (int c = 0; c < raw.components(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) {
      const double re = normal(rng);
      const double im = normal(rng);
      if (k2[m] >= 1.0 && k2[m] <= kmax2 && g.kept(m)) raw(c, m) = std::pow(1.0 + k2[m], -0.5 * spec.spectrum_decay) * cplx(re, im);
    }
  SpectralField out = raw;
  for (int c = 0; c < raw.components(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) out(c, m) = 0.5 * (raw(c, m) + std::conj(raw(c, g.conjugate_index(m))));
  return out;
}

inline double max_slice_divergence(const SpectralField& tau) {
  const double scale = std::max(l2_norm(tau), 1e-300);
  return max_abs(div_tensor(tau).coeffs()) / scale;
}

inline void rescale(SpectralField& f, double target, const char* what) {
  const double h3 = lp::sobolev_norm(f, 3.0);
  if (target == 0.0) {
    f.set_zero();
    return;
  }
  if (h3 == 0.0) throw InputError(std::string("initial ") + what + " is zero on the requested band; raise init.k_max");
  f *= target / h3;
}

}  // namespace detail

/// Seeded band-limited initial state. u is Leray-projected; tau is symmetric
/// and, with div_free_tau, has divergence-free slices (alternating
/// projections onto the two constraint sets). Both are rescaled to their
/// H^3 targets.
inline FlowState make_initial_data(const InitSpec& spec, const PeriodicGrid& grid, std::uint64_t seed) {
  if (spec.k_max < 1 || 3 * spec.k_max > grid.n()) throw ConfigError("init.k_max must satisfy 1 <= k_max <= n/3");
  std::mt19937_64 rng(seed);
  SpectralField u = leray_project(detail::random_band(grid, Rank::vector, spec, rng));
  SpectralField tau = detail::random_band(grid, Rank::tensor, spec, rng);
  tau = SymmetricTensorField::from_full(tau).to_full();
  if (spec.div_free_tau) {
    int sweep = 0;
    for (; sweep < kMaxProjectionSweeps; ++sweep) {
      if (detail::max_slice_divergence(tau) <= kDivFreeTolerance) break;
      tau = SymmetricTensorField::from_full(helmholtz_tensor(tau).P).to_full();
    }
    if (detail::max_slice_divergence(tau) > kDivFreeTolerance)
      throw InputError("divergence-free stress did not converge in " + std::to_string(kMaxProjectionSweeps) +
                       " sweeps; try a different spectrum");
  }
  detail::rescale(u, spec.u_h3, "velocity");
  detail::rescale(tau, spec.tau_h3, "stress");
  u.flags().divergence_free = true;
  return FlowState(std::move(u), SymmetricTensorField::from_full(tau), 0.0);
}

}  // namespace oldroyd::solver
