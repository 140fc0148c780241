#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "oldroyd/operators.hpp"

namespace oldroyd::lp {

namespace detail {

// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

}  // namespace detail

inline constexpr double kChiFlatEnd = 3.0 / 4.0;  // chi == 1 below
inline constexpr double kChiSupport = 4.0 / 3.0;  // chi == 0 above
inline constexpr double kPhiInner = 3.0 / 4.0;
inline constexpr double kPhiOuter = 8.0 / 3.0;

/// Low-pass profile: 1 on [0, 3/4], 0 from 4/3 on, smooth in between.
inline double chi(double r) {
  return 1.0 - detail::smooth_step((std::abs(r) - kChiFlatEnd) / (kChiSupport - kChiFlatEnd));
}

/// Dyadic bump phi(r) = chi(r/2) - chi(r), supported in [3/4, 8/3]. The
/// telescoping form makes sum_k phi(2^-k r) = 1 to rounding for r > 0 as long
/// as 2^-k scaling is exact (std::ldexp).
inline double phi(double r) { return chi(0.5 * r) - chi(r); }

/// Dyadic blocks available on a grid plus the low/high threshold k0.
class DyadicLadder {
 public:
  DyadicLadder(int k_min, int k_max, int k0) : k_min_(k_min), k_max_(k_max), k0_(k0) {}

  int k_min() const noexcept { return k_min_; }
  int k_max() const noexcept { return k_max_; }
  int k0() const noexcept { return k0_; }
  bool contains(int k) const noexcept { return k >= k_min_ && k <= k_max_; }

  /// phi(2^-k radius).
  double weight(int k, double radius) const { return phi(std::ldexp(radius, -k)); }

  /// Blocks touching a radius r > 0: at most two consecutive k.
  std::pair<int, int> active_range(double radius) const {
    // phi(2^-k r) != 0  <=>  3/4 < 2^-k r < 8/3
    const int hi = static_cast<int>(std::floor(std::log2(radius / kPhiInner)));
    const int lo = static_cast<int>(std::ceil(std::log2(radius / kPhiOuter)));
    return {std::max(lo - 1, k_min_), std::min(hi + 1, k_max_)};
  }

 private:
  int k_min_;
  int k_max_;
  int k0_;
};

/// Ladder covering every nonzero lattice radius of the grid (Nyquist included).
inline DyadicLadder build_ladder(const PeriodicGrid& grid, int k0) {
  if (k0 < 1) throw ConfigError("k0 must be >= 1, got " + std::to_string(k0));
  const double r_min = 1.0;
  const double r_max = std::sqrt(static_cast<double>(grid.dim())) * (grid.n() / 2);
  // smallest k with 2^-k r_min < 8/3, largest k with 2^-k r_max > 3/4
  int k_min = 0;
  while (std::ldexp(r_min, -(k_min - 1)) < kPhiOuter) --k_min;
  while (std::ldexp(r_min, -k_min) >= kPhiOuter) ++k_min;
  int k_max = 0;
  while (std::ldexp(r_max, -(k_max + 1)) > kPhiInner) ++k_max;
  while (std::ldexp(r_max, -k_max) <= kPhiInner) --k_max;
  if (k_max < k_min) throw ConfigError("grid too small to host a dyadic block");
  if (k0 > k_max) throw ConfigError("k0=" + std::to_string(k0) + " exceeds the largest block " + std::to_string(k_max));
  return DyadicLadder(k_min, k_max, k0);
}

/// Delta_k f: multiply every mode by phi(2^-k |xi|).
inline SpectralField dyadic_block(const DyadicLadder& ladder, int k, const SpectralField& f) {
  if (!ladder.contains(k)) throw ConfigError("block " + std::to_string(k) + " outside ladder range");
  SpectralField out = f;
  out.flags() = {};
  const auto k2 = f.grid().k2();
  std::vector<double> w(f.modes());
  for (std::size_t m = 0; m < f.modes(); ++m) w[m] = k2[m] > 0.0 ? ladder.weight(k, std::sqrt(k2[m])) : 0.0;
  for (int c = 0; c < f.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m) comp[m] *= w[m];
  }
  return out;
}

struct LowHigh {
  SpectralField low;   // sum_{k <= k0} Delta_k f
  SpectralField high;  // sum_{k > k0} Delta_k f
};

inline LowHigh low_high_split(const DyadicLadder& ladder, const SpectralField& f) {
  SpectralField low = f;
  SpectralField high = f;
  low.flags() = {};
  high.flags() = {};
  const auto k2 = f.grid().k2();
  for (std::size_t m = 0; m < f.modes(); ++m) {
    double wl = 0.0;
    double wh = 0.0;
    if (k2[m] > 0.0) {
      const double r = std::sqrt(k2[m]);
      const auto [lo, hi] = ladder.active_range(r);
      for (int k = lo; k <= hi; ++k) (k <= ladder.k0() ? wl : wh) += ladder.weight(k, r);
    }
    for (int c = 0; c < f.components(); ++c) {
      low(c, m) *= wl;
      high(c, m) *= wh;
    }
  }
  return {std::move(low), std::move(high)};
}

}  // namespace oldroyd::lp
