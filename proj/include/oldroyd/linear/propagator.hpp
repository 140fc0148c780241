#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "oldroyd/linear/expm.hpp"
#include "oldroyd/lp/norms.hpp"

namespace oldroyd::linear {

using Mat2 = Matrix<2>;

/// Decay rates of the per-mode (u, v) block, lambda_minus <= lambda_plus <= 0.
struct EigenPair {
  double plus;
  double minus;
};

/// lambda_± = (-(r+1) ± sqrt(r^2+1)) / 2 with r = |xi|^2. lambda_plus is
/// taken from Vieta (lambda_+ lambda_- = r/2) to avoid cancellation.
inline EigenPair eigenvalues(double r) {
  if (r < 0.0) throw InputError("eigenvalues: |xi|^2 must be nonnegative");
  const double root = std::sqrt(r * r + 1.0);
  const double minus = -0.5 * ((r + 1.0) + root);
  const double plus = -r / ((r + 1.0) + root);
  return {plus, minus};
}

/// Per-mode generator acting on (u, v) amplitudes, r = |xi|^2.
struct ModeMatrix {
  double r;

  Mat2 matrix() const {
    const double rho = std::sqrt(r);
    return {{{0.0, rho}, {-0.5 * rho, -(r + 1.0)}}};
  }
  double trace() const { return -(r + 1.0); }
  double det() const { return 0.5 * r; }
};

struct GreenKernels {
  double g1;
  double g2;
  double g3;
};

/// G1 = (e^{l+ t} - e^{l- t})/(l+ - l-), G2 = (l+ e^{l+ t} - l- e^{l- t})/(l+ - l-),
/// G3 = (l+ e^{l- t} - l- e^{l+ t})/(l+ - l-), evaluated with the slow
/// exponential factored out so the difference never cancels.
inline GreenKernels green_kernels(double t, double rho) {
  if (t < 0.0) throw InputError("green_kernels: t must be nonnegative");
  if (t == 0.0) return {0.0, 1.0, 1.0};
  const auto [lp, lm] = eigenvalues(rho * rho);
  const double gap = lp - lm;  // >= 1
  const double slow = std::exp(lp * t);
  const double ratio = std::exp(-gap * t);  // e^{(l- - l+) t}
  const double g1 = -slow * std::expm1(-gap * t) / gap;
  const double g2 = slow * (lp - lm * ratio) / gap;
  const double g3 = slow * (lp * ratio - lm) / gap;
  return {g1, g2, g3};
}

/// Assembled Green's matrix [[G3, |xi| G1], [-|xi| G1 / 2, G2]].
inline Mat2 green_matrix(double t, double rho) {
  const auto g = green_kernels(t, rho);
  return {{{g.g3, rho * g.g1}, {-0.5 * rho * g.g1, g.g2}}};
}

/// Exact solution of d/dt(u, v) = A(xi)(u, v) applied mode by mode.
inline std::pair<SpectralField, SpectralField> propagate_linear(const SpectralField& u0, const SpectralField& v0, double t) {
  u0.require_same_shape(v0);
  if (t < 0.0) throw InputError("propagate_linear: t must be nonnegative");
  SpectralField u = u0;
  SpectralField v = v0;
  const auto k2 = u0.grid().k2();
  for (std::size_t m = 0; m < u0.modes(); ++m) {
    const Mat2 g = green_matrix(t, std::sqrt(k2[m]));
    for (int c = 0; c < u0.components(); ++c) {
      const cplx a = u0(c, m);
      const cplx b = v0(c, m);
      u(c, m) = g[0][0] * a + g[0][1] * b;
      v(c, m) = g[1][0] * a + g[1][1] * b;
    }
  }
  return {std::move(u), std::move(v)};
}

/// Free evolution of the P-part of the stress, d/dt - Delta + 1 = 0:
/// multiplies every mode by e^{-(|xi|^2+1) t}.
inline SpectralField ptf_semigroup(const SpectralField& tau_p, double t) {
  if (t < 0.0) throw InputError("ptf_semigroup: t must be nonnegative");
  SpectralField out = tau_p;
  const auto k2 = tau_p.grid().k2();
  for (int c = 0; c < out.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t m = 0; m < out.modes(); ++m) comp[m] *= std::exp(-(k2[m] + 1.0) * t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Band-limited decay check for the kernels G1, G2, G3
// ---------------------------------------------------------------------------

struct DecaySample {
  double t;
  double ratio;  // ||G_i * phi||_p / ||phi||_p
};

struct KernelDecay {
  int kernel;  // 1, 2, 3
  std::vector<DecaySample> samples;
  double fitted_C = 0.0;
  double fitted_c = 0.0;
  bool monotone = false;   // ratios strictly decreasing over the sample times
  bool dominated = false;  // c > 0 and C e^{-c theta^2 t} >= every ratio
};

struct DecayReport {
  double theta;  // inner radius of the band
  double theta_outer;
  double p;
  std::vector<KernelDecay> kernels;
};

/// Scalar random field with Hermitian coefficients supported on theta_lo <= |xi| <= theta_hi.
inline SpectralField random_band_field(const PeriodicGrid& grid, double theta_lo, double theta_hi, std::uint64_t seed) {
  SpectralField f(grid, Rank::scalar);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto k2 = grid.k2();
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double r = std::sqrt(k2[m]);
    const double re = normal(rng);
    const double im = normal(rng);
    if (r >= theta_lo && r <= theta_hi && !grid.nyquist(m) && k2[m] > 0.0) f(0, m) = {re, im};
  }
  SpectralField sym = f;
  for (std::size_t m = 0; m < grid.size(); ++m) sym(0, m) = 0.5 * (f(0, m) + std::conj(f(0, grid.conjugate_index(m))));
  return sym;
}

inline DecayReport verify_decay_bound(const PeriodicGrid& grid, double theta_lo, double theta_hi, double p,
                                      std::span<const double> times, std::uint64_t seed = 1) {
  if (!(theta_lo > 0.0) || !(theta_hi >= theta_lo)) throw InputError("decay band must satisfy 0 < theta_lo <= theta_hi");
  if (theta_hi > grid.n() / 3.0) throw InputError("decay band exceeds the resolved radius n/3");
  if (p != 2.0 && p != lp::kInf) throw ConfigError("decay check supports p = 2 and p = inf only");
  if (times.empty()) throw InputError("decay check needs at least one time");

  const SpectralField phi0 = random_band_field(grid, theta_lo, theta_hi, seed);
  const double base = lp::lp_norm(phi0, p);
  if (base == 0.0) throw InputError("decay band contains no resolved lattice mode");

  DecayReport report{theta_lo, theta_hi, p, {}};
  const auto k2 = grid.k2();
  for (int kernel = 1; kernel <= 3; ++kernel) {
    KernelDecay kd{kernel, {}};
    for (double t : times) {
      SpectralField g = phi0;
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto gk = green_kernels(t, std::sqrt(k2[m]));
        g(0, m) *= kernel == 1 ? gk.g1 : (kernel == 2 ? gk.g2 : gk.g3);
      }
      kd.samples.push_back({t, lp::lp_norm(g, p) / base});
    }

    // least squares of log(ratio) against theta^2 t over samples with t > 0
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (const auto& s : kd.samples) {
      if (s.t <= 0.0 || s.ratio <= 0.0) continue;
      const double x = theta_lo * theta_lo * s.t;
      const double y = std::log(s.ratio);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    if (cnt >= 2 && sxx * cnt - sx * sx > 0.0) {
      const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      kd.fitted_c = -slope;
    }
    double C = 0.0;
    for (const auto& s : kd.samples) C = std::max(C, s.ratio * std::exp(kd.fitted_c * theta_lo * theta_lo * s.t));
    kd.fitted_C = C;
    kd.dominated = kd.fitted_c > 0.0;
    kd.monotone = true;
    for (std::size_t i = 1; i < kd.samples.size(); ++i)
      if (!(kd.samples[i].ratio < kd.samples[i - 1].ratio)) kd.monotone = false;
    report.kernels.push_back(std::move(kd));
  }
  return report;
}

}  // namespace oldroyd::linear
