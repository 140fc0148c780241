#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "oldroyd/lp/ladder.hpp"

namespace oldroyd::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exponents of a (time-space) Besov norm.
///
/// p = 2 is evaluated spectrally and p = inf from physical samples. Any other
/// p >= 1 needs `quadrature` set and uses the uniform-grid rule.
struct NormSpec {
  double s = 0.0;
  double p = 2.0;
  double r = 1.0;
  double q = 1.0;
  bool quadrature = false;
};

inline void validate(const NormSpec& spec) {
  if (!(spec.p >= 1.0) || !(spec.r >= 1.0) || !(spec.q >= 1.0)) throw ConfigError("norm exponents p, q, r must be >= 1");
  if (spec.p != 2.0 && spec.p != kInf && !spec.quadrature)
    throw ConfigError("L^p with p=" + std::to_string(spec.p) + " requires the quadrature flag");
}

/// Normalised discrete L^p norm: ((1/N) sum_x |f(x)|^p)^{1/p}, |.| the
/// Euclidean/Frobenius norm over components.
inline double lp_norm(const SpectralField& f, double p, bool quadrature = false) {
  validate(NormSpec{0.0, p, 1.0, 1.0, quadrature});
  if (p == 2.0) return l2_norm(f);
  const auto x = inverse_transform(f);
  const std::size_t npts = f.modes();
  double acc = 0.0;
  for (std::size_t m = 0; m < npts; ++m) {
    double a2 = 0.0;
    for (int c = 0; c < f.components(); ++c) a2 += x[c * npts + m] * x[c * npts + m];
    const double a = std::sqrt(a2);
    acc = p == kInf ? std::max(acc, a) : acc + std::pow(a, p);
  }
  return p == kInf ? acc : std::pow(acc / static_cast<double>(npts), 1.0 / p);
}

/// l^r norm of a sequence (r = inf allowed).
inline double sequence_norm(std::span<const double> a, double r) {
  if (r == kInf) {
    double w = 0.0;
    for (double v : a) w = std::max(w, std::abs(v));
    return w;
  }
  double acc = 0.0;
  for (double v : a) acc += std::pow(std::abs(v), r);
  return std::pow(acc, 1.0 / r);
}

/// ||Delta_k f||_{L^p} for every k of the ladder, index k - k_min.
inline std::vector<double> block_norms(const DyadicLadder& ladder, const SpectralField& f, double p, bool quadrature) {
  const int nb = ladder.k_max() - ladder.k_min() + 1;
  std::vector<double> out(static_cast<std::size_t>(nb), 0.0);
  if (p == 2.0) {
    const auto k2 = f.grid().k2();
    for (std::size_t m = 0; m < f.modes(); ++m) {
      if (k2[m] == 0.0) continue;
      double amp2 = 0.0;
      for (int c = 0; c < f.components(); ++c) amp2 += std::norm(f(c, m));
      if (amp2 == 0.0) continue;
      const double r = std::sqrt(k2[m]);
      const auto [lo, hi] = ladder.active_range(r);
      for (int k = lo; k <= hi; ++k) {
        const double w = ladder.weight(k, r);
        out[k - ladder.k_min()] += w * w * amp2;
      }
    }
    for (auto& v : out) v = std::sqrt(v);
    return out;
  }
  for (int k = ladder.k_min(); k <= ladder.k_max(); ++k)
    out[k - ladder.k_min()] = lp_norm(dyadic_block(ladder, k, f), p, quadrature);
  return out;
}

/// Homogeneous Besov norm || (2^{ks} ||Delta_k f||_{L^p})_k ||_{l^r}. The
/// mean of f is invisible to it.
inline double besov_norm(const DyadicLadder& ladder, const SpectralField& f, const NormSpec& spec) {
  validate(spec);
  auto b = block_norms(ladder, f, spec.p, spec.quadrature);
  for (int k = ladder.k_min(); k <= ladder.k_max(); ++k) b[k - ladder.k_min()] *= std::exp2(k * spec.s);
  return sequence_norm(b, spec.r);
}

/// Inhomogeneous H^s: (sum_xi (1+|xi|^2)^s |f(xi)|^2)^{1/2}.
inline double sobolev_norm(const SpectralField& f, double s) {
  const auto k2 = f.grid().k2();
  double acc = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const auto comp = f.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m) acc += std::pow(1.0 + k2[m], s) * std::norm(comp[m]);
  }
  return std::sqrt(acc);
}

/// ||grad^j f||_{H^s} with grad^j the full j-th derivative tensor, whose
/// symbol has squared size |xi|^{2j}.
inline double sobolev_grad_norm(const SpectralField& f, int j, double s) {
  const auto k2 = f.grid().k2();
  double acc = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const auto comp = f.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m)
      acc += std::pow(k2[m], j) * std::pow(1.0 + k2[m], s) * std::norm(comp[m]);
  }
  return std::sqrt(acc);
}

namespace detail {

inline void check_series(std::span<const double> times, std::size_t count, std::span<const double> weight) {
  if (times.empty() || times.size() != count) throw InputError("time series: times and samples must be nonempty and equal in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InputError("time series: times must be strictly increasing");
  if (!weight.empty()) {
    if (weight.size() != times.size()) throw InputError("time series: weight length mismatch");
    for (double w : weight)
      if (!(w >= 0.0)) throw InputError("time series: weight must be nonnegative");
  }
}

// (int_0^T g(t) |a(t)|^q dt)^{1/q} by the trapezoid rule; q = inf -> sup.
inline double time_norm(std::span<const double> times, std::span<const double> a, double q, std::span<const double> weight) {
  if (q == kInf) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i]) * (weight.empty() ? 1.0 : weight[i]));
    return w;
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double g0 = weight.empty() ? 1.0 : weight[i - 1];
    const double g1 = weight.empty() ? 1.0 : weight[i];
    acc += 0.5 * (times[i] - times[i - 1]) * (g0 * std::pow(std::abs(a[i - 1]), q) + g1 * std::pow(std::abs(a[i]), q));
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace detail

/// Chemin-Lerner norm || 2^{ks} ||Delta_k f||_{L^q_T(L^p)} ||_{l^r}, with the
/// optional nonnegative weight g(t) inside the time integral.
inline double chemin_lerner_norm(const DyadicLadder& ladder, std::span<const double> times,
                                 std::span<const SpectralField> series, const NormSpec& spec,
                                 std::span<const double> weight = {}) {
  validate(spec);
  detail::check_series(times, series.size(), weight);
  const int nb = ladder.k_max() - ladder.k_min() + 1;
  std::vector<std::vector<double>> per_time;
  per_time.reserve(series.size());
  for (const auto& f : series) per_time.push_back(block_norms(ladder, f, spec.p, spec.quadrature));
  std::vector<double> b(static_cast<std::size_t>(nb));
  std::vector<double> a(series.size());
  for (int i = 0; i < nb; ++i) {
    for (std::size_t t = 0; t < series.size(); ++t) a[t] = per_time[t][i];
    b[i] = std::exp2((ladder.k_min() + i) * spec.s) * detail::time_norm(times, a, spec.q, weight);
  }
  return sequence_norm(b, spec.r);
}

/// Bochner norm || ||f(t)||_{B^s_{p,r}} ||_{L^q_T}.
inline double bochner_norm(const DyadicLadder& ladder, std::span<const double> times, std::span<const SpectralField> series,
                           const NormSpec& spec, std::span<const double> weight = {}) {
  validate(spec);
  detail::check_series(times, series.size(), weight);
  std::vector<double> a(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) a[t] = besov_norm(ladder, series[t], spec);
  return detail::time_norm(times, a, spec.q, weight);
}

}  // namespace oldroyd::lp
