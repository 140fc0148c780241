#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "oldroyd/errors.hpp"

namespace oldroyd::diag {

inline constexpr double kFitFloor = 1e-13;
inline constexpr double kDefaultTailFraction = 0.6;
inline constexpr std::size_t kMinFitSamples = 5;

/// Time window of a decay fit. Unset bounds select the default tail: the
/// last 60% of the samples.
struct FitWindow {
  std::optional<double> t_start;
  std::optional<double> t_end;
};

struct DecayFit {
  double rate = 0.0;       // value ~ amplitude * exp(-rate t)
  double amplitude = 0.0;
  double r2 = 0.0;
  double t_start = 0.0;    // window actually used
  double t_end = 0.0;
  std::size_t samples = 0;
};

/// Least squares of log(value) against t inside the window. Values at or
/// below 1e-13 are dropped as roundoff plateau; a nonpositive or non-finite
/// value inside the window is an input error.
inline DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, const FitWindow& window = {}) {
  if (times.size() != values.size()) throw InputError("fit: times and values differ in length");
  const std::size_t n = times.size();
  std::size_t first = 0, last = n;
  if (!window.t_start && !window.t_end) {
    first = n - static_cast<std::size_t>(std::ceil(kDefaultTailFraction * static_cast<double>(n)));
  }
  std::vector<double> x, y;
  for (std::size_t i = first; i < last; ++i) {
    if (window.t_start && times[i] < *window.t_start) continue;
    if (window.t_end && times[i] > *window.t_end) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw InputError("fit: nonpositive or non-finite value at t=" + std::to_string(times[i]) +
                       " (stalled decay or blow-up)");
    if (values[i] <= kFitFloor) continue;
    x.push_back(times[i]);
    y.push_back(std::log(values[i]));
  }
  if (x.size() < kMinFitSamples)
    throw InputError("fit: need at least " + std::to_string(kMinFitSamples) + " samples in the window, have " +
                     std::to_string(x.size()));
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InputError("fit: window spans a single time");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (intercept + slope * x[i]);
    ss_res += e * e;
  }
  DecayFit f;
  f.rate = -slope;
  f.amplitude = std::exp(intercept);
  // relative test so a constant series with log roundoff still reports r2 = 1
  f.r2 = syy <= 1e-28 * std::max(1.0, my * my) * m ? 1.0 : 1.0 - ss_res / syy;
  f.t_start = x.front();
  f.t_end = x.back();
  f.samples = x.size();
  return f;
}

}  // namespace oldroyd::diag
