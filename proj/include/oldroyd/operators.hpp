#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "oldroyd/field.hpp"

namespace oldroyd {

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// Physical samples (component-major, each block row-major over the grid) to
/// normalised Fourier coefficients.
inline SpectralField forward_transform(const PeriodicGrid& grid, Rank rank, std::span<const double> samples) {
  SpectralField f(grid, rank);
  if (samples.size() != f.coeffs().size()) {
    throw ConfigError("sample count " + std::to_string(samples.size()) + " does not match grid (" +
                      std::to_string(f.coeffs().size()) + ")");
  }
  auto out = f.coeffs();
  std::copy(samples.begin(), samples.end(), out.begin());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (int c = 0; c < f.components(); ++c) {
    auto comp = f.component(c);
    grid.forward(comp);
    for (auto& z : comp) z *= scale;
  }
  return f;
}

/// Complex physical samples; the imaginary part of a real field is roundoff.
inline CoeffVector inverse_transform_complex(const SpectralField& f) {
  CoeffVector out(f.coeffs().begin(), f.coeffs().end());
  for (int c = 0; c < f.components(); ++c) {
    f.grid().backward(std::span<cplx>(out).subspan(c * f.modes(), f.modes()));
  }
  return out;
}

inline std::vector<double> inverse_transform(const SpectralField& f) {
  const auto z = inverse_transform_complex(f);
  std::vector<double> out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](cplx v) { return v.real(); });
  return out;
}

// ---------------------------------------------------------------------------
// Differential operators (all diagonal per mode)
// ---------------------------------------------------------------------------

/// Scalar -> vector (grad f)_j = d_j f, or vector -> tensor (grad u)_ij = d_j u_i.
inline SpectralField grad(const SpectralField& f) {
  if (f.rank() == Rank::tensor) throw ConfigError("grad: tensor input not supported");
  const int d = f.dim();
  const Rank out_rank = f.rank() == Rank::scalar ? Rank::vector : Rank::tensor;
  SpectralField g(f.grid(), out_rank);
  const std::size_t nm = f.modes();
  for (int i = 0; i < f.components(); ++i) {
    const auto src = f.component(i);
    for (int j = 0; j < d; ++j) {
      auto dst = g.component(i * d + j);
      const auto xi = f.grid().deriv(j);
      for (std::size_t m = 0; m < nm; ++m) dst[m] = cplx(0.0, xi[m]) * src[m];
    }
  }
  return g;
}

inline SpectralField div(const SpectralField& v) {
  if (v.rank() != Rank::vector) throw ConfigError("div: expected a vector field, got " + to_string(v.rank()));
  SpectralField s(v.grid(), Rank::scalar);
  auto out = s.component(0);
  for (int j = 0; j < v.dim(); ++j) {
    const auto xi = v.grid().deriv(j);
    const auto src = v.component(j);
    for (std::size_t m = 0; m < v.modes(); ++m) out[m] += cplx(0.0, xi[m]) * src[m];
  }
  return s;
}

/// (div tau)_i = d_j tau_ij, contracting the second index.
inline SpectralField div_tensor(const SpectralField& tau) {
  if (tau.rank() != Rank::tensor) throw ConfigError("div_tensor: expected a tensor field, got " + to_string(tau.rank()));
  const int d = tau.dim();
  SpectralField v(tau.grid(), Rank::vector);
  for (int i = 0; i < d; ++i) {
    auto out = v.component(i);
    for (int j = 0; j < d; ++j) {
      const auto xi = tau.grid().deriv(j);
      const auto src = tau.component(i, j);
      for (std::size_t m = 0; m < tau.modes(); ++m) out[m] += cplx(0.0, xi[m]) * src[m];
    }
  }
  return v;
}

inline SpectralField laplacian(const SpectralField& f) {
  SpectralField out = f;
  const auto k2 = f.grid().k2();
  for (int c = 0; c < f.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m) comp[m] *= -k2[m];
  }
  return out;
}

/// Multiplies by -1/|xi|^2; the mean is sent to zero.
inline SpectralField inv_laplacian(const SpectralField& f) {
  SpectralField out = f;
  const auto k2 = f.grid().k2();
  for (int c = 0; c < f.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m) comp[m] = k2[m] > 0.0 ? comp[m] * (-1.0 / k2[m]) : cplx{};
  }
  return out;
}

/// Lambda^s = (-Delta)^{s/2}: multiplies by |xi|^s. For s != 0 the mean is
/// sent to zero; s == 0 is the identity.
inline SpectralField lambda_power(const SpectralField& f, double s) {
  SpectralField out = f;
  if (s == 0.0) return out;
  const auto k2 = f.grid().k2();
  for (int c = 0; c < f.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m) comp[m] = k2[m] > 0.0 ? comp[m] * std::pow(k2[m], 0.5 * s) : cplx{};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

namespace detail {

// Removes the xi-parallel part of the d-vector stored with stride `stride`
// starting at p[0]. Left untouched when xi vanishes.
inline void project_mode(cplx* p, std::size_t stride, std::span<const double> xi_m, int d) {
  double k2 = 0.0;
  for (int j = 0; j < d; ++j) k2 += xi_m[j] * xi_m[j];
  if (k2 == 0.0) return;
  cplx dot{};
  for (int j = 0; j < d; ++j) dot += xi_m[j] * p[j * stride];
  dot /= k2;
  for (int j = 0; j < d; ++j) p[j * stride] -= xi_m[j] * dot;
}

}  // namespace detail

/// Leray projector P = I - grad Delta^{-1} div, built on the derivative symbol
/// so that div(P v) = 0 exactly. The mean is left unchanged.
inline SpectralField leray_project(const SpectralField& v) {
  if (v.rank() != Rank::vector) throw ConfigError("leray_project: expected a vector field, got " + to_string(v.rank()));
  SpectralField out = v;
  const int d = v.dim();
  std::array<double, 3> xm{};
  for (std::size_t m = 0; m < v.modes(); ++m) {
    for (int j = 0; j < d; ++j) xm[j] = v.grid().deriv(j)[m];
    detail::project_mode(&out(0, m), v.modes(), std::span<const double>(xm.data(), d), d);
  }
  out.flags().divergence_free = true;
  return out;
}

struct HelmholtzParts {
  SpectralField P;  // divergence-free along the contracted index
  SpectralField Q;  // gradient part
};

/// Helmholtz split of a tensor field. P and Q act on each slice tau_{i.}
/// indexed by the divergence (second) index, so div_tensor(P tau) = 0 and
/// div_tensor(Q tau) = div_tensor(tau). Pτ is computed, Qτ = τ - Pτ.
inline HelmholtzParts helmholtz_tensor(const SpectralField& tau) {
  if (tau.rank() != Rank::tensor) throw ConfigError("helmholtz_tensor: expected a tensor field, got " + to_string(tau.rank()));
  const int d = tau.dim();
  SpectralField p = tau;
  p.flags() = {};
  std::array<double, 3> xm{};
  for (std::size_t m = 0; m < tau.modes(); ++m) {
    for (int j = 0; j < d; ++j) xm[j] = tau.grid().deriv(j)[m];
    for (int i = 0; i < d; ++i) {
      detail::project_mode(&p(i * d, m), tau.modes(), std::span<const double>(xm.data(), d), d);
    }
  }
  SpectralField q = tau;
  q.flags() = {};
  q -= p;
  return {std::move(p), std::move(q)};
}

/// 2/3-rule: zero every mode with some |xi_i| > n/3 (this includes Nyquist).
inline SpectralField dealias(const SpectralField& f) {
  SpectralField out = f;
  for (int c = 0; c < f.components(); ++c) {
    auto comp = out.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m)
      if (!f.grid().kept(m)) comp[m] = cplx{};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inner products and simple measurements
// ---------------------------------------------------------------------------

/// <f, g> = (2π)^{-d} ∫ f·g dx, summed over components (Parseval).
inline double inner(const SpectralField& f, const SpectralField& g) {
  f.require_same_shape(g);
  const auto a = f.coeffs();
  const auto b = g.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

/// Root-mean-square L2 norm.
inline double l2_norm(const SpectralField& f) { return std::sqrt(inner(f, f)); }

/// Largest per-mode ratio |xi . u(xi)| / |u(xi)| over modes with u(xi) != 0.
inline double divergence_residual(const SpectralField& v) {
  if (v.rank() != Rank::vector) throw ConfigError("divergence_residual: expected a vector field");
  const int d = v.dim();
  double worst = 0.0;
  for (std::size_t m = 0; m < v.modes(); ++m) {
    cplx dot{};
    double amp2 = 0.0;
    for (int j = 0; j < d; ++j) {
      dot += v.grid().deriv(j)[m] * v(j, m);
      amp2 += std::norm(v(j, m));
    }
    if (amp2 > 0.0) worst = std::max(worst, std::abs(dot) / std::sqrt(amp2));
  }
  return worst;
}

/// Largest |c(xi) - conj(c(-xi))| over all coefficients.
inline double conjugate_symmetry_defect(const SpectralField& f) {
  double worst = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    const auto comp = f.component(c);
    for (std::size_t m = 0; m < f.modes(); ++m) {
      worst = std::max(worst, std::abs(comp[m] - std::conj(comp[f.grid().conjugate_index(m)])));
    }
  }
  return worst;
}

inline double max_abs(std::span<const cplx> z) {
  double w = 0.0;
  for (auto v : z) w = std::max(w, std::abs(v));
  return w;
}

inline double max_abs(std::span<const double> x) {
  double w = 0.0;
  for (auto v : x) w = std::max(w, std::abs(v));
  return w;
}

}  // namespace oldroyd
