#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "oldroyd/operators.hpp"
#include "oldroyd/solver/state.hpp"

namespace oldroyd::solver {

namespace detail {

// out = physical samples of the coefficient block c, differentiated along
// `axis` when axis >= 0.
inline void synthesize(const PeriodicGrid& g, std::span<const cplx> c, int axis, std::span<cplx> out) {
  if (axis < 0) {
    std::copy(c.begin(), c.end(), out.begin());
  } else {
    const auto xi = g.deriv(axis);
    for (std::size_t m = 0; m < c.size(); ++m) out[m] = cplx(-xi[m] * c[m].imag(), xi[m] * c[m].real());
  }
  g.backward(out);
}

// Physical samples in `buf` (destroyed) to normalised, dealiased coefficients.
inline void analyze(const PeriodicGrid& g, std::span<cplx> buf, std::span<cplx> out) {
  g.forward(buf);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t m = 0; m < buf.size(); ++m) out[m] = g.kept(m) ? buf[m] * scale : cplx{};
}

// Pointwise g_alpha = T W - W T - alpha (D T + T D) for full row-major d x d
// matrices; grad[i*d + j] = d_j u_i.
inline void g_alpha_point(int d, const double* T, const double* grad, double alpha, double* out) {
  double D[9], W[9];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      D[i * d + j] = 0.5 * (grad[i * d + j] + grad[j * d + i]);
      W[i * d + j] = 0.5 * (grad[i * d + j] - grad[j * d + i]);
    }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double tw = 0.0, wt = 0.0, dt = 0.0, td = 0.0;
      for (int k = 0; k < d; ++k) {
        tw += T[i * d + k] * W[k * d + j];
        wt += W[i * d + k] * T[k * d + j];
        dt += D[i * d + k] * T[k * d + j];
        td += T[i * d + k] * D[k * d + j];
      }
      out[i * d + j] = tw - wt - alpha * (dt + td);
    }
}

}  // namespace detail

struct StrainVorticity {
  SpectralField D;      // (grad u + grad u^T)/2
  SpectralField Omega;  // (grad u - grad u^T)/2
};

inline StrainVorticity strain_and_vorticity(const SpectralField& u) {
  if (u.rank() != Rank::vector) throw ConfigError("strain_and_vorticity: expected a vector field");
  const auto g = grad(u);
  SpectralField D(u.grid(), Rank::tensor), W(u.grid(), Rank::tensor);
  const int d = u.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const auto gij = g.component(i, j);
      const auto gji = g.component(j, i);
      auto dij = D.component(i, j);
      auto wij = W.component(i, j);
      for (std::size_t m = 0; m < u.modes(); ++m) {
        dij[m] = 0.5 * (gij[m] + gji[m]);
        wij[m] = 0.5 * (gij[m] - gji[m]);
      }
    }
  D.flags().symmetric = true;
  return {std::move(D), std::move(W)};
}

/// g_alpha(tau, grad u) = tau Omega - Omega tau - alpha (D tau + tau D),
/// formed pointwise on the grid and dealiased.
inline SymmetricTensorField g_alpha(const SymmetricTensorField& tau, const SpectralField& u, double alpha) {
  if (u.rank() != Rank::vector) throw ConfigError("g_alpha: expected a vector velocity");
  if (!(tau.grid() == u.grid())) throw ConfigError("g_alpha: grid mismatch");
  const auto& g = u.grid();
  const int d = g.dim();
  const std::size_t N = g.size();
  std::vector<CoeffVector> T(static_cast<std::size_t>(d * d), CoeffVector(N));
  std::vector<CoeffVector> G(static_cast<std::size_t>(d * d), CoeffVector(N));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      detail::synthesize(g, tau.component(i, j), -1, T[i * d + j]);
      detail::synthesize(g, u.component(i), j, G[i * d + j]);
    }
  std::vector<CoeffVector> out(static_cast<std::size_t>(packed_count(d)), CoeffVector(N));
  double t[9], gr[9], r[9];
  for (std::size_t m = 0; m < N; ++m) {
    for (int c = 0; c < d * d; ++c) {
      t[c] = T[c][m].real();
      gr[c] = G[c][m].real();
    }
    detail::g_alpha_point(d, t, gr, alpha, r);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) out[packed_index(i, j, d)][m] = 0.5 * (r[i * d + j] + r[j * d + i]);
  }
  SymmetricTensorField res(g);
  for (int p = 0; p < packed_count(d); ++p) detail::analyze(g, out[p], res.packed(p));
  return res;
}

}  // namespace oldroyd::solver
