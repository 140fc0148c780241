#pragma once

#include "oldroyd/solver/config.hpp"
#include "oldroyd/solver/state.hpp"

namespace oldroyd::diag {

struct DerivedFields {
  SpectralField delta;  // Lambda^{-1} div Q tau
  SpectralField G;      // -Q tau - 1/2 grad Lap^{-1} u
  SpectralField v;      // Lambda^{-1} P div tau
};

inline DerivedFields derived_fields(const solver::FlowState& s) {
  const auto tau = s.tau.to_full();
  const auto [P, Q] = helmholtz_tensor(tau);
  SpectralField delta = lambda_power(div_tensor(Q), -1.0);
  SpectralField G = grad(inv_laplacian(s.u));
  G *= -0.5;
  G -= Q;
  SpectralField v = lambda_power(leray_project(div_tensor(tau)), -1.0);
  return {std::move(delta), std::move(G), std::move(v)};
}

/// Right-hand side of the linearised evolution of G,
///   G_t = nu Lap G + (nu - 1)/2 grad u + a Q tau - 1/2 grad Lap^{-1} P div tau,
/// i.e. without the nonlinear sources (the grad u term vanishes for nu = 1).
inline SpectralField g_equation_rhs(const solver::FlowState& s, const solver::SimConfig& cfg) {
  const auto tau = s.tau.to_full();
  const auto Q = helmholtz_tensor(tau).Q;
  SpectralField rhs = laplacian(derived_fields(s).G);
  rhs *= cfg.nu;
  SpectralField damp = Q;
  damp *= cfg.a;
  rhs += damp;
  SpectralField src = grad(inv_laplacian(leray_project(div_tensor(tau))));
  src *= -0.5;
  rhs += src;
  SpectralField gu = grad(s.u);
  gu *= 0.5 * (cfg.nu - 1.0);
  rhs += gu;
  return rhs;
}

}  // namespace oldroyd::diag
