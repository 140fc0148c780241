#pragma once

#include <cmath>

#include "oldroyd/solver/config.hpp"
#include "oldroyd/solver/physics.hpp"

namespace oldroyd::diag {

/// Pointwise quantities entering the L^2 energy identity
///   d/dt E + nu ||grad tau||^2 + a ||tau||^2 = alpha W,
/// E = (||u||^2 + ||tau||^2)/2, W = <D tau + tau D, tau>.
struct BalanceTerms {
  double energy = 0.0;
  double grad_tau2 = 0.0;
  double tau2 = 0.0;
  double stretching = 0.0;  // W
};

/// W by grid quadrature of the physical fields.
inline double stretching_work(const solver::FlowState& s) {
  const auto tau = inverse_transform(s.tau.to_full());
  const auto gu = inverse_transform(grad(s.u));
  const int d = s.u.dim();
  const std::size_t N = s.u.modes();
  double acc = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    // tr((D tau + tau D) tau) = 2 tr(D tau tau)
    double tr = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double Dij = 0.5 * (gu[(i * d + j) * N + m] + gu[(j * d + i) * N + m]);
        double tt = 0.0;
        for (int k = 0; k < d; ++k) tt += tau[(j * d + k) * N + m] * tau[(k * d + i) * N + m];
        tr += Dij * tt;
      }
    acc += 2.0 * tr;
  }
  return acc / static_cast<double>(N);
}

inline BalanceTerms balance_terms(const solver::FlowState& s) {
  const auto tau = s.tau.to_full();
  BalanceTerms b;
  const double u2 = inner(s.u, s.u);
  b.tau2 = inner(tau, tau);
  b.energy = 0.5 * (u2 + b.tau2);
  const auto k2 = s.u.grid().k2();
  for (int c = 0; c < tau.components(); ++c) {
    const auto comp = tau.component(c);
    for (std::size_t m = 0; m < tau.modes(); ++m) b.grad_tau2 += k2[m] * std::norm(comp[m]);
  }
  b.stretching = stretching_work(s);
  return b;
}

/// Signed defect of the energy identity over one step, rates by the
/// trapezoid rule over the two end states.
inline double balance_defect(const BalanceTerms& b0, const BalanceTerms& b1, double dt, const solver::SimConfig& cfg) {
  const double dE = (b1.energy - b0.energy) / dt;
  const double diss = 0.5 * cfg.nu * (b0.grad_tau2 + b1.grad_tau2);
  const double damp = 0.5 * cfg.a * (b0.tau2 + b1.tau2);
  const double work = 0.5 * cfg.alpha * (b0.stretching + b1.stretching);
  return dE + diss + damp - work;
}

/// |dE/dt + nu ||grad tau||^2 + a ||tau||^2 - alpha W| between two states
/// one step apart.
inline double balance_residual(const solver::FlowState& s0, const solver::FlowState& s1, const solver::SimConfig& cfg) {
  if (!(s0.grid() == s1.grid())) throw InputError("balance_residual: states live on different grids");
  const double dt = s1.t - s0.t;
  if (!(dt > 0.0)) throw InputError("balance_residual: states must be ordered in time");
  return std::abs(balance_defect(balance_terms(s0), balance_terms(s1), dt, cfg));
}

}  // namespace oldroyd::diag
