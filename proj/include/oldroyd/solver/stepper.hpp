#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "oldroyd/solver/config.hpp"
#include "oldroyd/solver/physics.hpp"

namespace oldroyd::solver {

/// g1 = -u.grad u (not yet projected), g2 = -u.grad tau - g_alpha(tau, grad u);
/// both dealiased.
struct NonlinearTerms {
  SpectralField g1;
  SymmetricTensorField g2;
};

/// Integrating-factor Heun stepper for
///   u_t + P(u.grad u) = P div tau
///   tau_t + u.grad tau - nu Lap tau + g_alpha(tau, grad u) + a tau = D(u).
/// The diagonal factor E = exp(-(nu |xi|^2 + a) dt) acts on tau exactly;
/// everything else is explicit.
class Stepper {
 public:
  Stepper(const SimConfig& cfg, PeriodicGrid grid)
      : cfg_(cfg), grid_(std::move(grid)), d_(grid_.dim()), np_(packed_count(d_)), N_(grid_.size()) {
    validate(cfg_);
    if (grid_.dim() != cfg_.dim || grid_.n() != cfg_.n) throw ConfigError("stepper: grid does not match config");
    decay_.resize(N_);
    const auto k2 = grid_.k2();
    for (std::size_t m = 0; m < N_; ++m) decay_[m] = std::exp(-(cfg_.nu * k2[m] + cfg_.a) * cfg_.dt);
    const std::size_t nphys = static_cast<std::size_t>(d_ + d_ * d_ + np_ + np_ * d_ + d_ + np_);
    phys_.assign(nphys, CoeffVector(N_));
    ku1_.resize(d_ * N_);
    ku2_.resize(d_ * N_);
    kt1_.resize(np_ * N_);
    kt2_.resize(np_ * N_);
    us_.resize(d_ * N_);
    ts_.resize(np_ * N_);
  }

  const SimConfig& config() const noexcept { return cfg_; }
  const PeriodicGrid& grid() const noexcept { return grid_; }

  /// Largest pointwise |u| seen by the most recent step.
  double last_max_velocity() const noexcept { return umax_; }

  NonlinearTerms rhs_nonlinear(const FlowState& s) {
    NonlinearTerms out{SpectralField(grid_, Rank::vector), SymmetricTensorField(grid_)};
    nonlinear(s.u.coeffs(), s.tau.coeffs(), out.g1.coeffs(), out.g2.coeffs());
    out.g1.flags() = {};
    return out;
  }

  /// One step of size dt. Throws BlowUpError on non-finite data or when the
  /// advective CFL bound dt <= 0.5 / (n max|u|) is violated.
  void step(FlowState& s) {
    auto u = s.u.coeffs();
    auto tau = s.tau.coeffs();
    const double dt = cfg_.dt;

    rates(u, tau, ku1_, kt1_);
    if (cfg_.nonlinear && umax_ * cfg_.n * dt > 0.5) throw BlowUpError(s.t, "cfl");
    for (std::size_t i = 0; i < us_.size(); ++i) us_[i] = u[i] + dt * ku1_[i];
    for (int p = 0; p < np_; ++p)
      for (std::size_t m = 0; m < N_; ++m) {
        const std::size_t i = p * N_ + m;
        ts_[i] = decay_[m] * (tau[i] + dt * kt1_[i]);
      }
    const double umax_start = umax_;
    rates(us_, ts_, ku2_, kt2_);
    umax_ = std::max(umax_, umax_start);

    for (std::size_t i = 0; i < us_.size(); ++i) u[i] += 0.5 * dt * (ku1_[i] + ku2_[i]);
    for (int p = 0; p < np_; ++p)
      for (std::size_t m = 0; m < N_; ++m) {
        const std::size_t i = p * N_ + m;
        tau[i] = decay_[m] * (tau[i] + 0.5 * dt * kt1_[i]) + 0.5 * dt * kt2_[i];
      }
    clean(s);
    s.t += dt;
    for (const cplx& z : s.u.coeffs())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw BlowUpError(s.t, "non-finite velocity");
    for (const cplx& z : s.tau.coeffs())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw BlowUpError(s.t, "non-finite stress");
  }

  /// Re-projects u, applies the 2/3 mask to both fields.
  void clean(FlowState& s) const {
    std::array<double, 3> xm{};
    for (std::size_t m = 0; m < N_; ++m) {
      if (!grid_.kept(m)) {
        for (int i = 0; i < d_; ++i) s.u(i, m) = cplx{};
        for (int p = 0; p < np_; ++p) s.tau.packed(p)[m] = cplx{};
        continue;
      }
      for (int j = 0; j < d_; ++j) xm[j] = grid_.deriv(j)[m];
      oldroyd::detail::project_mode(&s.u(0, m), N_, std::span<const double>(xm.data(), d_), d_);
    }
    s.u.flags().divergence_free = true;
  }

 private:
  // Physical-space products; g1, g2 receive dealiased coefficients.
  void nonlinear(std::span<const cplx> u, std::span<const cplx> tau, std::span<cplx> g1, std::span<cplx> g2) {
    const int d = d_;
    std::size_t slot = 0;
    auto* pu = &phys_[slot];
    slot += d;
    auto* pg = &phys_[slot];
    slot += d * d;
    auto* pt = &phys_[slot];
    slot += np_;
    auto* pdt = &phys_[slot];
    slot += np_ * d;
    auto* o1 = &phys_[slot];
    slot += d;
    auto* o2 = &phys_[slot];

    for (int i = 0; i < d; ++i) {
      const auto ui = u.subspan(i * N_, N_);
      detail::synthesize(grid_, ui, -1, pu[i]);
      for (int j = 0; j < d; ++j) detail::synthesize(grid_, ui, j, pg[i * d + j]);
    }
    for (int p = 0; p < np_; ++p) {
      const auto tp = tau.subspan(p * N_, N_);
      detail::synthesize(grid_, tp, -1, pt[p]);
      for (int k = 0; k < d; ++k) detail::synthesize(grid_, tp, k, pdt[p * d + k]);
    }

    double T[9], G[9], R[9], U[3];
    double umax2 = 0.0;
    for (std::size_t m = 0; m < N_; ++m) {
      double s2 = 0.0;
      for (int i = 0; i < d; ++i) {
        U[i] = pu[i][m].real();
        s2 += U[i] * U[i];
      }
      umax2 = std::max(umax2, s2);
      for (int c = 0; c < d * d; ++c) G[c] = pg[c][m].real();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) T[i * d + j] = pt[packed_index(i, j, d)][m].real();
      for (int i = 0; i < d; ++i) {
        double adv = 0.0;
        for (int j = 0; j < d; ++j) adv += U[j] * G[i * d + j];
        o1[i][m] = -adv;
      }
      detail::g_alpha_point(d, T, G, cfg_.alpha, R);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
          const int p = packed_index(i, j, d);
          double adv = 0.0;
          for (int k = 0; k < d; ++k) adv += U[k] * pdt[p * d + k][m].real();
          o2[p][m] = -adv - 0.5 * (R[i * d + j] + R[j * d + i]);
        }
    }
    umax_ = std::sqrt(umax2);
    for (int i = 0; i < d; ++i) detail::analyze(grid_, o1[i], g1.subspan(i * N_, N_));
    for (int p = 0; p < np_; ++p) detail::analyze(grid_, o2[p], g2.subspan(p * N_, N_));
  }

  // Explicit right-hand side: ru = P(g1 + div tau) with zero mean,
  // rt = g2 + D(u).
  void rates(std::span<const cplx> u, std::span<const cplx> tau, std::span<cplx> ru, std::span<cplx> rt) {
    const int d = d_;
    if (cfg_.nonlinear) {
      nonlinear(u, tau, ru, rt);
    } else {
      std::fill(ru.begin(), ru.end(), cplx{});
      std::fill(rt.begin(), rt.end(), cplx{});
      umax_ = 0.0;
    }
    const cplx I(0.0, 1.0);
    std::array<double, 3> xm{};
    for (std::size_t m = 0; m < N_; ++m) {
      for (int j = 0; j < d; ++j) xm[j] = grid_.deriv(j)[m];
      for (int i = 0; i < d; ++i) {
        cplx div{};
        for (int j = 0; j < d; ++j) div += xm[j] * tau[packed_index(i, j, d) * N_ + m];
        ru[i * N_ + m] += I * div;
      }
      oldroyd::detail::project_mode(&ru[m], N_, std::span<const double>(xm.data(), d), d);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          rt[packed_index(i, j, d) * N_ + m] += 0.5 * I * (xm[j] * u[i * N_ + m] + xm[i] * u[j * N_ + m]);
    }
    for (int i = 0; i < d; ++i) ru[i * N_] = cplx{};  // the mean of u is conserved
  }

  SimConfig cfg_;
  PeriodicGrid grid_;
  int d_;
  int np_;
  std::size_t N_;
  std::vector<double> decay_;
  std::vector<CoeffVector> phys_;
  CoeffVector ku1_, ku2_, kt1_, kt2_, us_, ts_;
  double umax_ = 0.0;
};

}  // namespace oldroyd::solver
