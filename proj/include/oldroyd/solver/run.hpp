#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "oldroyd/diag/balance.hpp"
#include "oldroyd/diag/energy.hpp"
#include "oldroyd/solver/initial.hpp"
#include "oldroyd/solver/stepper.hpp"

namespace oldroyd::solver {

struct RunOptions {
  bool track_balance = true;
  std::vector<lp::NormSpec> besov;           // evaluated on u and on tau, in that order
  std::optional<FlowState> initial;          // overrides make_initial_data
  std::function<void(const FlowState&, const diag::EnergyRecord&)> observer;
};

struct RunResult {
  std::vector<diag::EnergyRecord> records;
  std::vector<FlowState> snapshots;
  std::vector<double> step_defects;  // signed energy-identity defect per step
  long steps_taken = 0;
  bool blew_up = false;
  double blowup_time = 0.0;
  std::string blowup_reason;
  double final_time = 0.0;
  std::optional<FlowState> final_state;  // unset after a blow-up

  /// sum over steps of |defect| dt.
  double cumulative_balance(double dt) const {
    double s = 0.0;
    for (double d : step_defects) s += std::abs(d) * dt;
    return s;
  }
};

inline RunResult run(const SimConfig& cfg, RunOptions opts = {}) {
  validate(cfg);
  PeriodicGrid grid(cfg.dim, cfg.n);
  FlowState state = opts.initial ? *opts.initial : make_initial_data(cfg.init, grid, cfg.seed);
  if (!(state.grid() == grid)) throw ConfigError("initial state grid does not match the config");
  Stepper stepper(cfg, grid);

  std::optional<lp::DyadicLadder> ladder;
  if (!opts.besov.empty()) ladder = lp::build_ladder(grid, cfg.k0);

  RunResult res;
  auto record = [&](double residual) {
    auto r = diag::measure(state);
    r.balance_residual = residual;
    if (ladder) {
      const auto tau = state.tau.to_full();
      for (const auto& spec : opts.besov) {
        r.besov.push_back(lp::besov_norm(*ladder, state.u, spec));
        r.besov.push_back(lp::besov_norm(*ladder, tau, spec));
      }
    }
    if (opts.observer) opts.observer(state, r);
    res.records.push_back(std::move(r));
  };
  auto maybe_snapshot = [&](long i) {
    if (cfg.snapshot_stride > 0 && i % cfg.snapshot_stride == 0) res.snapshots.push_back(state);
  };

  record(0.0);
  maybe_snapshot(0);
  const long steps = cfg.steps();
  std::optional<diag::BalanceTerms> prev;
  if (opts.track_balance) prev = diag::balance_terms(state);
  double last_defect = 0.0;
  for (long i = 1; i <= steps; ++i) {
    try {
      stepper.step(state);
    } catch (const BlowUpError& e) {
      res.blew_up = true;
      res.blowup_time = e.time();
      res.blowup_reason = e.reason();
      diag::EnergyRecord marker;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      marker.t = e.time();
      marker.l2_u = marker.l2_tau = marker.h3_u = marker.h3_tau = nan;
      marker.h2_grad_u = marker.h2_grad_tau = marker.h3_grad_tau = nan;
      marker.h1_grad2_u = marker.h2_grad2_tau = marker.balance_residual = nan;
      marker.blowup = true;
      res.records.push_back(marker);
      break;
    }
    state.t = static_cast<double>(i) * cfg.dt;
    res.steps_taken = i;
    if (opts.track_balance) {
      const auto now = diag::balance_terms(state);
      last_defect = diag::balance_defect(*prev, now, cfg.dt, cfg);
      res.step_defects.push_back(last_defect);
      prev = now;
    }
    if (i % cfg.output_stride == 0 || i == steps) record(std::abs(last_defect));
    maybe_snapshot(i);
  }
  res.final_time = res.blew_up ? res.blowup_time : state.t;
  if (!res.blew_up) res.final_state = std::move(state);
  return res;
}

}  // namespace oldroyd::solver
