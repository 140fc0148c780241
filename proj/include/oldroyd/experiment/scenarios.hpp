#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <istream>
#include <set>
#include <sstream>
#include <thread>

#include "oldroyd/experiment/config.hpp"
#include "oldroyd/experiment/outputs.hpp"
#include "oldroyd/linear/propagator.hpp"
#include "oldroyd/lp/ladder.hpp"
#include "oldroyd/solver/run.hpp"

namespace oldroyd::experiment {

struct ScenarioResult {
  bool pass = false;
  json summary;
  Artifacts artifacts;
};

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

inline double combined(double a, double b) { return std::hypot(a, b); }

inline json spec_json(const lp::NormSpec& s) {
  return json{{"s", s.s}, {"p", s.p == lp::kInf ? json("inf") : json(s.p)}, {"r", s.r}};
}

// ---------------------------------------------------------------------------

inline ScenarioResult linear_verify(const Scenario& sc) {
  ScenarioResult res;
  const auto& lin = sc.linear;
  PeriodicGrid grid(sc.config.dim, sc.config.n);

  std::set<double> radii2(grid.k2().begin(), grid.k2().end());
  std::ostringstream kernels;
  kernels << "t,rho,g1,g2,g3,expm_rel_err\n";
  double worst = 0.0;
  for (double t : lin.times)
    for (double r2 : radii2) {
      const double rho = std::sqrt(r2);
      const auto closed = linear::green_matrix(t, rho);
      auto a = linear::ModeMatrix{r2}.matrix();
      for (auto& row : a)
        for (auto& v : row) v *= t;
      const auto ref = linear::expm(a);
      double num = 0.0, den = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          num = std::max(num, std::abs(closed[i][j] - ref[i][j]));
          den = std::max(den, std::abs(ref[i][j]));
        }
      const double rel = num / den;
      worst = std::max(worst, rel);
      const auto g = linear::green_kernels(t, rho);
      kernels << diag::format_double(t) << ',' << diag::format_double(rho) << ',' << diag::format_double(g.g1) << ','
              << diag::format_double(g.g2) << ',' << diag::format_double(g.g3) << ',' << diag::format_double(rel) << '\n';
    }

  std::ostringstream decay;
  decay << "kernel,p,t,ratio\n";
  json decay_summary = json::array();
  for (double p : {2.0, lp::kInf}) {
    const auto rep = linear::verify_decay_bound(grid, lin.band_lo, lin.band_hi, p, lin.decay_times, sc.config.seed);
    for (const auto& kd : rep.kernels) {
      for (const auto& s : kd.samples)
        decay << 'G' << kd.kernel << ',' << num(p) << ',' << diag::format_double(s.t) << ','
              << diag::format_double(s.ratio) << '\n';
      decay_summary.push_back({{"kernel", "G" + std::to_string(kd.kernel)},
                               {"p", p == lp::kInf ? json("inf") : json(p)},
                               {"fitted_c", kd.fitted_c},
                               {"fitted_C", kd.fitted_C},
                               {"rate_positive", kd.dominated},
                               {"monotone", kd.monotone}});
    }
  }

  res.pass = worst <= lin.tolerance;
  res.summary = json{{"scenario", to_string(sc.kind)},
                     {"n", sc.config.n},
                     {"dim", sc.config.dim},
                     {"max_rel_mismatch", worst},
                     {"tolerance", lin.tolerance},
                     {"radii", radii2.size()},
                     {"band", {lin.band_lo, lin.band_hi}},
                     {"decay", decay_summary},
                     {"pass", res.pass}};
  res.artifacts.add("kernels.csv", kernels.str());
  res.artifacts.add("decay.csv", decay.str());
  return res;
}

// ---------------------------------------------------------------------------

inline ScenarioResult decay_smalldata(const Scenario& sc) {
  ScenarioResult res;
  solver::RunOptions opts;
  opts.track_balance = sc.track_balance;
  const auto run = solver::run(sc.config, opts);
  const auto& rs = run.records;
  add_records(res.artifacts, "records.csv", rs);

  json failures = json::array();
  const double eps0 = combined(rs.front().h3_u, rs.front().h3_tau);
  double sup = 0.0, worst_balance = 0.0;
  for (const auto& r : rs)
    if (!r.blowup) {
      sup = std::max(sup, combined(r.h3_u, r.h3_tau));
      worst_balance = std::max(worst_balance, r.balance_residual);
    }
  const double growth = eps0 > 0.0 ? sup / eps0 : 0.0;
  if (run.blew_up) failures.push_back("blow-up at t=" + diag::format_double(run.blowup_time) + " (" + run.blowup_reason + ")");
  if (growth > 2.0) failures.push_back("sup H3 norm exceeds twice the initial norm");

  json fits = json::array();
  if (!run.blew_up) {
    std::vector<double> t, hu, hgt;
    for (const auto& r : rs) {
      t.push_back(r.t);
      hu.push_back(r.h3_u);
      hgt.push_back(r.h2_grad_tau);
    }
    const diag::FitWindow window{sc.fit.t_start, {}};
    for (const auto& [name, series] : {std::pair{"h3_u", &hu}, std::pair{"h2_grad_tau", &hgt}}) {
      try {
        const auto f = diag::fit_decay_rate(t, *series, window);
        fits.push_back(fit_json(name, f));
        if (!(f.rate > 0.0)) failures.push_back(std::string(name) + ": fitted rate is not positive");
        if (!(f.r2 >= sc.fit.r2_min)) failures.push_back(std::string(name) + ": r2 below threshold");
      } catch (const InputError& e) {
        failures.push_back(std::string(name) + ": " + e.what());
      }
    }
  }
  res.artifacts.add("fit.json", dump(fits));

  res.pass = failures.empty();
  res.summary = json{{"scenario", to_string(sc.kind)},
                     {"epsilon", eps0},
                     {"within_safe_envelope", eps0 <= sc.fit.safe_epsilon},
                     {"completed", !run.blew_up},
                     {"final_time", run.final_time},
                     {"sup_h3_over_initial", growth},
                     {"max_balance_residual", worst_balance},
                     {"fits", fits},
                     {"failures", failures},
                     {"pass", res.pass}};
  return res;
}

// ---------------------------------------------------------------------------

inline ScenarioResult large_stress_probe(const Scenario& sc, int threads) {
  if (!sc.config.init.div_free_tau) throw ConfigError("init.div_free_tau: must be true for large-stress-probe");
  ScenarioResult res;
  const std::size_t count = sc.sweep_u_h3.size();
  std::vector<solver::RunResult> runs(count);
  parallel_for(count, threads, [&](std::size_t i) {
    solver::SimConfig c = sc.config;
    c.init.u_h3 = sc.sweep_u_h3[i];
    solver::RunOptions opts;
    opts.track_balance = sc.track_balance;
    runs[i] = solver::run(c, opts);
  });

  std::ostringstream probe;
  probe << "u_h3,horizon,reached_end,blowup,blowup_reason,sup_h3_u,final_h3_u,sup_h3_tau\n";
  json members = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = runs[i];
    double sup_u = 0.0, sup_t = 0.0, last_u = 0.0;
    for (const auto& rec : r.records)
      if (!rec.blowup) {
        sup_u = std::max(sup_u, rec.h3_u);
        sup_t = std::max(sup_t, rec.h3_tau);
        last_u = rec.h3_u;
      }
    const bool reached = !r.blew_up;
    probe << diag::format_double(sc.sweep_u_h3[i]) << ',' << diag::format_double(r.final_time) << ',' << (reached ? 1 : 0)
          << ',' << (r.blew_up ? 1 : 0) << ',' << r.blowup_reason << ',' << diag::format_double(sup_u) << ','
          << diag::format_double(last_u) << ',' << diag::format_double(sup_t) << '\n';
    members.push_back({{"u_h3", sc.sweep_u_h3[i]},
                       {"horizon", r.final_time},
                       {"reached_end", reached},
                       {"blowup_reason", r.blowup_reason},
                       {"sup_h3_u", sup_u},
                       {"final_h3_u", last_u},
                       {"sup_h3_tau", sup_t}});
    add_records(res.artifacts, "records_" + std::to_string(i) + ".csv", r.records);
  }
  res.artifacts.add("probe.csv", probe.str());
  res.pass = true;  // blow-up is a datum here
  res.summary = json{{"scenario", to_string(sc.kind)},
                     {"tau_h3", sc.config.init.tau_h3},
                     {"t_end", sc.config.t_end},
                     {"members", members},
                     {"pass", true}};
  return res;
}

// ---------------------------------------------------------------------------

inline ScenarioResult besov_track(const Scenario& sc) {
  ScenarioResult res;
  const PeriodicGrid grid(sc.config.dim, sc.config.n);
  const auto ladder = lp::build_ladder(grid, sc.config.k0);
  std::ostringstream csv;
  csv << "t";
  for (std::size_t i = 0; i < sc.besov.size(); ++i)
    for (const char* part : {"u", "tau", "u_low", "u_high", "tau_low", "tau_high"}) csv << ",b" << i << '_' << part;
  csv << '\n';

  solver::RunOptions opts;
  opts.track_balance = sc.track_balance;
  opts.observer = [&](const solver::FlowState& s, const diag::EnergyRecord&) {
    const auto tau = s.tau.to_full();
    const auto su = lp::low_high_split(ladder, s.u);
    const auto st = lp::low_high_split(ladder, tau);
    csv << diag::format_double(s.t);
    for (const auto& spec : sc.besov)
      for (const SpectralField* f : {&s.u, &tau, &su.low, &su.high, &st.low, &st.high})
        csv << ',' << diag::format_double(lp::besov_norm(ladder, *f, spec));
    csv << '\n';
  };
  const auto run = solver::run(sc.config, opts);
  add_records(res.artifacts, "records.csv", run.records);
  res.artifacts.add("besov.csv", csv.str());

  json specs = json::array();
  for (const auto& s : sc.besov) specs.push_back(spec_json(s));
  res.pass = !run.blew_up;
  res.summary = json{{"scenario", to_string(sc.kind)},
                     {"k0", sc.config.k0},
                     {"blocks", {ladder.k_min(), ladder.k_max()}},
                     {"norms", specs},
                     {"completed", !run.blew_up},
                     {"final_time", run.final_time},
                     {"pass", res.pass}};
  return res;
}

// ---------------------------------------------------------------------------

inline ScenarioResult convergence_study(const Scenario& sc, int threads) {
  ScenarioResult res;
  const auto& cv = sc.convergence;
  const PeriodicGrid grid(sc.config.dim, sc.config.n);
  const solver::FlowState init = solver::make_initial_data(sc.config.init, grid, sc.config.seed);

  std::vector<double> dts;
  for (int i = 0; i < cv.levels; ++i) dts.push_back(std::ldexp(sc.config.dt, -i));
  dts.push_back(dts.back() / cv.refine);  // reference
  std::vector<std::optional<solver::FlowState>> finals(dts.size());
  parallel_for(dts.size(), threads, [&](std::size_t i) {
    solver::SimConfig c = sc.config;
    c.dt = dts[i];
    solver::validate(c);
    solver::Stepper st(c, grid);
    solver::FlowState s = init;
    for (long k = 0; k < c.steps(); ++k) st.step(s);
    finals[i] = std::move(s);
  });

  const auto& ref = *finals.back();
  std::vector<double> errors;
  for (int i = 0; i < cv.levels; ++i) {
    const auto& s = *finals[static_cast<std::size_t>(i)];
    const auto du = s.u - ref.u;
    const auto dtau = s.tau.to_full() - ref.tau.to_full();
    errors.push_back(std::sqrt(inner(du, du) + inner(dtau, dtau)));
  }

  std::ostringstream csv;
  csv << "dt,error,order\n";
  json table = json::array();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < cv.levels; ++i) {
    const double x = std::log(dts[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    csv << diag::format_double(dts[i]) << ',' << diag::format_double(errors[i]) << ',';
    json row{{"dt", dts[i]}, {"error", errors[i]}};
    if (i > 0) {
      const double o = std::log2(errors[i - 1] / errors[i]);
      csv << diag::format_double(o);
      row["order"] = o;
    }
    csv << '\n';
    table.push_back(row);
  }
  const double m = cv.levels;
  const double order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  res.pass = std::isfinite(order) && order >= cv.order_lo && order <= cv.order_hi;
  res.artifacts.add("convergence.csv", csv.str());
  res.summary = json{{"scenario", to_string(sc.kind)},
                     {"reference_dt", dts.back()},
                     {"t_end", sc.config.t_end},
                     {"table", table},
                     {"measured_order", order},
                     {"order_range", {cv.order_lo, cv.order_hi}},
                     {"pass", res.pass}};
  return res;
}

}  // namespace detail

/// Runs one scenario and collects its artifacts (config.resolved,
/// summary.json and the kind-specific files). Nothing is written to disk.
/// Blow-up inside decay-smalldata or convergence-study counts as a failure.
inline ScenarioResult run_scenario(const Scenario& sc, int threads = 1) {
  ScenarioResult res;
  switch (sc.kind) {
    case ScenarioKind::linear_verify:
      res = detail::linear_verify(sc);
      break;
    case ScenarioKind::decay_smalldata:
      res = detail::decay_smalldata(sc);
      break;
    case ScenarioKind::large_stress_probe:
      res = detail::large_stress_probe(sc, threads);
      break;
    case ScenarioKind::besov_track:
      res = detail::besov_track(sc);
      break;
    case ScenarioKind::convergence_study:
      try {
        res = detail::convergence_study(sc, threads);
      } catch (const BlowUpError& e) {
        res.pass = false;
        res.summary = json{{"scenario", to_string(sc.kind)}, {"failures", {e.what()}}, {"pass", false}};
      }
      break;
  }
  const std::string resolved = resolved_text(sc);
  res.artifacts.files.insert(res.artifacts.files.begin(), Artifact{"config.resolved", resolved});
  res.artifacts.add("summary.json", dump(res.summary));
  res.artifacts.config_hash = hex64(fnv1a(resolved));
  res.artifacts.seed = sc.config.seed;
  res.artifacts.scenario = to_string(sc.kind);
  return res;
}

// ---------------------------------------------------------------------------
// Fitting a recorded CSV
// ---------------------------------------------------------------------------

/// Decay fits of the named columns of a record CSV against its `t` column.
/// Rows flagged as blow-up are skipped. Unknown columns are ConfigErrors;
/// fit failures propagate as InputError.
inline json fit_records_csv(std::istream& in, const std::vector<std::string>& columns, const diag::FitWindow& window) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("fit: empty CSV");
  const auto header = detail::split(line, ',');
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("column: '" + name + "' not in CSV header");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t tcol = col("t");
  const auto bit = std::find(header.begin(), header.end(), "blowup");
  std::vector<std::size_t> idx;
  for (const auto& c : columns) idx.push_back(col(c));
  std::vector<double> t;
  std::vector<std::vector<double>> vals(columns.size());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size()) throw InputError("fit: row " + std::to_string(row) + " has the wrong number of fields");
    if (bit != header.end() && cells[static_cast<std::size_t>(bit - header.begin())] == "1") continue;
    auto number = [&](std::size_t c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str()) throw InputError("fit: row " + std::to_string(row) + " has a malformed number");
      return v;
    };
    t.push_back(number(tcol));
    for (std::size_t k = 0; k < idx.size(); ++k) vals[k].push_back(number(idx[k]));
  }
  json out = json::array();
  for (std::size_t k = 0; k < columns.size(); ++k) out.push_back(fit_json(columns[k], diag::fit_decay_rate(t, vals[k], window)));
  return out;
}

}  // namespace oldroyd::experiment
