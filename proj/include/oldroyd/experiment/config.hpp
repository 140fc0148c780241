#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oldroyd/diag/energy.hpp"
#include "oldroyd/lp/norms.hpp"
#include "oldroyd/solver/config.hpp"

namespace oldroyd::experiment {

enum class ScenarioKind { linear_verify, decay_smalldata, large_stress_probe, besov_track, convergence_study };

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::linear_verify:
      return "linear-verify";
    case ScenarioKind::decay_smalldata:
      return "decay-smalldata";
    case ScenarioKind::large_stress_probe:
      return "large-stress-probe";
    case ScenarioKind::besov_track:
      return "besov-track";
    case ScenarioKind::convergence_study:
      return "convergence-study";
  }
  return "?";
}

inline ScenarioKind parse_kind(const std::string& s) {
  for (auto k : {ScenarioKind::linear_verify, ScenarioKind::decay_smalldata, ScenarioKind::large_stress_probe,
                 ScenarioKind::besov_track, ScenarioKind::convergence_study})
    if (to_string(k) == s) return k;
  throw ConfigError("scenario: unknown kind '" + s + "'");
}

/// Parameters of the linear-verify scenario.
struct LinearParams {
  std::vector<double> times{0.0, 0.1, 1.0, 10.0};  // Green's matrix vs expm
  std::vector<double> decay_times{1.0, 2.0, 4.0};
  double band_lo = 1.0;
  double band_hi = 2.0;
  double tolerance = 1e-10;

  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

struct FitParams {
  std::optional<double> t_start;  // unset: default tail window
  double r2_min = 0.99;
  double safe_epsilon = 0.02;     // documented small-data envelope

  friend bool operator==(const FitParams&, const FitParams&) = default;
};

struct ConvergenceParams {
  int levels = 3;   // dt, dt/2, ..., dt/2^(levels-1)
  int refine = 8;   // reference step = finest dt / refine
  double order_lo = 1.8;
  double order_hi = 2.2;

  friend bool operator==(const ConvergenceParams&, const ConvergenceParams&) = default;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::decay_smalldata;
  solver::SimConfig config{};
  std::vector<double> sweep_u_h3;    // large-stress-probe amplitudes
  std::vector<lp::NormSpec> besov;   // besov-track norms
  bool track_balance = true;
  LinearParams linear{};
  FitParams fit{};
  ConvergenceParams convergence{};
  std::string out_dir = "out";

  friend bool operator==(const Scenario& a, const Scenario& b) {
    auto same_specs = [](const std::vector<lp::NormSpec>& x, const std::vector<lp::NormSpec>& y) {
      return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const lp::NormSpec& p, const lp::NormSpec& q) {
        return p.s == q.s && p.p == q.p && p.r == q.r && p.quadrature == q.quadrature;
      });
    };
    return a.kind == b.kind && a.config == b.config && a.sweep_u_h3 == b.sweep_u_h3 && same_specs(a.besov, b.besov) &&
           a.track_balance == b.track_balance && a.linear == b.linear && a.fit == b.fit &&
           a.convergence == b.convergence && a.out_dir == b.out_dir;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  if (v == "inf") return lp::kInf;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) throw ConfigError(key + ": malformed number '" + v + "'");
  return x;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) throw ConfigError(key + ": malformed integer '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
  return out;
}

inline std::string list_str(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + diag::format_double(xs[i]);
  return s;
}

inline std::string num(double v) { return v == lp::kInf ? "inf" : diag::format_double(v); }

// besov = s:p:r, s:p:r, ...
inline std::vector<lp::NormSpec> to_specs(const std::string& key, const std::string& v) {
  std::vector<lp::NormSpec> out;
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw ConfigError(key + ": expected entries of the form s:p:r, got '" + item + "'");
    lp::NormSpec spec;
    spec.s = to_double(key, parts[0]);
    spec.p = to_double(key, parts[1]);
    spec.r = to_double(key, parts[2]);
    spec.quadrature = spec.p != 2.0 && spec.p != lp::kInf;
    try {
      lp::validate(spec);
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
    out.push_back(spec);
  }
  return out;
}

inline std::string specs_str(const std::vector<lp::NormSpec>& specs) {
  std::string s;
  for (std::size_t i = 0; i < specs.size(); ++i)
    s += (i ? "," : "") + num(specs[i].s) + ":" + num(specs[i].p) + ":" + num(specs[i].r);
  return s;
}

}  // namespace detail

/// Resolved config text: every key with its effective value, fixed order.
/// Parsing it back yields the same Scenario.
inline std::string resolved_text(const Scenario& sc) {
  using detail::num;
  const auto& c = sc.config;
  std::ostringstream os;
  os << "scenario = " << to_string(sc.kind) << '\n'
     << "dim = " << c.dim << '\n'
     << "n = " << c.n << '\n'
     << "nu = " << num(c.nu) << '\n'
     << "alpha = " << num(c.alpha) << '\n'
     << "a = " << num(c.a) << '\n'
     << "dt = " << num(c.dt) << '\n'
     << "t_end = " << num(c.t_end) << '\n'
     << "output_stride = " << c.output_stride << '\n'
     << "snapshot_stride = " << c.snapshot_stride << '\n'
     << "seed = " << c.seed << '\n'
     << "k0 = " << c.k0 << '\n'
     << "nonlinear = " << (c.nonlinear ? "true" : "false") << '\n'
     << "init.u_h3 = " << num(c.init.u_h3) << '\n'
     << "init.tau_h3 = " << num(c.init.tau_h3) << '\n'
     << "init.div_free_tau = " << (c.init.div_free_tau ? "true" : "false") << '\n'
     << "init.spectrum_decay = " << num(c.init.spectrum_decay) << '\n'
     << "init.k_max = " << c.init.k_max << '\n'
     << "track_balance = " << (sc.track_balance ? "true" : "false") << '\n'
     << "sweep.u_h3 = " << detail::list_str(sc.sweep_u_h3) << '\n'
     << "besov = " << detail::specs_str(sc.besov) << '\n'
     << "linear.times = " << detail::list_str(sc.linear.times) << '\n'
     << "linear.decay_times = " << detail::list_str(sc.linear.decay_times) << '\n'
     << "linear.band_lo = " << num(sc.linear.band_lo) << '\n'
     << "linear.band_hi = " << num(sc.linear.band_hi) << '\n'
     << "linear.tolerance = " << num(sc.linear.tolerance) << '\n'
     << "fit.t_start = " << (sc.fit.t_start ? num(*sc.fit.t_start) : std::string()) << '\n'
     << "fit.r2_min = " << num(sc.fit.r2_min) << '\n'
     << "fit.safe_epsilon = " << num(sc.fit.safe_epsilon) << '\n'
     << "convergence.levels = " << sc.convergence.levels << '\n'
     << "convergence.refine = " << sc.convergence.refine << '\n'
     << "convergence.order_lo = " << num(sc.convergence.order_lo) << '\n'
     << "convergence.order_hi = " << num(sc.convergence.order_hi) << '\n'
     << "out_dir = " << sc.out_dir << '\n';
  return os.str();
}

/// Parses flat `key = value` text; `#` starts a comment. Unknown or repeated
/// keys, malformed values and missing kind-specific keys are ConfigErrors
/// whose message starts with the key name.
inline Scenario parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string val = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, val).second) throw ConfigError(key + ": given more than once");
  }

  Scenario sc;
  auto& c = sc.config;
  using namespace detail;
  using Setter = void (*)(Scenario&, const std::string&, const std::string&);
  static const std::map<std::string, Setter> setters{
      {"scenario", [](Scenario& s, const std::string&, const std::string& v) { s.kind = parse_kind(v); }},
      {"dim", [](Scenario& s, const std::string& k, const std::string& v) { s.config.dim = to_int<int>(k, v); }},
      {"n", [](Scenario& s, const std::string& k, const std::string& v) { s.config.n = to_int<int>(k, v); }},
      {"nu", [](Scenario& s, const std::string& k, const std::string& v) { s.config.nu = to_double(k, v); }},
      {"alpha", [](Scenario& s, const std::string& k, const std::string& v) { s.config.alpha = to_double(k, v); }},
      {"a", [](Scenario& s, const std::string& k, const std::string& v) { s.config.a = to_double(k, v); }},
      {"dt", [](Scenario& s, const std::string& k, const std::string& v) { s.config.dt = to_double(k, v); }},
      {"t_end", [](Scenario& s, const std::string& k, const std::string& v) { s.config.t_end = to_double(k, v); }},
      {"output_stride",
       [](Scenario& s, const std::string& k, const std::string& v) { s.config.output_stride = to_int<int>(k, v); }},
      {"snapshot_stride",
       [](Scenario& s, const std::string& k, const std::string& v) { s.config.snapshot_stride = to_int<int>(k, v); }},
      {"seed", [](Scenario& s, const std::string& k, const std::string& v) { s.config.seed = to_int<std::uint64_t>(k, v); }},
      {"k0", [](Scenario& s, const std::string& k, const std::string& v) { s.config.k0 = to_int<int>(k, v); }},
      {"nonlinear", [](Scenario& s, const std::string& k, const std::string& v) { s.config.nonlinear = to_bool(k, v); }},
      {"init.u_h3", [](Scenario& s, const std::string& k, const std::string& v) { s.config.init.u_h3 = to_double(k, v); }},
      {"init.tau_h3",
       [](Scenario& s, const std::string& k, const std::string& v) { s.config.init.tau_h3 = to_double(k, v); }},
      {"init.div_free_tau",
       [](Scenario& s, const std::string& k, const std::string& v) { s.config.init.div_free_tau = to_bool(k, v); }},
      {"init.spectrum_decay",
       [](Scenario& s, const std::string& k, const std::string& v) { s.config.init.spectrum_decay = to_double(k, v); }},
      {"init.k_max", [](Scenario& s, const std::string& k, const std::string& v) { s.config.init.k_max = to_int<int>(k, v); }},
      {"track_balance", [](Scenario& s, const std::string& k, const std::string& v) { s.track_balance = to_bool(k, v); }},
      {"sweep.u_h3", [](Scenario& s, const std::string& k, const std::string& v) { s.sweep_u_h3 = to_list(k, v); }},
      {"besov", [](Scenario& s, const std::string& k, const std::string& v) { s.besov = to_specs(k, v); }},
      {"linear.times", [](Scenario& s, const std::string& k, const std::string& v) { s.linear.times = to_list(k, v); }},
      {"linear.decay_times",
       [](Scenario& s, const std::string& k, const std::string& v) { s.linear.decay_times = to_list(k, v); }},
      {"linear.band_lo", [](Scenario& s, const std::string& k, const std::string& v) { s.linear.band_lo = to_double(k, v); }},
      {"linear.band_hi", [](Scenario& s, const std::string& k, const std::string& v) { s.linear.band_hi = to_double(k, v); }},
      {"linear.tolerance",
       [](Scenario& s, const std::string& k, const std::string& v) { s.linear.tolerance = to_double(k, v); }},
      {"fit.t_start",
       [](Scenario& s, const std::string& k, const std::string& v) {
         s.fit.t_start = v.empty() ? std::nullopt : std::optional<double>(to_double(k, v));
       }},
      {"fit.r2_min", [](Scenario& s, const std::string& k, const std::string& v) { s.fit.r2_min = to_double(k, v); }},
      {"fit.safe_epsilon",
       [](Scenario& s, const std::string& k, const std::string& v) { s.fit.safe_epsilon = to_double(k, v); }},
      {"convergence.levels",
       [](Scenario& s, const std::string& k, const std::string& v) { s.convergence.levels = to_int<int>(k, v); }},
      {"convergence.refine",
       [](Scenario& s, const std::string& k, const std::string& v) { s.convergence.refine = to_int<int>(k, v); }},
      {"convergence.order_lo",
       [](Scenario& s, const std::string& k, const std::string& v) { s.convergence.order_lo = to_double(k, v); }},
      {"convergence.order_hi",
       [](Scenario& s, const std::string& k, const std::string& v) { s.convergence.order_hi = to_double(k, v); }},
      {"out_dir",
       [](Scenario& s, const std::string& k, const std::string& v) {
         if (v.empty()) throw ConfigError(k + ": must not be empty");
         s.out_dir = v;
       }},
  };

  for (const auto& [key, val] : kv) {
    if (setters.find(key) == setters.end()) throw ConfigError(key + ": unknown key");
  }
  if (kv.find("scenario") == kv.end()) throw ConfigError("scenario: required key missing");
  for (const auto& [key, val] : kv) setters.at(key)(sc, key, val);

  solver::validate(c);
  switch (sc.kind) {
    case ScenarioKind::large_stress_probe:
      if (sc.sweep_u_h3.empty()) throw ConfigError("sweep.u_h3: required for large-stress-probe");
      if (!c.init.div_free_tau) throw ConfigError("init.div_free_tau: must be true for large-stress-probe");
      for (double v : sc.sweep_u_h3)
        if (!(v >= 0.0)) throw ConfigError("sweep.u_h3: amplitudes must be nonnegative");
      break;
    case ScenarioKind::besov_track:
      if (sc.besov.empty()) throw ConfigError("besov: required for besov-track");
      break;
    case ScenarioKind::linear_verify:
      if (sc.linear.times.empty()) throw ConfigError("linear.times: must not be empty");
      if (sc.linear.decay_times.empty()) throw ConfigError("linear.decay_times: must not be empty");
      for (double t : sc.linear.times)
        if (!(t >= 0.0)) throw ConfigError("linear.times: must be nonnegative");
      for (double t : sc.linear.decay_times)
        if (!(t > 0.0)) throw ConfigError("linear.decay_times: must be positive");
      if (!(sc.linear.band_lo > 0.0)) throw ConfigError("linear.band_lo: must be positive");
      if (!(sc.linear.band_hi >= sc.linear.band_lo)) throw ConfigError("linear.band_hi: must be >= linear.band_lo");
      if (!(sc.linear.tolerance > 0.0)) throw ConfigError("linear.tolerance: must be positive");
      break;
    case ScenarioKind::convergence_study:
      if (sc.convergence.levels < 2) throw ConfigError("convergence.levels: must be >= 2");
      if (sc.convergence.refine < 2) throw ConfigError("convergence.refine: must be >= 2");
      if (!(sc.convergence.order_lo <= sc.convergence.order_hi))
        throw ConfigError("convergence.order_lo: must not exceed convergence.order_hi");
      break;
    case ScenarioKind::decay_smalldata:
      break;
  }
  if (!(sc.fit.r2_min >= 0.0 && sc.fit.r2_min <= 1.0)) throw ConfigError("fit.r2_min: must lie in [0, 1]");
  return sc;
}

inline Scenario parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str());
}

}  // namespace oldroyd::experiment
