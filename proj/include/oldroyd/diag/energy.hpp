#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "oldroyd/lp/norms.hpp"
#include "oldroyd/solver/state.hpp"

namespace oldroyd::diag {

/// Norms of one recorded state. Tensor norms use the full d x d Frobenius
/// magnitude (both off-diagonal entries counted).
struct EnergyRecord {
  double t = 0.0;
  double l2_u = 0.0;
  double l2_tau = 0.0;
  double h3_u = 0.0;
  double h3_tau = 0.0;
  double h2_grad_u = 0.0;
  double h2_grad_tau = 0.0;
  double h3_grad_tau = 0.0;
  double h1_grad2_u = 0.0;
  double h2_grad2_tau = 0.0;
  double balance_residual = 0.0;
  bool blowup = false;
  std::vector<double> besov;  // one value per configured Besov spec
};

inline EnergyRecord measure(const solver::FlowState& s) {
  const auto tau = s.tau.to_full();
  EnergyRecord r;
  r.t = s.t;
  r.l2_u = l2_norm(s.u);
  r.l2_tau = l2_norm(tau);
  r.h3_u = lp::sobolev_norm(s.u, 3.0);
  r.h3_tau = lp::sobolev_norm(tau, 3.0);
  r.h2_grad_u = lp::sobolev_grad_norm(s.u, 1, 2.0);
  r.h2_grad_tau = lp::sobolev_grad_norm(tau, 1, 2.0);
  r.h3_grad_tau = lp::sobolev_grad_norm(tau, 1, 3.0);
  r.h1_grad2_u = lp::sobolev_grad_norm(s.u, 2, 1.0);
  r.h2_grad2_tau = lp::sobolev_grad_norm(tau, 2, 2.0);
  return r;
}

inline constexpr const char* kRecordCsvHeader =
    "t,l2_u,l2_tau,h3_u,h3_tau,h2_grad_u,h2_grad_tau,h3_grad_tau,balance_residual,blowup";

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_records_csv(std::ostream& os, std::span<const EnergyRecord> records) {
  os << kRecordCsvHeader << '\n';
  for (const auto& r : records) {
    for (double v : {r.t, r.l2_u, r.l2_tau, r.h3_u, r.h3_tau, r.h2_grad_u, r.h2_grad_tau, r.h3_grad_tau, r.balance_residual})
      os << format_double(v) << ',';
    os << (r.blowup ? 1 : 0) << '\n';
  }
}

namespace detail {

inline void check_records(std::span<const EnergyRecord> rs) {
  if (rs.empty()) throw InputError("energy functional of an empty series");
  for (std::size_t i = 1; i < rs.size(); ++i)
    if (!(rs[i].t > rs[i - 1].t)) throw InputError("energy functional: times must be strictly increasing");
}

template <class Sup, class Integrand>
double sup_plus_integral(std::span<const EnergyRecord> rs, Sup sup, Integrand f) {
  check_records(rs);
  double s = 0.0;
  for (const auto& r : rs) s = std::max(s, sup(r));
  double integral = 0.0;
  for (std::size_t i = 1; i < rs.size(); ++i) integral += 0.5 * (rs[i].t - rs[i - 1].t) * (f(rs[i - 1]) + f(rs[i]));
  return s + integral;
}

}  // namespace detail

/// sup ||(u, tau)||_{H^3}^2 + int (||grad u||_{H^2}^2 + ||grad tau||_{H^3}^2) dt.
inline double energy_tilde_1(std::span<const EnergyRecord> rs) {
  return detail::sup_plus_integral(
      rs, [](const EnergyRecord& r) { return r.h3_u * r.h3_u + r.h3_tau * r.h3_tau; },
      [](const EnergyRecord& r) { return r.h2_grad_u * r.h2_grad_u + r.h3_grad_tau * r.h3_grad_tau; });
}

/// sup (1+t)^2 ||(grad u, grad tau)||_{H^2}^2
///   + int (1+t)^2 (||grad^2 u||_{H^1}^2 + ||grad^2 tau||_{H^2}^2) dt.
inline double energy_tilde_2(std::span<const EnergyRecord> rs) {
  return detail::sup_plus_integral(
      rs,
      [](const EnergyRecord& r) {
        return (1 + r.t) * (1 + r.t) * (r.h2_grad_u * r.h2_grad_u + r.h2_grad_tau * r.h2_grad_tau);
      },
      [](const EnergyRecord& r) {
        return (1 + r.t) * (1 + r.t) * (r.h1_grad2_u * r.h1_grad2_u + r.h2_grad2_tau * r.h2_grad2_tau);
      });
}

}  // namespace oldroyd::diag
