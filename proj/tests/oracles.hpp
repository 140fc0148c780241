#pragma once

// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library's transforms or multipliers.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline int wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

/// Direct O(N^2) normalised DFT of row-major samples on an n^d grid.
inline std::vector<cplx> naive_dft(const std::vector<double>& x, int dim, int n) {
  std::size_t size = 1;
  for (int a = 0; a < dim; ++a) size *= static_cast<std::size_t>(n);
  std::vector<cplx> out(size);
  auto split = [&](std::size_t m, std::array<int, 3>& idx) {
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(m % static_cast<std::size_t>(n));
      m /= static_cast<std::size_t>(n);
    }
  };
  std::array<int, 3> kx{}, px{};
  for (std::size_t k = 0; k < size; ++k) {
    split(k, kx);
    cplx s{};
    for (std::size_t p = 0; p < size; ++p) {
      split(p, px);
      long phase = 0;
      for (int a = 0; a < dim; ++a) phase += static_cast<long>(kx[a]) * px[a];
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(phase % n) / n;
      s += x[p] * cplx(std::cos(ang), std::sin(ang));
    }
    out[k] = s / static_cast<double>(size);
  }
  return out;
}

inline std::vector<double> random_samples(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(count);
  for (auto& v : x) v = u(rng);
  return x;
}

/// Roots of x^2 - tr x + det by the textbook quadratic formula.
inline std::array<double, 2> eig2(double tr, double det) {
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

/// Taylor series of exp(A) for 2x2 A, summed with repeated halving; used
/// only for small |A| where the series converges rapidly.
inline std::array<std::array<double, 2>, 2> exp2x2_taylor(std::array<std::array<double, 2>, 2> a) {
  int halvings = 0;
  double nrm = std::abs(a[0][0]) + std::abs(a[0][1]) + std::abs(a[1][0]) + std::abs(a[1][1]);
  while (nrm > 0.1) {
    nrm *= 0.5;
    ++halvings;
  }
  const double sc = std::ldexp(1.0, -halvings);
  for (auto& r : a)
    for (auto& v : r) v *= sc;
  std::array<std::array<double, 2>, 2> sum{{{1, 0}, {0, 1}}}, term{{{1, 0}, {0, 1}}};
  for (int k = 1; k < 30; ++k) {
    std::array<std::array<double, 2>, 2> nt{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) nt[i][j] = (term[i][0] * a[0][j] + term[i][1] * a[1][j]) / k;
    term = nt;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sum[i][j] += term[i][j];
  }
  for (int s = 0; s < halvings; ++s) {
    std::array<std::array<double, 2>, 2> sq{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) sq[i][j] = sum[i][0] * sum[0][j] + sum[i][1] * sum[1][j];
    sum = sq;
  }
  return sum;
}

}  // namespace oracle
