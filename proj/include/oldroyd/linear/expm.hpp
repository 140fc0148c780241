#pragma once

// Dense matrix exponential by scaling and squaring with a fixed (6,6) Padé
// approximant. Used as an oracle for the closed-form Green's matrix, so it
// deliberately shares nothing with linear/propagator.hpp.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace oldroyd::linear {

template <std::size_t N>
using Matrix = std::array<std::array<double, N>, N>;

template <std::size_t N>
Matrix<N> identity() {
  Matrix<N> m{};
  for (std::size_t i = 0; i < N; ++i) m[i][i] = 1.0;
  return m;
}

template <std::size_t N>
Matrix<N> multiply(const Matrix<N>& a, const Matrix<N>& b) {
  Matrix<N> c{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k)
      for (std::size_t j = 0; j < N; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

template <std::size_t N>
double norm_inf(const Matrix<N>& a) {
  double w = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    w = std::max(w, s);
  }
  return w;
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
template <std::size_t N>
Matrix<N> solve(Matrix<N> a, Matrix<N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("expm: singular Padé denominator");
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j < N; ++j) a[r][j] -= f * a[col][j];
      for (std::size_t j = 0; j < N; ++j) b[r][j] -= f * b[col][j];
    }
  }
  Matrix<N> x{};
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t ii = N; ii-- > 0;) {
      double s = b[ii][j];
      for (std::size_t k = ii + 1; k < N; ++k) s -= a[ii][k] * x[k][j];
      x[ii][j] = s / a[ii][ii];
    }
  }
  return x;
}

template <std::size_t N>
Matrix<N> expm(const Matrix<N>& a) {
  constexpr int q = 6;
  const double nrm = norm_inf(a);
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);

  Matrix<N> x{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) x[i][j] = a[i][j] * scale;

  Matrix<N> num = identity<N>();
  Matrix<N> den = identity<N>();
  Matrix<N> power = identity<N>();
  double c = 1.0;
  for (int k = 1; k <= q; ++k) {
    c *= static_cast<double>(q - k + 1) / static_cast<double>(k * (2 * q - k + 1));
    power = multiply(power, x);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        num[i][j] += c * power[i][j];
        den[i][j] += sign * c * power[i][j];
      }
  }
  Matrix<N> e = solve(den, num);
  for (int s = 0; s < squarings; ++s) e = multiply(e, e);
  return e;
}

}  // namespace oldroyd::linear
