#pragma once

#include <span>
#include <utility>
#include <vector>

#include "oldroyd/field.hpp"

namespace oldroyd::solver {

/// Index of (i, j), i <= j, in the packed upper triangle of a dim x dim matrix.
constexpr int packed_index(int i, int j, int dim) {
  if (i > j) std::swap(i, j);
  return i * dim - i * (i - 1) / 2 + (j - i);
}

constexpr int packed_count(int dim) { return dim * (dim + 1) / 2; }

/// Symmetric tensor field stored as its upper triangle, so tau_ij = tau_ji
/// holds by construction.
class SymmetricTensorField {
 public:
  explicit SymmetricTensorField(PeriodicGrid grid)
      : grid_(std::move(grid)), coeffs_(static_cast<std::size_t>(packed_count(grid_.dim())) * grid_.size()) {}

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }
  int components() const noexcept { return packed_count(grid_.dim()); }
  std::size_t modes() const noexcept { return grid_.size(); }

  std::span<cplx> coeffs() noexcept { return coeffs_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  std::span<cplx> packed(int p) { return std::span<cplx>(coeffs_).subspan(p * modes(), modes()); }
  std::span<const cplx> packed(int p) const { return std::span<const cplx>(coeffs_).subspan(p * modes(), modes()); }
  std::span<cplx> component(int i, int j) { return packed(packed_index(i, j, dim())); }
  std::span<const cplx> component(int i, int j) const { return packed(packed_index(i, j, dim())); }

  /// Full d x d tensor, flagged symmetric.
  SpectralField to_full() const {
    SpectralField f(grid_, Rank::tensor);
    const int d = dim();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto src = component(i, j);
        std::copy(src.begin(), src.end(), f.component(i, j).begin());
      }
    f.flags().symmetric = true;
    return f;
  }

  /// Symmetric part (tau + tau^T)/2 of a full tensor field.
  static SymmetricTensorField from_full(const SpectralField& f) {
    if (f.rank() != Rank::tensor) throw ConfigError("from_full: expected a tensor field");
    SymmetricTensorField s(f.grid());
    const int d = f.dim();
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        auto dst = s.component(i, j);
        const auto a = f.component(i, j);
        const auto b = f.component(j, i);
        for (std::size_t m = 0; m < dst.size(); ++m) dst[m] = i == j ? a[m] : 0.5 * (a[m] + b[m]);
      }
    return s;
  }

 private:
  PeriodicGrid grid_;
  CoeffVector coeffs_;
};

/// Velocity (divergence free) and stress (symmetric) at time t.
struct FlowState {
  SpectralField u;
  SymmetricTensorField tau;
  double t = 0.0;

  explicit FlowState(const PeriodicGrid& g) : u(g, Rank::vector), tau(g) { u.flags().divergence_free = true; }
  FlowState(SpectralField u_, SymmetricTensorField tau_, double t_) : u(std::move(u_)), tau(std::move(tau_)), t(t_) {}

  const PeriodicGrid& grid() const noexcept { return u.grid(); }
};

}  // namespace oldroyd::solver
