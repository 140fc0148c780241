#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oldroyd/grid.hpp"

namespace oldroyd {

enum class Rank : std::uint32_t { scalar = 0, vector = 1, tensor = 2 };

inline int component_count(Rank rank, int dim) {
  switch (rank) {
    case Rank::scalar:
      return 1;
    case Rank::vector:
      return dim;
    case Rank::tensor:
      return dim * dim;
  }
  return 0;
}

inline std::string to_string(Rank rank) {
  switch (rank) {
    case Rank::scalar:
      return "scalar";
    case Rank::vector:
      return "vector";
    case Rank::tensor:
      return "tensor";
  }
  return "?";
}

/// Structural properties a field claims to satisfy.
struct FieldFlags {
  bool symmetric = false;        // tensor: tau_ij == tau_ji
  bool divergence_free = false;  // vector: xi . u(xi) == 0

  std::uint32_t bits() const { return (symmetric ? 1u : 0u) | (divergence_free ? 2u : 0u); }
  static FieldFlags from_bits(std::uint32_t b) { return {(b & 1u) != 0, (b & 2u) != 0}; }
  friend bool operator==(const FieldFlags&, const FieldFlags&) = default;
};

/// Fourier coefficients of a real scalar, vector or tensor field.
///
/// A field f is represented as f(x) = sum_xi c(xi) exp(i xi.x); c is stored
/// component-major. Tensor component (i, j) lives at i*dim + j.
class SpectralField {
 public:
  SpectralField(PeriodicGrid grid, Rank rank)
      : grid_(std::move(grid)),
        rank_(rank),
        coeffs_(static_cast<std::size_t>(component_count(rank, grid_.dim())) * grid_.size()) {}

  const PeriodicGrid& grid() const noexcept { return grid_; }
  Rank rank() const noexcept { return rank_; }
  int dim() const noexcept { return grid_.dim(); }
  int components() const noexcept { return component_count(rank_, grid_.dim()); }
  std::size_t modes() const noexcept { return grid_.size(); }

  FieldFlags& flags() noexcept { return flags_; }
  const FieldFlags& flags() const noexcept { return flags_; }

  std::span<cplx> coeffs() noexcept { return coeffs_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  std::span<cplx> component(int c) { return std::span<cplx>(coeffs_).subspan(c * modes(), modes()); }
  std::span<const cplx> component(int c) const {
    return std::span<const cplx>(coeffs_).subspan(c * modes(), modes());
  }
  std::span<cplx> component(int i, int j) { return component(i * dim() + j); }
  std::span<const cplx> component(int i, int j) const { return component(i * dim() + j); }

  cplx& operator()(int c, std::size_t mode) { return coeffs_[c * modes() + mode]; }
  const cplx& operator()(int c, std::size_t mode) const { return coeffs_[c * modes() + mode]; }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    flags_ = {flags_.symmetric && o.flags_.symmetric, flags_.divergence_free && o.flags_.divergence_free};
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    flags_ = {flags_.symmetric && o.flags_.symmetric, flags_.divergence_free && o.flags_.divergence_free};
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  void set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), cplx{}); }

  void require_same_shape(const SpectralField& o) const {
    if (!(grid_ == o.grid_) || rank_ != o.rank_) throw ConfigError("field shape mismatch");
  }

 private:
  PeriodicGrid grid_;
  Rank rank_;
  CoeffVector coeffs_;
  FieldFlags flags_{};
};

}  // namespace oldroyd
