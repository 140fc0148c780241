#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <new>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "oldroyd/errors.hpp"

namespace oldroyd {

using cplx = std::complex<double>;

/// Allocator returning 64-byte aligned storage so FFTW can run its SIMD
/// kernels on coefficient buffers.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) { return static_cast<T*>(::operator new(count * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

using CoeffVector = std::vector<cplx, AlignedAllocator<cplx>>;

namespace detail {

// The FFTW planner is not re-entrant; execution with new-array calls is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline int signed_wavenumber(int index, int n) { return index <= n / 2 ? index : index - n; }

struct GridTables {
  int dim;
  int n;
  std::size_t size;
  std::array<std::vector<double>, 3> xi;  // per-axis wavenumber of each flat mode
  std::array<std::vector<double>, 3> dx;  // first-derivative symbol: xi with Nyquist entries zeroed
  std::vector<double> k2;                 // |xi|^2
  std::vector<unsigned char> keep;        // 2/3-rule mask
  std::vector<unsigned char> nyquist;     // some axis sits at n/2
  fftw_plan forward = nullptr;   // SIMD-aligned buffers
  fftw_plan backward = nullptr;
  fftw_plan forward_any = nullptr;  // fallback for buffers of other alignment
  fftw_plan backward_any = nullptr;

  GridTables(int d, int points) : dim(d), n(points) {
    size = 1;
    for (int a = 0; a < dim; ++a) size *= static_cast<std::size_t>(n);
    for (int a = 0; a < dim; ++a) {
      xi[a].resize(size);
      dx[a].resize(size);
    }
    k2.resize(size);
    keep.resize(size);
    nyquist.resize(size);
    for (std::size_t m = 0; m < size; ++m) {
      std::size_t rest = m;
      double r2 = 0.0;
      bool inside = true;
      bool nyq = false;
      for (int a = dim - 1; a >= 0; --a) {
        const int idx = static_cast<int>(rest % static_cast<std::size_t>(n));
        rest /= static_cast<std::size_t>(n);
        const int k = signed_wavenumber(idx, n);
        xi[a][m] = k;
        dx[a][m] = idx == n / 2 ? 0.0 : k;
        r2 += static_cast<double>(k) * k;
        if (3 * std::abs(k) > n) inside = false;
        if (idx == n / 2) nyq = true;
      }
      k2[m] = r2;
      keep[m] = inside ? 1 : 0;
      nyquist[m] = nyq ? 1 : 0;
    }

    std::array<int, 3> dims{n, n, n};
    CoeffVector scratch(size);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(fftw_planner_mutex());
    // FFTW_ESTIMATE keeps plan selection deterministic across runs.
    forward = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    forward_any = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_any = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!forward || !backward || !forward_any || !backward_any) throw ConfigError("FFTW plan creation failed");
  }

  void execute(fftw_plan aligned, fftw_plan any, cplx* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(fftw_alignment_of(reinterpret_cast<double*>(p)) == 0 ? aligned : any, p, p);
  }

  ~GridTables() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (backward != nullptr) fftw_destroy_plan(backward);
    if (forward_any != nullptr) fftw_destroy_plan(forward_any);
    if (backward_any != nullptr) fftw_destroy_plan(backward_any);
  }

  GridTables(const GridTables&) = delete;
  GridTables& operator=(const GridTables&) = delete;
};

}  // namespace detail

/// Uniform periodic grid on [0, 2π)^dim with n points per axis.
///
/// Modes are stored row-major with axis 0 slowest; index i on an axis maps to
/// the integer wavenumber i for i <= n/2 and i - n otherwise, so the Nyquist
/// plane carries +n/2. Copies share the immutable tables and FFT plans.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n) {
    if (dim != 2 && dim != 3) throw ConfigError("dim must be 2 or 3, got " + std::to_string(dim));
    if (n < 8 || n % 2 != 0) throw ConfigError("n must be even and >= 8, got " + std::to_string(n));
    tables_ = std::make_shared<const detail::GridTables>(dim, n);
  }

  int dim() const noexcept { return tables_->dim; }
  int n() const noexcept { return tables_->n; }
  std::size_t size() const noexcept { return tables_->size; }

  std::span<const double> xi(int axis) const { return tables_->xi[axis]; }
  /// Symbol of d/dx_axis divided by i. Equals xi(axis) except on the Nyquist
  /// plane of that axis, where it is 0 so odd operators map real to real.
  std::span<const double> deriv(int axis) const { return tables_->dx[axis]; }
  std::span<const double> k2() const { return tables_->k2; }
  bool kept(std::size_t mode) const { return tables_->keep[mode] != 0; }
  bool nyquist(std::size_t mode) const { return tables_->nyquist[mode] != 0; }

  /// Flat index of the lattice point xi (components taken modulo n).
  std::size_t index_of(std::span<const int> xi) const {
    std::size_t m = 0;
    const int nn = n();
    for (int a = 0; a < dim(); ++a) {
      const int idx = ((xi[a] % nn) + nn) % nn;
      m = m * static_cast<std::size_t>(nn) + static_cast<std::size_t>(idx);
    }
    return m;
  }

  /// Flat index of -xi.
  std::size_t conjugate_index(std::size_t mode) const {
    std::array<int, 3> k{};
    for (int a = 0; a < dim(); ++a) k[a] = -static_cast<int>(tables_->xi[a][mode]);
    return index_of(std::span<const int>(k.data(), static_cast<std::size_t>(dim())));
  }

  /// Physical coordinate of a sample along one axis.
  double coordinate(int index) const { return 2.0 * std::numbers::pi * index / n(); }

  /// Unnormalised DFT in place: X_k = sum_m x_m exp(-i k x_m).
  void forward(std::span<cplx> data) const { tables_->execute(tables_->forward, tables_->forward_any, data.data()); }

  /// Synthesis in place: x_m = sum_k X_k exp(+i k x_m).
  void backward(std::span<cplx> data) const {
    tables_->execute(tables_->backward, tables_->backward_any, data.data());
  }

  friend bool operator==(const PeriodicGrid& a, const PeriodicGrid& b) {
    return a.dim() == b.dim() && a.n() == b.n();
  }

 private:
  std::shared_ptr<const detail::GridTables> tables_;
};

}  // namespace oldroyd
