#pragma once

// Binary snapshot of one SpectralField.
//
//   bytes 0..3   magic "OLDB"
//   u32          format version (1)
//   u32          dim
//   u32          n
//   u32          rank (0 scalar, 1 vector, 2 tensor)
//   u32          flags (bit 0 symmetric, bit 1 divergence-free)
//   then for every component, for every mode in row-major (xi_1, ..., xi_d)
//   order: real part, imaginary part as IEEE-754 binary64.
//
// All integers and floats are little-endian regardless of host order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "oldroyd/field.hpp"

namespace oldroyd {

inline constexpr std::array<char, 4> kSnapshotMagic{'O', 'L', 'D', 'B'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 4);
}

inline std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw IoError("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError("snapshot truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& f) {
  os.write(kSnapshotMagic.data(), 4);
  detail::put_u32(os, kSnapshotVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(f.dim()));
  detail::put_u32(os, static_cast<std::uint32_t>(f.grid().n()));
  detail::put_u32(os, static_cast<std::uint32_t>(f.rank()));
  detail::put_u32(os, f.flags().bits());
  for (const cplx& z : f.coeffs()) {
    detail::put_u64(os, std::bit_cast<std::uint64_t>(z.real()));
    detail::put_u64(os, std::bit_cast<std::uint64_t>(z.imag()));
  }
  if (!os) throw IoError("snapshot write failed");
}

inline SpectralField read_snapshot(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kSnapshotMagic) throw IoError("not an OLDB snapshot");
  const auto version = detail::get_u32(is);
  if (version != kSnapshotVersion) throw IoError("unsupported snapshot version " + std::to_string(version));
  const auto dim = static_cast<int>(detail::get_u32(is));
  const auto n = static_cast<int>(detail::get_u32(is));
  const auto rank = detail::get_u32(is);
  const auto flags = detail::get_u32(is);
  if (rank > 2) throw IoError("bad rank code in snapshot");
  std::optional<PeriodicGrid> grid;
  try {
    grid.emplace(dim, n);
  } catch (const ConfigError& e) {
    throw IoError(std::string("bad grid in snapshot header: ") + e.what());
  }
  SpectralField f(*grid, static_cast<Rank>(rank));
  f.flags() = FieldFlags::from_bits(flags);
  for (cplx& z : f.coeffs()) {
    const double re = std::bit_cast<double>(detail::get_u64(is));
    const double im = std::bit_cast<double>(detail::get_u64(is));
    z = {re, im};
  }
  return f;
}

inline void write_snapshot(const std::filesystem::path& path, const SpectralField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_snapshot(os, f);
}

inline SpectralField read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace oldroyd
