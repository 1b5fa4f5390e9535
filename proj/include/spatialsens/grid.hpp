// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace spatialsens {

/// Voxel counts per axis. Linear index is x-fastest: x + nx * (y + ny * z).
struct GridDims {
  std::uint32_t nx = 1;
  std::uint32_t ny = 1;
  std::uint32_t nz = 1;

  [[nodiscard]] std::size_t voxel_count() const noexcept {
    return std::size_t{nx} * ny * nz;
  }
  [[nodiscard]] bool is_2d() const noexcept { return nz == 1; }

  [[nodiscard]] std::size_t linear(std::uint32_t x, std::uint32_t y, std::uint32_t z) const noexcept {
    return x + std::size_t{nx} * (y + std::size_t{ny} * z);
  }
  [[nodiscard]] std::array<std::uint32_t, 3> coords(std::size_t index) const noexcept {
    const auto x = static_cast<std::uint32_t>(index % nx);
    index /= nx;
    const auto y = static_cast<std::uint32_t>(index % ny);
    const auto z = static_cast<std::uint32_t>(index / ny);
    return {x, y, z};
  }

  /// Throws InvalidArgument when any axis is zero or the voxel count exceeds 32-bit indexing.
  void validate() const;

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// True when the two voxels differ by one step along exactly one axis.
bool face_adjacent(const GridDims& dims, std::size_t a, std::size_t b) noexcept;

std::string to_string(const GridDims& dims);

}  // namespace spatialsens
