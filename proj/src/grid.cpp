// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/grid.hpp"

#include <limits>

#include "spatialsens/error.hpp"

namespace spatialsens {

void GridDims::validate() const {
  if (nx == 0 || ny == 0 || nz == 0) {
    throw Error(Errc::InvalidArgument, "grid dimensions must be positive, got " + to_string(*this));
  }
  if (voxel_count() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(Errc::InvalidArgument, "grid too large for 32-bit voxel indices: " + to_string(*this));
  }
}

bool face_adjacent(const GridDims& dims, std::size_t a, std::size_t b) noexcept {
  const auto ca = dims.coords(a);
  const auto cb = dims.coords(b);
  int steps = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const auto d = static_cast<long long>(ca[axis]) - static_cast<long long>(cb[axis]);
    if (d == 1 || d == -1) {
      ++steps;
    } else if (d != 0) {
      return false;
    }
  }
  return steps == 1;
}

std::string to_string(const GridDims& dims) {
  return std::to_string(dims.nx) + "x" + std::to_string(dims.ny) + "x" + std::to_string(dims.nz);
}

}  // namespace spatialsens
