// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spatialsens/grid.hpp"

namespace spatialsens {

/// Indexed triangle mesh; vertices are xyz triplets in voxel coordinates.
struct Mesh {
  std::vector<float> vertices;
  std::vector<std::uint32_t> indices;

  [[nodiscard]] std::size_t vertex_count() const noexcept { return vertices.size() / 3; }
  [[nodiscard]] std::size_t triangle_count() const noexcept { return indices.size() / 3; }
};

/// Marching-cubes surface (iso 0.5) of a binary voxel mask padded by one empty
/// layer on every side, so the surface is closed. Shared edge vertices are welded.
Mesh mask_surface(std::span<const std::uint8_t> mask, const GridDims& dims);

/// Boundary surface of a set of voxels (linear indices).
Mesh selection_mesh(std::span<const std::uint32_t> voxels, const GridDims& dims);

/// Binary encoding: u32 triangle count, then 9 float32 per triangle (its three
/// vertices), then 3 u32 per triangle indexing those de-indexed vertices.
std::vector<std::uint8_t> encode_mesh_binary(const Mesh& mesh);
Mesh decode_mesh_binary(std::span<const std::uint8_t> bytes);

}  // namespace spatialsens
