// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "spatialsens/exec.hpp"
#include "spatialsens/grid.hpp"
#include "spatialsens/sensitivity.hpp"

namespace spatialsens {

enum class CurveKind : std::uint32_t { DataDriven = 0, Hilbert = 1, Scanline = 2 };
enum class DistanceKind : std::uint32_t { L1 = 0, L2 = 1, LInf = 2, SSD = 3, Cosine = 4 };

std::string_view to_string(CurveKind k) noexcept;
std::string_view to_string(DistanceKind k) noexcept;
/// Accepts "datadriven", "hilbert", "scanline" (case-insensitive).
CurveKind curve_kind_from_string(std::string_view s);
/// Accepts "l1", "l2", "linf", "ssd", "cosine" (case-insensitive).
DistanceKind distance_from_string(std::string_view s);

/// Raw distance between two sensitivity vectors. Cosine: both zero -> 0, one zero -> 1.
double vector_distance(DistanceKind kind, std::span<const double> a, std::span<const double> b);

struct SfcConfig {
  double alpha = 0.1;                       // blend between value (0) and positional (1) coherency
  DistanceKind distance = DistanceKind::L1;
  std::array<double, 3> ref_point{0.0, 0.0, 0.0};

  void validate() const;
};

/// A space-filling curve over every voxel of a grid.
struct SfcCurve {
  CurveKind kind = CurveKind::Scanline;
  GridDims dims;
  double alpha = 0.0;
  DistanceKind distance = DistanceKind::L1;
  std::array<double, 3> ref_point{0.0, 0.0, 0.0};
  std::vector<std::uint32_t> order;    // curve position -> voxel linear index
  std::vector<std::uint32_t> inverse;  // voxel linear index -> curve position

  [[nodiscard]] std::size_t size() const noexcept { return order.size(); }
  /// Rebuilds `inverse` from `order`; throws InvalidArgument when `order` is not a permutation.
  void rebuild_inverse();
};

// --- invariant checks ------------------------------------------------------

bool is_permutation_curve(const SfcCurve& c);
/// Consecutive voxels share a face.
bool has_adjacent_steps(const SfcCurve& c);
/// Last voxel shares a face with the first.
bool is_closed_cycle(const SfcCurve& c);
/// All invariants that apply to the curve's kind.
bool is_valid_curve(const SfcCurve& c);

// --- circuit graph ---------------------------------------------------------

struct DualEdge {
  std::uint32_t a = 0;  // lower cell index
  std::uint32_t b = 0;  // upper cell index
  double value = 0.0;     // N, value coherency term (normalized unless cosine)
  double position = 0.0;  // R, positional coherency term (normalized)
  double weight = 0.0;    // (1 - alpha) N + alpha R
};

/// 2x2 (2D) or 2x2x2 (3D) blocks tiling the grid plus weighted adjacencies.
struct CircuitGraph {
  GridDims dims;   // voxel grid
  GridDims cells;  // block grid, dims / 2 (z stays 1 in 2D)
  std::vector<DualEdge> edges;

  [[nodiscard]] std::size_t cell_count() const noexcept { return cells.voxel_count(); }
};

/// Throws OddDimension unless every axis (x, y, and z when nz > 1) is even.
GridDims cell_grid(const GridDims& dims);

CircuitGraph build_circuit_graph(const SensitivityFieldSet& fields, const SfcConfig& cfg,
                                 Exec exec = Exec::Parallel);

/// Kruskal minimum spanning tree; ties resolved by (weight, a, b). Returns edge indices.
std::vector<std::size_t> minimum_spanning_tree(std::size_t node_count, std::span<const DualEdge> edges);

/// Merges the block cycles along the tree into one Hamiltonian cycle over all voxels.
SfcCurve merge_cycles(const CircuitGraph& graph, std::span<const std::size_t> tree);

/// Local Hamiltonian cycles of a 2x2x2 block (6 of them) or a 2x2 block (1), as
/// sequences of local voxel indices dx + 2 dy + 4 dz.
const std::vector<std::vector<std::uint8_t>>& block_cycles(bool three_d);

SfcCurve data_driven_curve(const SensitivityFieldSet& fields, const SfcConfig& cfg = {},
                           Exec exec = Exec::Parallel);
/// Throws UnsupportedDims unless the grid is a 2D square or 3D cube with power-of-two side.
SfcCurve hilbert_curve(const GridDims& dims);
/// Serpentine order along x, then y, then z.
SfcCurve scanline_curve(const GridDims& dims);

// --- persistence -----------------------------------------------------------

void write_curve(const SfcCurve& curve, const std::filesystem::path& path);
SfcCurve read_curve(const std::filesystem::path& path);

}  // namespace spatialsens
