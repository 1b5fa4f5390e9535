// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace spatialsens {

using Rgb8 = std::array<std::uint8_t, 3>;

/// 256-entry magma ramp (dark purple to pale yellow) used by the dependency heatmap.
std::span<const Rgb8, 256> magma_table() noexcept;

/// Horizon band colour: band 0 is gray, bands 1..max_band run from white to red.
Rgb8 horizon_band_color(std::uint32_t band, std::uint32_t max_band) noexcept;

}  // namespace spatialsens
