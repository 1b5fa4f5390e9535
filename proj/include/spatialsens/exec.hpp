// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace spatialsens {

/// Selects the reference serial loop or the OpenMP kernel for volume-level work.
/// Both paths produce bit-identical results.
enum class Exec { Serial, Parallel };

}  // namespace spatialsens
