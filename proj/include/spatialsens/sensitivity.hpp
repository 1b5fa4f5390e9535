// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spatialsens/ensemble.hpp"
#include "spatialsens/exec.hpp"
#include "spatialsens/grid.hpp"

namespace spatialsens {

enum class Measure { Sobol, Delta, Dgsa };

std::string_view to_string(Measure m) noexcept;
/// Accepts "sobol", "delta", "dgsa" (case-insensitive).
Measure measure_from_string(std::string_view s);

/// Per-voxel flag bits stored next to every sensitivity field set.
namespace voxel_flags {
inline constexpr std::uint8_t kInert = 1u << 0;       // measure cannot rate the voxel (constant output, ...)
inline constexpr std::uint8_t kOutOfRange = 1u << 1;  // estimate outside [0, 1] for a normalized measure
}  // namespace voxel_flags

/// Band height used by the horizon graphs; also the "sensitive voxel" threshold.
double first_band_width(Measure m) noexcept;

/// One sensitivity volume per parameter for a chosen measure.
struct SensitivityFieldSet {
  Measure measure = Measure::Delta;
  GridDims dims;
  std::vector<std::string> param_names;
  std::vector<std::vector<double>> fields;  // fields[i][voxel]
  std::vector<std::uint8_t> flags;          // one bitfield per voxel

  [[nodiscard]] std::size_t field_count() const noexcept { return fields.size(); }
  [[nodiscard]] std::size_t voxel_count() const noexcept { return dims.voxel_count(); }
  /// Field values of all parameters at one voxel.
  [[nodiscard]] std::vector<double> vector_at(std::size_t voxel) const;
  /// Index of the named parameter; throws BadParamIndex.
  [[nodiscard]] std::size_t index_of(std::string_view name) const;
};

// --- Sobol ---------------------------------------------------------------

/// First-order indices from outputs laid out as A, B, AB_1..AB_n (N rows each).
/// V_i = mean(Y_B * (Y_ABi - Y_A)), D = population variance over A and B rows.
std::vector<double> sobol_first_order(std::span<const double> y, std::size_t n, std::size_t base_n);

SensitivityFieldSet sobol_volume(const Ensemble& ens, Exec exec = Exec::Parallel);

// --- Delta (moment independent) ------------------------------------------

enum class Bandwidth { Scott, Silverman };

struct DeltaConfig {
  std::optional<std::size_t> slices;  // equal-frequency slice count M; auto when empty
  std::size_t grid_points = 100;
  Bandwidth bandwidth = Bandwidth::Scott;
};

/// Slice count used when DeltaConfig::slices is unset.
std::size_t delta_auto_slices(std::size_t runs) noexcept;

/// Gaussian KDE bandwidth for a sample (uses the sample standard deviation).
double kde_bandwidth(std::span<const double> samples, Bandwidth rule);

/// Gaussian kernel density of `samples` evaluated on lo + k*step, k < out.size().
void kde_on_grid(std::span<const double> samples, double bandwidth, double lo, double step, std::span<double> out);

std::vector<double> delta_index(std::span<const double> y, const Matrix& p, const DeltaConfig& cfg = {});

SensitivityFieldSet delta_volume(const Ensemble& ens, const DeltaConfig& cfg = {}, Exec exec = Exec::Parallel);

// --- IO ------------------------------------------------------------------

/// Writes sensitivity.json, sens_<param>.raw (float32) and flags.raw (uint8) into `dir`.
void write_sensitivity(const SensitivityFieldSet& fs, const std::filesystem::path& dir);
SensitivityFieldSet read_sensitivity(const std::filesystem::path& dir);

}  // namespace spatialsens
