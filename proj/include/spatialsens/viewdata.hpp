// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatialsens/ensemble.hpp"
#include "spatialsens/sensitivity.hpp"
#include "spatialsens/sfc.hpp"

namespace spatialsens {

inline constexpr std::size_t kDefaultSubsampleCount = 20000;

/// Uniform sample of `count` voxel indices out of [0, V) without replacement, sorted.
/// Deterministic in `seed`; `count` is clamped to V.
std::vector<std::uint32_t> monte_carlo_subsample(std::size_t voxel_count, std::size_t count, std::uint64_t seed);

/// Fraction of voxels whose value exceeds the first band width of the measure.
double sensitive_fraction(const std::vector<double>& field, Measure m);
std::size_t sensitive_count(const std::vector<double>& field, Measure m);

// --- parallel coordinates ---------------------------------------------------

struct PcpAxis {
  std::string name;
  bool aux = false;               // domain data axis, drawn outside the sensitivity box
  std::size_t source = 0;         // field index (or aux index when aux)
  double mean = 0.0;
  double sensitive_fraction = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct PcpPayload {
  std::vector<PcpAxis> axes;                 // sensitivity axes in display order, then aux axes
  std::vector<std::string> excluded;         // sensitivity axes removed by the filter
  std::vector<std::uint32_t> voxels;         // sampled voxels, one polyline each
  std::vector<std::vector<double>> polylines;  // polylines[k][axis]
  double scale_min = 0.0;                    // shared range of all sensitivity axes
  double scale_max = 1.0;
};

/// Axes with a sensitive-voxel percentage below `filter_pct` are dropped; the rest are
/// ordered by descending mean unless `order_override` lists names (listed names first,
/// in that order; the remainder by mean). Throws AllAxesFiltered.
PcpPayload pcp_payload(const SensitivityFieldSet& fields, std::span<const AuxField> aux,
                       std::span<const std::uint32_t> sample, double filter_pct,
                       const std::vector<std::string>& order_override = {});

/// Field indices in PCP order after filtering (no polylines).
std::vector<std::size_t> pcp_axis_order(const SensitivityFieldSet& fields, double filter_pct,
                                        const std::vector<std::string>& order_override = {});

// --- horizon graphs -----------------------------------------------------------

struct HorizonSample {
  std::uint32_t full_bands = 0;  // completely filled bands below the top band
  double top_fill = 0.0;         // fill of the top band in (0, 1]; 0 only for value 0

  [[nodiscard]] std::uint32_t band_count() const noexcept { return full_bands + (top_fill > 0.0 ? 1u : 0u); }
};

/// Throws NegativeValue (or InvalidArgument for a non-positive bandwidth).
HorizonSample horizon_band(double value, double bandwidth);
std::vector<HorizonSample> horizon_bands(std::span<const double> values, double bandwidth);

struct HorizonSeries {
  std::string name;
  double bandwidth = 0.2;
  std::vector<HorizonSample> samples;
  std::uint32_t max_band = 0;  // highest band index used (for the colour ramp)
};

struct LineSeries {
  std::string name;
  std::vector<double> values;
  std::size_t sensitive_voxels = 0;
};

struct SensitivityView {
  std::vector<std::uint32_t> positions;  // curve positions of the sampled voxels, ascending
  std::vector<std::uint32_t> voxels;     // voxel at each position
  std::vector<HorizonSeries> horizons;   // first m fields in axis order
  std::vector<LineSeries> lines;         // remaining fields
  std::vector<std::string> draw_order;   // line fields back to front
};

/// `axis_order` lists field indices in display order. m is clamped to the field count.
SensitivityView sensitivity_view(const SensitivityFieldSet& fields, const SfcCurve& curve,
                                 std::span<const std::uint32_t> sample, std::size_t m,
                                 const std::vector<std::size_t>& axis_order);

// --- selections ----------------------------------------------------------------

struct PcpBrush {
  std::string axis;
  double lo = 0.0;
  double hi = 0.0;
};

struct CurveInterval {
  std::uint32_t a = 0;  // inclusive curve positions
  std::uint32_t b = 0;
};

struct Selection {
  std::vector<std::uint32_t> voxels;  // sorted voxel indices
  std::vector<PcpBrush> pcp_brushes;
  std::vector<CurveInterval> sfc_intervals;
};

/// Brushes on one axis are OR-ed, brushes on different axes AND-ed; curve intervals
/// are OR-ed; both parts are intersected. No brushes at all selects every voxel.
/// Throws InvalidArgument on lo > hi or a > b, BadParamIndex on an unknown axis.
Selection resolve_selection(const std::vector<PcpBrush>& brushes, const std::vector<CurveInterval>& intervals,
                            const SensitivityFieldSet& fields, const SfcCurve& curve,
                            std::span<const AuxField> aux = {});

// --- dependency heatmap ------------------------------------------------------------

struct HeatmapGrid {
  std::size_t rows = 0;  // curve bins
  std::size_t cols = 0;  // parameter bins
  std::vector<double> values;        // row-major, rows x cols
  std::vector<std::uint8_t> filled;  // 1 when at least one sample contributed
  std::string param;
  double param_min = 0.0;
  double param_max = 1.0;
  std::size_t selection_size = 0;
  std::vector<std::uint32_t> row_first;  // first curve position in each row
  std::vector<std::uint32_t> row_last;   // last curve position in each row

  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  [[nodiscard]] bool has(std::size_t r, std::size_t c) const { return filled[r * cols + c] != 0; }
};

/// Mean simulation output per (curve chunk, parameter bin) over the selection.
/// Throws EmptySelection, BadParamIndex.
HeatmapGrid heatmap_aggregate(const Ensemble& ens, const SfcCurve& curve, std::span<const std::uint32_t> selection,
                              std::size_t param_index, std::size_t param_bins = 150, std::size_t curve_bins = 500);

/// Fills empty cells from the nearest filled cell (Euclidean on indices; ties: smaller
/// row, then smaller column). Throws AllEmpty.
HeatmapGrid nn_fill(const HeatmapGrid& grid);

}  // namespace spatialsens
