// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/viewdata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "spatialsens/error.hpp"

namespace spatialsens {

std::vector<std::uint32_t> monte_carlo_subsample(std::size_t voxel_count, std::size_t count, std::uint64_t seed) {
  std::vector<std::uint32_t> all(voxel_count);
  std::iota(all.begin(), all.end(), 0u);
  if (count >= voxel_count) return all;
  std::vector<std::uint32_t> out;
  out.reserve(count);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(out), count, rng);
  return out;  // std::sample preserves relative order, so the result is sorted
}

std::size_t sensitive_count(const std::vector<double>& field, Measure m) {
  const double threshold = first_band_width(m);
  return static_cast<std::size_t>(std::count_if(field.begin(), field.end(), [&](double v) { return v > threshold; }));
}

double sensitive_fraction(const std::vector<double>& field, Measure m) {
  return field.empty() ? 0.0 : static_cast<double>(sensitive_count(field, m)) / static_cast<double>(field.size());
}

// --- parallel coordinates -------------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<std::size_t> pcp_axis_order(const SensitivityFieldSet& fields, double filter_pct,
                                        const std::vector<std::string>& order_override) {
  if (fields.fields.empty()) throw Error(Errc::AllAxesFiltered, "no sensitivity fields");
  std::vector<std::size_t> kept;
  std::vector<double> means(fields.fields.size());
  for (std::size_t i = 0; i < fields.fields.size(); ++i) {
    means[i] = mean_of(fields.fields[i]);
    if (100.0 * sensitive_fraction(fields.fields[i], fields.measure) >= filter_pct) kept.push_back(i);
  }
  if (kept.empty()) {
    throw Error(Errc::AllAxesFiltered, "every axis has fewer than " + std::to_string(filter_pct) +
                                           "% sensitive voxels");
  }
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) { return means[a] > means[b]; });
  if (order_override.empty()) return kept;
  std::vector<std::size_t> ordered;
  for (const auto& name : order_override) {
    for (std::size_t i : kept) {
      if (fields.param_names[i] == name && std::find(ordered.begin(), ordered.end(), i) == ordered.end()) {
        ordered.push_back(i);
      }
    }
  }
  for (std::size_t i : kept) {
    if (std::find(ordered.begin(), ordered.end(), i) == ordered.end()) ordered.push_back(i);
  }
  return ordered;
}

PcpPayload pcp_payload(const SensitivityFieldSet& fields, std::span<const AuxField> aux,
                       std::span<const std::uint32_t> sample, double filter_pct,
                       const std::vector<std::string>& order_override) {
  const auto order = pcp_axis_order(fields, filter_pct, order_override);
  const std::size_t voxels = fields.dims.voxel_count();
  PcpPayload p;
  p.scale_min = std::numeric_limits<double>::infinity();
  p.scale_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i : order) {
    const auto& f = fields.fields[i];
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    p.axes.push_back({fields.param_names[i], false, i, mean_of(f), sensitive_fraction(f, fields.measure), *lo, *hi});
    p.scale_min = std::min(p.scale_min, *lo);
    p.scale_max = std::max(p.scale_max, *hi);
  }
  // Sensitivities are non-negative in principle; anchor the shared scale at zero.
  p.scale_min = std::min(p.scale_min, 0.0);
  if (!(p.scale_max > p.scale_min)) p.scale_max = p.scale_min + 1.0;
  for (std::size_t i = 0; i < fields.fields.size(); ++i) {
    if (std::find(order.begin(), order.end(), i) == order.end()) p.excluded.push_back(fields.param_names[i]);
  }
  for (std::size_t a = 0; a < aux.size(); ++a) {
    if (aux[a].values.size() != voxels) throw Error(Errc::SizeMismatch, "aux field '" + aux[a].name + "' size");
    const auto [lo, hi] = std::minmax_element(aux[a].values.begin(), aux[a].values.end());
    const double m = std::accumulate(aux[a].values.begin(), aux[a].values.end(), 0.0) / static_cast<double>(voxels);
    p.axes.push_back({aux[a].name, true, a, m, 0.0, *lo, *hi});
  }
  p.voxels.assign(sample.begin(), sample.end());
  p.polylines.reserve(sample.size());
  for (auto v : sample) {
    if (v >= voxels) throw Error(Errc::IndexOutOfBounds, "sampled voxel outside grid");
    std::vector<double> line;
    line.reserve(p.axes.size());
    for (const auto& axis : p.axes) {
      line.push_back(axis.aux ? static_cast<double>(aux[axis.source].values[v]) : fields.fields[axis.source][v]);
    }
    p.polylines.push_back(std::move(line));
  }
  return p;
}

// --- horizon graphs ---------------------------------------------------------------

HorizonSample horizon_band(double value, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(Errc::InvalidArgument, "bandwidth must be positive");
  if (value < 0.0 || std::isnan(value)) throw Error(Errc::NegativeValue, "horizon values must be non-negative");
  if (value == 0.0) return {};
  const double q = std::floor(value / bandwidth);
  auto full = static_cast<std::uint32_t>(q);
  double fill = (value - q * bandwidth) / bandwidth;
  if (fill > 1.0) fill = 1.0;
  if (fill <= 0.0) {
    // Exact multiple: a full top band instead of an empty new band.
    full = full > 0 ? full - 1 : 0;
    fill = 1.0;
  }
  return {full, fill};
}

std::vector<HorizonSample> horizon_bands(std::span<const double> values, double bandwidth) {
  std::vector<HorizonSample> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(horizon_band(v, bandwidth));
  return out;
}

SensitivityView sensitivity_view(const SensitivityFieldSet& fields, const SfcCurve& curve,
                                 std::span<const std::uint32_t> sample, std::size_t m,
                                 const std::vector<std::size_t>& axis_order) {
  if (!(curve.dims == fields.dims)) throw Error(Errc::DimsMismatch, "curve and fields use different grids");
  SensitivityView view;
  for (auto v : sample) {
    if (v >= curve.inverse.size()) throw Error(Errc::IndexOutOfBounds, "sampled voxel outside grid");
    view.positions.push_back(curve.inverse[v]);
  }
  std::sort(view.positions.begin(), view.positions.end());
  for (auto p : view.positions) view.voxels.push_back(curve.order[p]);

  m = std::min(m, axis_order.size());
  const double bw = first_band_width(fields.measure);
  for (std::size_t k = 0; k < axis_order.size(); ++k) {
    const std::size_t i = axis_order[k];
    if (i >= fields.fields.size()) throw Error(Errc::BadParamIndex, "axis order references unknown field");
    std::vector<double> values;
    values.reserve(view.voxels.size());
    for (auto v : view.voxels) values.push_back(fields.fields[i][v]);
    if (k < m) {
      HorizonSeries h{fields.param_names[i], bw, {}, 0};
      h.samples.reserve(values.size());
      // Estimators can undershoot zero slightly (e.g. Sobol); bands start at zero.
      for (double v : values) {
        const auto s = horizon_band(std::max(v, 0.0), bw);
        h.max_band = std::max(h.max_band, s.band_count() ? s.band_count() - 1 : 0u);
        h.samples.push_back(s);
      }
      view.horizons.push_back(std::move(h));
    } else {
      view.lines.push_back({fields.param_names[i], std::move(values), sensitive_count(fields.fields[i], fields.measure)});
    }
  }
  // Fields with more sensitive voxels are drawn first, i.e. behind the others.
  std::vector<std::size_t> idx(view.lines.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return view.lines[a].sensitive_voxels > view.lines[b].sensitive_voxels;
  });
  for (std::size_t k : idx) view.draw_order.push_back(view.lines[k].name);
  return view;
}

// --- selections -------------------------------------------------------------------

Selection resolve_selection(const std::vector<PcpBrush>& brushes, const std::vector<CurveInterval>& intervals,
                            const SensitivityFieldSet& fields, const SfcCurve& curve, std::span<const AuxField> aux) {
  const std::size_t voxels = fields.dims.voxel_count();
  if (curve.order.size() != voxels) throw Error(Errc::DimsMismatch, "curve and fields use different grids");
  Selection sel;
  sel.pcp_brushes = brushes;
  sel.sfc_intervals = intervals;

  std::vector<std::uint8_t> keep(voxels, 1);
  if (!brushes.empty()) {
    // Group brushes per axis: union within an axis, intersection across axes.
    std::vector<std::string> axes;
    for (const auto& b : brushes) {
      if (!(b.lo <= b.hi)) throw Error(Errc::InvalidArgument, "brush on '" + b.axis + "' has lo > hi");
      if (std::find(axes.begin(), axes.end(), b.axis) == axes.end()) axes.push_back(b.axis);
    }
    for (const auto& name : axes) {
      const std::vector<double>* field = nullptr;
      const std::vector<float>* aux_field = nullptr;
      for (std::size_t i = 0; i < fields.param_names.size(); ++i) {
        if (fields.param_names[i] == name) field = &fields.fields[i];
      }
      for (const auto& a : aux) {
        if (!field && a.name == name) aux_field = &a.values;
      }
      if (!field && !aux_field) throw Error(Errc::BadParamIndex, "unknown axis '" + name + "'");
      for (std::size_t v = 0; v < voxels; ++v) {
        if (!keep[v]) continue;
        const double x = field ? (*field)[v] : static_cast<double>((*aux_field)[v]);
        bool hit = false;
        for (const auto& b : brushes) {
          if (b.axis == name && x >= b.lo && x <= b.hi) {
            hit = true;
            break;
          }
        }
        keep[v] = hit;
      }
    }
  }
  if (!intervals.empty()) {
    std::vector<std::uint8_t> on_curve(voxels, 0);
    for (const auto& iv : intervals) {
      if (iv.a > iv.b) throw Error(Errc::InvalidArgument, "curve interval has a > b");
      const std::size_t end = std::min<std::size_t>(iv.b, voxels - 1);
      for (std::size_t p = iv.a; p <= end; ++p) on_curve[curve.order[p]] = 1;
    }
    for (std::size_t v = 0; v < voxels; ++v) keep[v] = keep[v] && on_curve[v];
  }
  for (std::size_t v = 0; v < voxels; ++v) {
    if (keep[v]) sel.voxels.push_back(static_cast<std::uint32_t>(v));
  }
  return sel;
}

// --- dependency heatmap -------------------------------------------------------------

HeatmapGrid heatmap_aggregate(const Ensemble& ens, const SfcCurve& curve, std::span<const std::uint32_t> selection,
                              std::size_t param_index, std::size_t param_bins, std::size_t curve_bins) {
  if (selection.empty()) throw Error(Errc::EmptySelection, "heatmap needs at least one selected voxel");
  if (param_index >= ens.param_count()) {
    throw Error(Errc::BadParamIndex, "parameter index " + std::to_string(param_index) + " out of range");
  }
  if (param_bins == 0 || curve_bins == 0) throw Error(Errc::InvalidArgument, "heatmap needs at least one bin");
  if (!(curve.dims == ens.dims())) throw Error(Errc::DimsMismatch, "curve and ensemble use different grids");

  // Selected voxels in curve order, split into equal-count contiguous chunks.
  std::vector<std::uint32_t> positions;
  positions.reserve(selection.size());
  for (auto v : selection) {
    if (v >= curve.inverse.size()) throw Error(Errc::IndexOutOfBounds, "selected voxel outside grid");
    positions.push_back(curve.inverse[v]);
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  const std::size_t s = positions.size();

  HeatmapGrid g;
  g.rows = std::min(curve_bins, s);
  g.cols = param_bins;
  g.values.assign(g.rows * g.cols, 0.0);
  g.filled.assign(g.rows * g.cols, 0);
  const auto& range = ens.pspace().params[param_index];
  g.param = range.name;
  g.param_min = range.min;
  g.param_max = range.max;
  g.selection_size = s;

  std::vector<std::size_t> col_of_run(ens.run_count());
  const double width = range.max - range.min;
  for (std::size_t r = 0; r < ens.run_count(); ++r) {
    const double p = ens.pspace().samples(r, param_index);
    const double t = width > 0.0 ? (p - range.min) / width : 0.0;
    col_of_run[r] = std::min(param_bins - 1, static_cast<std::size_t>(std::max(0.0, std::floor(t * param_bins))));
  }

  std::vector<double> sum(g.cols), count(g.cols);
  for (std::size_t row = 0; row < g.rows; ++row) {
    const std::size_t begin = row * s / g.rows;
    const std::size_t end = (row + 1) * s / g.rows;
    g.row_first.push_back(positions[begin]);
    g.row_last.push_back(positions[end - 1]);
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0.0);
    for (std::size_t r = 0; r < ens.run_count(); ++r) {
      const auto vol = ens.volume(r);
      double acc = 0.0;
      for (std::size_t k = begin; k < end; ++k) acc += vol[curve.order[positions[k]]];
      sum[col_of_run[r]] += acc;
      count[col_of_run[r]] += static_cast<double>(end - begin);
    }
    for (std::size_t c = 0; c < g.cols; ++c) {
      if (count[c] > 0.0) {
        g.values[row * g.cols + c] = sum[c] / count[c];
        g.filled[row * g.cols + c] = 1;
      }
    }
  }
  return g;
}

HeatmapGrid nn_fill(const HeatmapGrid& grid) {
  const std::size_t rows = grid.rows, cols = grid.cols;
  if (std::none_of(grid.filled.begin(), grid.filled.end(), [](std::uint8_t f) { return f != 0; })) {
    throw Error(Errc::AllEmpty, "heatmap has no filled cell");
  }
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  // Per column, the nearest filled row at or above / at or below every row.
  std::vector<std::size_t> above(rows * cols, kNone), below(rows * cols, kNone);
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t last = kNone;
    for (std::size_t r = 0; r < rows; ++r) {
      if (grid.has(r, c)) last = r;
      above[r * cols + c] = last;
    }
    last = kNone;
    for (std::size_t r = rows; r-- > 0;) {
      if (grid.has(r, c)) last = r;
      below[r * cols + c] = last;
    }
  }
  HeatmapGrid out = grid;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (grid.has(r, c)) continue;
      // Candidates ordered by (squared distance, row, column).
      std::size_t best_d = kNone, best_r = kNone, best_c = kNone;
      for (std::size_t cc = 0; cc < cols; ++cc) {
        const std::size_t dc = cc > c ? cc - c : c - cc;
        for (std::size_t rr : {above[r * cols + cc], below[r * cols + cc]}) {
          if (rr == kNone) continue;
          const std::size_t dr = rr > r ? rr - r : r - rr;
          const std::size_t d = dr * dr + dc * dc;
          if (d < best_d || (d == best_d && (rr < best_r || (rr == best_r && cc < best_c)))) {
            best_d = d;
            best_r = rr;
            best_c = cc;
          }
        }
      }
      out.values[r * cols + c] = grid.at(best_r, best_c);
      out.filled[r * cols + c] = 1;
    }
  }
  return out;
}

}  // namespace spatialsens
