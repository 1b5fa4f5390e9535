// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatialsens/dgsa.hpp"
#include "spatialsens/ensemble.hpp"
#include "spatialsens/exec.hpp"
#include "spatialsens/sensitivity.hpp"
#include "spatialsens/sfc.hpp"

namespace spatialsens {

// --- autocorrelation --------------------------------------------------------

struct Autocorrelation {
  std::vector<double> acf;  // acf[l] for l = 0..L (acf[0] = 1)
  double summary = 0.0;     // mean of acf[1..L]
};

/// ACF(l) = sum_i (x_i - mu)(x_{i+l} - mu) / ((len - l) sigma^2), clamped to [-1, 1].
/// A constant series is perfectly coherent (ACF = 1). Throws SeriesTooShort unless len > L >= 1.
Autocorrelation autocorrelation(std::span<const double> series, std::size_t max_lag);

// --- coherency --------------------------------------------------------------

struct CoherencyReport {
  std::string curve_kind;
  std::string distance;
  double alpha = 0.0;
  std::size_t max_lag = 100;
  double value_coherency = 0.0;
  double positional_coherency = 0.0;
  std::vector<std::string> field_names;
  std::vector<double> per_field;                  // ACF summary per field
  std::vector<std::vector<double>> per_field_acf;  // full curves (optional, may be empty)
  std::vector<double> positional_acf;              // full curve (optional, may be empty)
};

/// Mean over fields of the ACF summary of each field reordered along the curve.
/// Throws DimsMismatch when the curve and fields disagree on the grid.
double value_coherency(const SfcCurve& curve, const SensitivityFieldSet& fields, std::size_t max_lag = 100,
                       std::vector<double>* per_field = nullptr);

/// ACF summary of t(i) = |p_i - ref| along the curve.
double positional_coherency(const SfcCurve& curve, const std::array<double, 3>& ref = {0.0, 0.0, 0.0},
                            std::size_t max_lag = 100);

CoherencyReport evaluate_coherency(const SfcCurve& curve, const SensitivityFieldSet& fields, std::size_t max_lag = 100,
                                   bool keep_curves = false);

// --- sensitivity dispatch and convergence ----------------------------------

struct MeasureConfig {
  DeltaConfig delta;
  DgsaConfig dgsa;
};

SensitivityFieldSet compute_sensitivity(const Ensemble& ens, Measure m, const MeasureConfig& cfg = {},
                                        Exec exec = Exec::Parallel);

struct ConvergenceStep {
  std::size_t previous_runs = 0;
  std::size_t runs = 0;
  double mean_abs_diff = 0.0;
  double min_abs_diff = 0.0;
  double max_abs_diff = 0.0;
};

struct ConvergenceReport {
  Measure measure = Measure::Sobol;
  std::vector<std::size_t> run_counts;
  std::vector<ConvergenceStep> steps;  // step s compares entry s + 1 with entry s
};

/// Per-voxel absolute differences between consecutive field sets, pooled over all
/// parameters. Throws GridMismatch on differing grids or parameter sets.
ConvergenceReport convergence_study(std::span<const SensitivityFieldSet> sequence,
                                    std::span<const std::size_t> run_counts);

ConvergenceReport convergence_study(std::span<const Ensemble> ensembles, Measure m, const MeasureConfig& cfg = {},
                                    Exec exec = Exec::Parallel);

// --- timing ------------------------------------------------------------------

struct TimingRow {
  std::string ensemble;
  std::size_t runs = 0;
  Measure measure = Measure::Sobol;
  double seconds = 0.0;
};

std::vector<TimingRow> timing_harness(std::span<const Ensemble> ensembles, std::span<const Measure> measures,
                                      const MeasureConfig& cfg = {}, Exec exec = Exec::Parallel);

// --- reports -----------------------------------------------------------------

struct EvaluationReport {
  std::vector<CoherencyReport> coherency;
  std::vector<ConvergenceReport> convergence;
  std::vector<TimingRow> timings;
};

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);
void write_report(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport read_report(const std::filesystem::path& path);

/// One row per lag: curve,distance,field,lag,acf (field "position" for the radial series).
void write_acf_csv(std::span<const CoherencyReport> reports, const std::filesystem::path& path);
/// One row per step: measure,previous_runs,runs,mean_abs_diff,min_abs_diff,max_abs_diff.
void write_convergence_csv(std::span<const ConvergenceReport> reports, const std::filesystem::path& path);

}  // namespace spatialsens
