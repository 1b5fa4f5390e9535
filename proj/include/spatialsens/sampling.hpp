// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spatialsens/ensemble.hpp"

namespace spatialsens {

/// Gray-code Sobol' sequence with a per-dimension random digital shift.
/// Supports up to `max_dimensions()` coordinates.
class SobolSequence {
 public:
  SobolSequence(std::size_t dimensions, std::uint64_t seed);

  static constexpr std::size_t max_dimensions() noexcept { return 21; }

  /// Advances and returns the next point in [0, 1)^d. The all-zero first point is skipped.
  const std::vector<double>& next();

  [[nodiscard]] std::size_t dimensions() const noexcept { return dims_; }

 private:
  std::size_t dims_;
  std::vector<std::uint32_t> directions_;  // dims x 32
  std::vector<std::uint32_t> state_;
  std::vector<std::uint32_t> shift_;
  std::vector<double> point_;
  std::uint64_t index_ = 0;
};

/// Saltelli design: rows are laid out as A (N rows), B (N rows), then AB_1..AB_n,
/// where AB_i is A with column i taken from B. Total N * (n + 2) rows.
ParameterSpace saltelli_sample(const std::vector<ParameterRange>& ranges, std::size_t base_n,
                               std::uint64_t seed = 0);

/// Largest base N such that N * (n + 2) <= runs.
std::size_t saltelli_base_for_runs(std::size_t runs, std::size_t param_count) noexcept;

/// Synthetic ensemble on a Saltelli design with base N = cfg.run_count / 5 (three
/// parameters), i.e. the largest Saltelli layout not exceeding the requested run count.
Ensemble synthetic_saltelli_ensemble(const SyntheticConfig& cfg);

/// Independent uniform samples (no structure); used for non-Saltelli ensembles.
ParameterSpace uniform_sample(const std::vector<ParameterRange>& ranges, std::size_t runs,
                              std::uint64_t seed = 0);

}  // namespace spatialsens
