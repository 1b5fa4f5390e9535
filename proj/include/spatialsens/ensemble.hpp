// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spatialsens/grid.hpp"

namespace spatialsens {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  [[nodiscard]] double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  [[nodiscard]] std::vector<double> column(std::size_t c) const;
};

struct ParameterRange {
  std::string name;
  double min = 0.0;
  double max = 1.0;
};

/// Parameter names and ranges plus the R x n sample matrix (run r, parameter i).
struct ParameterSpace {
  std::vector<ParameterRange> params;
  Matrix samples;

  [[nodiscard]] std::size_t param_count() const noexcept { return params.size(); }
  [[nodiscard]] std::size_t run_count() const noexcept { return samples.rows; }

  /// Throws RangeViolation if a sample lies outside its declared range.
  void validate() const;
};

/// Extra per-voxel domain data shown as additional PCP axes (e.g. ablation probability).
struct AuxField {
  std::string name;
  std::vector<float> values;
};

/// Runs of one simulation model on a shared grid. Volumes are stored as 32-bit
/// floats in run-major order and widened to double on extraction.
class Ensemble {
 public:
  Ensemble() = default;
  /// Validates every structural invariant; throws on violation.
  Ensemble(std::string name, GridDims dims, ParameterSpace pspace, std::vector<float> values,
           std::vector<AuxField> aux = {}, std::optional<std::size_t> saltelli_base = std::nullopt);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const GridDims& dims() const noexcept { return dims_; }
  [[nodiscard]] const ParameterSpace& pspace() const noexcept { return pspace_; }
  [[nodiscard]] const std::vector<AuxField>& aux() const noexcept { return aux_; }
  [[nodiscard]] std::size_t run_count() const noexcept { return pspace_.run_count(); }
  [[nodiscard]] std::size_t voxel_count() const noexcept { return dims_.voxel_count(); }
  [[nodiscard]] std::size_t param_count() const noexcept { return pspace_.param_count(); }

  /// Base sample count N when the rows follow the A, B, AB_1..AB_n block layout.
  [[nodiscard]] std::optional<std::size_t> saltelli_base() const noexcept { return saltelli_base_; }

  [[nodiscard]] std::span<const float> volume(std::size_t run) const {
    return {values_.data() + run * voxel_count(), voxel_count()};
  }
  [[nodiscard]] const std::vector<float>& raw_values() const noexcept { return values_; }

  /// Writes the output of every run at `voxel` into `out` (size R) without allocating.
  void gather(std::size_t voxel, std::span<double> out) const;

 private:
  std::string name_;
  GridDims dims_;
  ParameterSpace pspace_;
  std::vector<float> values_;
  std::vector<AuxField> aux_;
  std::optional<std::size_t> saltelli_base_;
};

/// Output values of all runs at one voxel, in sample-row order.
std::vector<double> voxel_series(const Ensemble& ens, std::size_t linear_index);

Ensemble load_ensemble(const std::filesystem::path& manifest_path);

/// Writes `ensemble.json` plus one raw float32 file per run (and per aux field) into `dir`.
/// Returns the manifest path.
std::filesystem::path write_ensemble(const Ensemble& ens, const std::filesystem::path& dir);

struct SyntheticConfig {
  GridDims dims{32, 32, 32};
  std::size_t run_count = 4096;
  double noise_max = 0.01;
  std::uint64_t seed = 0;
};

/// Three Gaussian kernels driven by P1, P2 (P3 inert) plus per-voxel uniform noise.
/// `samples` must hold exactly three parameters in [0, 1].
Ensemble generate_synthetic(const SyntheticConfig& cfg, const ParameterSpace& samples,
                            std::optional<std::size_t> saltelli_base = std::nullopt);

/// Noise-free value of the synthetic field at integer voxel coordinates.
double synthetic_field(double x, double y, double z, double p1, double p2) noexcept;

/// Trilinear resampling of every run (and aux field) to `target`.
Ensemble resample_trilinear(const Ensemble& ens, const GridDims& target);

/// Raw little-endian float32 volume IO.
std::vector<float> read_raw_f32(const std::filesystem::path& path, std::size_t count);
void write_raw_f32(const std::filesystem::path& path, std::span<const float> values);

}  // namespace spatialsens
