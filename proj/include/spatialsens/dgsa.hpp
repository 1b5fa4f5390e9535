// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "spatialsens/ensemble.hpp"
#include "spatialsens/exec.hpp"
#include "spatialsens/sensitivity.hpp"

namespace spatialsens {

struct DgsaConfig {
  std::size_t k_min = 3;
  std::size_t k_max = 10;
  std::size_t min_cluster_size = 10;
  std::size_t bootstrap_b = 1000;
  double quantile = 0.99;
  std::uint64_t seed = 0;
  bool rank_space = false;   // compare CDFs of parameter ranks instead of values
  bool cache = true;         // memoize bootstrap thresholds volume-wide

  void validate() const;
};

// --- Fisher natural breaks -------------------------------------------------

/// Exact optimal 1D k-partitions of sorted data (minimum within-cluster sum of
/// squares) for every k up to `max_k`, computed once by dynamic programming.
class NaturalBreaks {
 public:
  NaturalBreaks(std::span<const double> sorted, std::size_t max_k);

  /// Cluster label (0..k-1, non-decreasing) for every element.
  [[nodiscard]] std::vector<std::uint32_t> partition(std::size_t k) const;
  [[nodiscard]] double objective(std::size_t k) const;
  [[nodiscard]] std::size_t max_k() const noexcept { return max_k_; }

 private:
  std::size_t n_;
  std::size_t max_k_;
  std::vector<double> cost_;             // cost_[k-1][i]: best SSE of first i+1 values in k clusters
  std::vector<std::uint32_t> split_;     // start index of the last cluster
};

/// Throws InvalidK unless 2 <= k <= number of distinct values.
std::vector<std::uint32_t> natural_breaks(std::span<const double> sorted, std::size_t k);

/// Within-cluster sum of squared deviations of a labelled partition.
double within_cluster_ss(std::span<const double> values, std::span<const std::uint32_t> labels);

std::size_t count_distinct_sorted(std::span<const double> sorted) noexcept;

/// Mean 1D silhouette (absolute distance) of contiguous clusters over sorted data.
/// Singleton clusters contribute 0.
double silhouette_sorted(std::span<const double> sorted, std::span<const std::uint32_t> labels);

struct KSelection {
  std::size_t k = 0;
  std::vector<std::uint32_t> labels;
  double silhouette = 0.0;
};

/// Sweeps k over [k_min, min(k_max, distinct-1)] and keeps the best mean silhouette
/// (ties: smaller k). Throws DegenerateData with fewer than k_min distinct values.
KSelection select_k_silhouette(std::span<const double> sorted, std::size_t k_min, std::size_t k_max);

// --- CDF distances and bootstrap ------------------------------------------

/// Integral over [pmin, pmax] of |F_cluster(p) - F_all(p)| for empirical step CDFs.
double cdf_distance(std::span<const double> cluster, std::span<const double> all, double pmin, double pmax);

/// Sorted copy of one parameter column with prefix integrals of its empirical CDF,
/// so that the CDF distance of any subset is evaluated in O(subset size).
class SortedSample {
 public:
  explicit SortedSample(std::span<const double> values);

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  /// CDF distance of the subset made of the given sorted positions (ascending, distinct).
  [[nodiscard]] double subset_distance(std::span<const std::uint32_t> positions) const;

 private:
  std::vector<double> values_;
  std::vector<double> integral_;  // integral_[j] = integral of F from values_[0] to values_[j]
};

/// 0.99-style quantile of CDF distances of `b` random subsets of size `cluster_size`
/// drawn without replacement. Deterministic in `seed`.
double bootstrap_threshold(const SortedSample& sample, std::size_t cluster_size, std::size_t b, double quantile,
                           std::uint64_t seed);

/// Seed used for the key (param, cluster size, run count); shared by cached and uncached paths.
std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t param, std::size_t cluster_size, std::size_t runs) noexcept;

/// Volume-wide memo of bootstrap thresholds keyed by (parameter, cluster size).
/// Safe for concurrent use; duplicate computation of one key is benign.
class BootstrapCache {
 public:
  BootstrapCache(std::vector<SortedSample> params, std::size_t b, double quantile, std::uint64_t seed, bool enabled);

  double threshold(std::size_t param, std::size_t cluster_size) const;

  [[nodiscard]] std::size_t hits() const noexcept { return hits_.load(); }
  [[nodiscard]] std::size_t misses() const noexcept { return misses_.load(); }
  [[nodiscard]] const SortedSample& sample(std::size_t param) const { return params_[param]; }
  [[nodiscard]] std::size_t param_count() const noexcept { return params_.size(); }

 private:
  std::vector<SortedSample> params_;
  std::size_t b_;
  double quantile_;
  std::uint64_t seed_;
  bool enabled_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::uint64_t, double> table_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

struct DgsaVoxelResult {
  std::vector<double> values;  // s(p_i), one per parameter
  bool inert = false;
  std::size_t k = 0;               // chosen cluster count (0 when inert)
  std::size_t surviving_clusters = 0;
};

/// Shared per-ensemble state for DGSA: parameter orderings and the threshold cache.
class DgsaContext {
 public:
  DgsaContext(const Matrix& p, const DgsaConfig& cfg);

  [[nodiscard]] DgsaVoxelResult evaluate(std::span<const double> y) const;
  [[nodiscard]] const BootstrapCache& cache() const noexcept { return *cache_; }

 private:
  DgsaConfig cfg_;
  std::size_t runs_;
  std::vector<std::vector<std::uint32_t>> order_;  // runs sorted by each parameter
  std::vector<std::vector<double>> sorted_;        // parameter values in that order
  std::unique_ptr<BootstrapCache> cache_;
};

DgsaVoxelResult dgsa_voxel(std::span<const double> y, const Matrix& p, const DgsaConfig& cfg = {});

struct DgsaStats {
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  std::size_t inert_voxels = 0;
};

SensitivityFieldSet dgsa_volume(const Ensemble& ens, const DgsaConfig& cfg = {}, Exec exec = Exec::Parallel,
                                DgsaStats* stats = nullptr);

}  // namespace spatialsens
