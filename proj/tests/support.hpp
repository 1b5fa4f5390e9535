// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the unit tests: scratch directories and small fixtures.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "spatialsens/ensemble.hpp"
#include "spatialsens/sensitivity.hpp"

namespace spatialsens::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spatialsens_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Field set with independent uniform values in [0, scale).
inline SensitivityFieldSet random_fields(const GridDims& dims, std::size_t n, std::uint64_t seed,
                                         double scale = 1.0, Measure m = Measure::Delta) {
  SensitivityFieldSet fs;
  fs.measure = m;
  fs.dims = dims;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, scale);
  for (std::size_t i = 0; i < n; ++i) {
    fs.param_names.push_back("P" + std::to_string(i + 1));
    std::vector<double> f(dims.voxel_count());
    for (auto& v : f) v = u(rng);
    fs.fields.push_back(std::move(f));
  }
  fs.flags.assign(dims.voxel_count(), 0);
  return fs;
}

}  // namespace spatialsens::testing
