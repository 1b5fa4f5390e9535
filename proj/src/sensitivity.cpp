// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/sensitivity.hpp"

#include <algorithm>
#include <cctype>

#include "parallel.hpp"
#include "spatialsens/error.hpp"

namespace spatialsens {

std::string_view to_string(Measure m) noexcept {
  switch (m) {
    case Measure::Sobol: return "sobol";
    case Measure::Delta: return "delta";
    case Measure::Dgsa: return "dgsa";
  }
  return "unknown";
}

Measure measure_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sobol") return Measure::Sobol;
  if (lower == "delta") return Measure::Delta;
  if (lower == "dgsa") return Measure::Dgsa;
  throw Error(Errc::InvalidArgument, "unknown measure '" + std::string(s) + "'");
}

double first_band_width(Measure m) noexcept { return m == Measure::Dgsa ? 1.0 : 0.2; }

std::vector<double> SensitivityFieldSet::vector_at(std::size_t voxel) const {
  std::vector<double> out(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) out[i] = fields[i][voxel];
  return out;
}

std::size_t SensitivityFieldSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return i;
  }
  throw Error(Errc::BadParamIndex, "unknown parameter '" + std::string(name) + "'");
}

std::vector<double> sobol_first_order(std::span<const double> y, std::size_t n, std::size_t base_n) {
  if (n == 0 || base_n == 0 || y.size() != base_n * (n + 2)) {
    throw Error(Errc::LayoutMismatch, "expected " + std::to_string(base_n * (n + 2)) + " outputs for n=" +
                                          std::to_string(n) + ", N=" + std::to_string(base_n) + ", got " +
                                          std::to_string(y.size()));
  }
  const auto ab = y.first(2 * base_n);
  const auto [lo, hi] = std::minmax_element(ab.begin(), ab.end());
  if (*lo == *hi) throw Error(Errc::VarianceZero, "output is constant over the A and B blocks");

  double mean = 0.0;
  for (double v : ab) mean += v;
  mean /= static_cast<double>(ab.size());
  double var = 0.0;
  for (double v : ab) var += (v - mean) * (v - mean);
  var /= static_cast<double>(ab.size());
  if (!(var > 0.0)) throw Error(Errc::VarianceZero, "output variance is zero");

  const double* ya = y.data();
  const double* yb = y.data() + base_n;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* yab = y.data() + (2 + i) * base_n;
    double acc = 0.0;
    for (std::size_t j = 0; j < base_n; ++j) acc += yb[j] * (yab[j] - ya[j]);
    s[i] = acc / static_cast<double>(base_n) / var;
  }
  return s;
}

SensitivityFieldSet sobol_volume(const Ensemble& ens, Exec exec) {
  const auto base = ens.saltelli_base();
  if (!base) throw Error(Errc::NotSaltelliLayout, "ensemble '" + ens.name() + "' does not declare a Saltelli layout");
  const std::size_t n = ens.param_count();
  const std::size_t voxels = ens.voxel_count();

  SensitivityFieldSet out;
  out.measure = Measure::Sobol;
  out.dims = ens.dims();
  for (const auto& p : ens.pspace().params) out.param_names.push_back(p.name);
  out.fields.assign(n, std::vector<double>(voxels, 0.0));
  out.flags.assign(voxels, 0);

  detail::parallel_for(voxels, exec, [&](std::size_t v) {
    thread_local std::vector<double> y;
    y.resize(ens.run_count());
    ens.gather(v, y);
    try {
      const auto s = sobol_first_order(y, n, *base);
      std::uint8_t flag = 0;
      for (std::size_t i = 0; i < n; ++i) {
        out.fields[i][v] = s[i];
        if (s[i] < 0.0 || s[i] > 1.0) flag |= voxel_flags::kOutOfRange;
      }
      out.flags[v] = flag;
    } catch (const Error& e) {
      if (e.code() != Errc::VarianceZero) throw;
      out.flags[v] = voxel_flags::kInert;
    }
  });
  return out;
}

}  // namespace spatialsens
