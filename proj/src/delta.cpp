// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "parallel.hpp"
#include "spatialsens/error.hpp"
#include "spatialsens/sensitivity.hpp"

namespace spatialsens {

std::size_t delta_auto_slices(std::size_t runs) noexcept {
  // Equal-frequency partition rule of the reference delta implementation:
  // M = min(ceil(N^(2 / (7 + tanh((1500 - N) / 500)))), 48).
  const double n = static_cast<double>(runs);
  const double exponent = 2.0 / (7.0 + std::tanh((1500.0 - n) / 500.0));
  const auto m = static_cast<std::size_t>(std::ceil(std::pow(n, exponent)));
  return std::clamp<std::size_t>(m, 2, 48);
}

double kde_bandwidth(std::span<const double> samples, Bandwidth rule) {
  const auto n = static_cast<double>(samples.size());
  if (samples.size() < 2) return 0.0;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double factor = rule == Bandwidth::Scott ? std::pow(n, -0.2) : std::pow(n * 0.75, -0.2);
  return sd * factor;
}

void kde_on_grid(std::span<const double> samples, double bandwidth, double lo, double step, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (samples.empty() || out.empty() || !(bandwidth > 0.0)) return;
  const auto g = static_cast<std::ptrdiff_t>(out.size());
  const double d = step / bandwidth;
  // exp(-(g_k - y)^2 / 2h^2) on a uniform grid satisfies a two-term multiplicative
  // recurrence, so each sample needs three exponentials instead of one per grid point.
  const double q = std::exp(-d * d);
  constexpr double kNegligible = 1e-18;
  for (double y : samples) {
    std::ptrdiff_t k0 = step > 0.0 ? static_cast<std::ptrdiff_t>(std::llround((y - lo) / step)) : 0;
    k0 = std::clamp<std::ptrdiff_t>(k0, 0, g - 1);
    const double u = (lo + static_cast<double>(k0) * step - y) / bandwidth;
    const double peak = std::exp(-0.5 * u * u);
    out[k0] += peak;

    double t = peak;
    double r = std::exp(-d * u - 0.5 * d * d);
    for (std::ptrdiff_t k = k0 + 1; k < g; ++k) {
      t *= r;
      r *= q;
      if (t < kNegligible) break;
      out[k] += t;
    }
    t = peak;
    r = std::exp(d * u - 0.5 * d * d);
    for (std::ptrdiff_t k = k0 - 1; k >= 0; --k) {
      t *= r;
      r *= q;
      if (t < kNegligible) break;
      out[k] += t;
    }
  }
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (auto& v : out) v *= norm;
}

namespace {

// Equal-frequency slicing of every parameter, shared by all voxels of a volume.
class DeltaPlan {
 public:
  DeltaPlan(const Matrix& p, const DeltaConfig& cfg) : cfg_(cfg), runs_(p.rows), params_(p.cols) {
    if (cfg.grid_points < 2) throw Error(Errc::InvalidArgument, "delta density grid needs >= 2 points");
    slices_ = cfg.slices ? *cfg.slices : delta_auto_slices(runs_);
    if (slices_ < 2) throw Error(Errc::InvalidArgument, "delta slice count must be >= 2");
    if (runs_ < 2 * slices_) {
      throw Error(Errc::TooFewSamples, std::to_string(runs_) + " runs cannot fill " + std::to_string(slices_) +
                                           " slices with >= 2 samples each");
    }
    order_.resize(params_);
    for (std::size_t i = 0; i < params_; ++i) {
      auto& ord = order_[i];
      ord.resize(runs_);
      std::iota(ord.begin(), ord.end(), 0u);
      std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) { return p(a, i) < p(b, i); });
    }
    bounds_.resize(slices_ + 1);
    for (std::size_t m = 0; m <= slices_; ++m) bounds_[m] = m * runs_ / slices_;
  }

  std::vector<double> evaluate(std::span<const double> y) const {
    std::vector<double> delta(params_, 0.0);
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) return delta;

    const std::size_t g = cfg_.grid_points;
    const double step = (hi - lo) / static_cast<double>(g - 1);
    std::vector<double> f_all(g), f_slice(g), slice;
    const double h_all = kde_bandwidth(y, cfg_.bandwidth);
    kde_on_grid(y, h_all, lo, step, f_all);

    for (std::size_t i = 0; i < params_; ++i) {
      double acc = 0.0;
      for (std::size_t m = 0; m < slices_; ++m) {
        slice.clear();
        for (std::size_t j = bounds_[m]; j < bounds_[m + 1]; ++j) slice.push_back(y[order_[i][j]]);
        double h = kde_bandwidth(slice, cfg_.bandwidth);
        if (!(h > 0.0)) h = h_all;  // constant slice: spread it like the unconditional density
        kde_on_grid(slice, h, lo, step, f_slice);
        double shift = 0.0;
        for (std::size_t k = 0; k < g; ++k) shift += std::abs(f_all[k] - f_slice[k]);
        acc += static_cast<double>(slice.size()) / static_cast<double>(runs_) * shift * step;
      }
      delta[i] = std::clamp(0.5 * acc, 0.0, 1.0);
    }
    return delta;
  }

 private:
  DeltaConfig cfg_;
  std::size_t runs_;
  std::size_t params_;
  std::size_t slices_ = 0;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::size_t> bounds_;
};

}  // namespace

std::vector<double> delta_index(std::span<const double> y, const Matrix& p, const DeltaConfig& cfg) {
  if (y.size() != p.rows) throw Error(Errc::LengthMismatch, "output and parameter sample counts differ");
  return DeltaPlan(p, cfg).evaluate(y);
}

SensitivityFieldSet delta_volume(const Ensemble& ens, const DeltaConfig& cfg, Exec exec) {
  const DeltaPlan plan(ens.pspace().samples, cfg);
  const std::size_t n = ens.param_count();
  const std::size_t voxels = ens.voxel_count();

  SensitivityFieldSet out;
  out.measure = Measure::Delta;
  out.dims = ens.dims();
  for (const auto& p : ens.pspace().params) out.param_names.push_back(p.name);
  out.fields.assign(n, std::vector<double>(voxels, 0.0));
  out.flags.assign(voxels, 0);

  detail::parallel_for(
      voxels, exec,
      [&](std::size_t v) {
        thread_local std::vector<double> y;
        y.resize(ens.run_count());
        ens.gather(v, y);
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        if (*lo == *hi) {
          out.flags[v] = voxel_flags::kInert;
          return;
        }
        const auto d = plan.evaluate(y);
        for (std::size_t i = 0; i < n; ++i) out.fields[i][v] = d[i];
      },
      /*dynamic=*/true);
  return out;
}

}  // namespace spatialsens
