// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/dgsa.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>

#include "parallel.hpp"
#include "spatialsens/error.hpp"

namespace spatialsens {

void DgsaConfig::validate() const {
  if (k_min < 2 || k_min > k_max) throw Error(Errc::InvalidArgument, "DGSA requires 2 <= k_min <= k_max");
  if (min_cluster_size < 2) throw Error(Errc::InvalidArgument, "DGSA min_cluster_size must be >= 2");
  if (!(quantile > 0.0 && quantile < 1.0)) throw Error(Errc::InvalidArgument, "DGSA quantile must be in (0, 1)");
  if (bootstrap_b == 0) throw Error(Errc::InvalidArgument, "DGSA bootstrap count must be >= 1");
}

// --- natural breaks -----------------------------------------------------------

namespace {

// Prefix sums over values shifted by a central value, which keeps the
// sum-of-squares difference well conditioned.
struct PrefixSums {
  std::vector<double> s1;
  std::vector<double> s2;

  explicit PrefixSums(std::span<const double> x) : s1(x.size() + 1, 0.0), s2(x.size() + 1, 0.0) {
    const double shift = x.empty() ? 0.0 : x[x.size() / 2];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x[i] - shift;
      s1[i + 1] = s1[i] + v;
      s2[i + 1] = s2[i] + v * v;
    }
  }

  // Sum of squared deviations of x[j..i] (inclusive).
  [[nodiscard]] double sse(std::size_t j, std::size_t i) const noexcept {
    const double n = static_cast<double>(i - j + 1);
    const double a = s1[i + 1] - s1[j];
    const double b = s2[i + 1] - s2[j];
    return std::max(0.0, b - a * a / n);
  }
};

}  // namespace

NaturalBreaks::NaturalBreaks(std::span<const double> sorted, std::size_t max_k)
    : n_(sorted.size()), max_k_(max_k), cost_(max_k * sorted.size()), split_(max_k * sorted.size(), 0) {
  if (max_k == 0 || max_k > n_) throw Error(Errc::InvalidK, "k must be in [1, n]");
  const PrefixSums ps(sorted);
  for (std::size_t i = 0; i < n_; ++i) cost_[i] = ps.sse(0, i);

  // Layer k: best[i] = min_{j} prev[j-1] + sse(j, i). The optimal split index is
  // monotone in i for the squared-deviation cost, so divide and conquer over i
  // gives the exact optimum in O(n log n) per layer.
  for (std::size_t k = 2; k <= max_k; ++k) {
    const double* prev = cost_.data() + (k - 2) * n_;
    double* cur = cost_.data() + (k - 1) * n_;
    std::uint32_t* split = split_.data() + (k - 1) * n_;
    for (std::size_t i = 0; i + 1 < k; ++i) cur[i] = std::numeric_limits<double>::infinity();

    struct Frame {
      std::size_t lo, hi, opt_lo, opt_hi;
    };
    std::vector<Frame> stack{{k - 1, n_ - 1, k - 1, n_ - 1}};
    while (!stack.empty()) {
      const Frame f = stack.back();
      stack.pop_back();
      if (f.lo > f.hi) continue;
      const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = std::max(f.opt_lo, k - 1);
      const std::size_t j_hi = std::min(mid, f.opt_hi);
      for (std::size_t j = std::max(f.opt_lo, k - 1); j <= j_hi; ++j) {
        const double v = prev[j - 1] + ps.sse(j, mid);
        if (v < best) {
          best = v;
          best_j = j;
        }
      }
      cur[mid] = best;
      split[mid] = static_cast<std::uint32_t>(best_j);
      if (mid > f.lo) stack.push_back({f.lo, mid - 1, f.opt_lo, best_j});
      stack.push_back({mid + 1, f.hi, best_j, f.opt_hi});
    }
  }
}

std::vector<std::uint32_t> NaturalBreaks::partition(std::size_t k) const {
  if (k == 0 || k > max_k_) throw Error(Errc::InvalidK, "k out of computed range");
  std::vector<std::uint32_t> labels(n_);
  std::size_t end = n_;  // exclusive
  for (std::size_t kk = k; kk >= 1; --kk) {
    const std::size_t start = kk == 1 ? 0 : split_[(kk - 1) * n_ + end - 1];
    for (std::size_t t = start; t < end; ++t) labels[t] = static_cast<std::uint32_t>(kk - 1);
    end = start;
  }
  return labels;
}

double NaturalBreaks::objective(std::size_t k) const {
  if (k == 0 || k > max_k_) throw Error(Errc::InvalidK, "k out of computed range");
  return cost_[(k - 1) * n_ + n_ - 1];
}

std::size_t count_distinct_sorted(std::span<const double> sorted) noexcept {
  if (sorted.empty()) return 0;
  std::size_t d = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) d += sorted[i] != sorted[i - 1];
  return d;
}

std::vector<std::uint32_t> natural_breaks(std::span<const double> sorted, std::size_t k) {
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw Error(Errc::InvalidArgument, "values must be sorted");
  const std::size_t distinct = count_distinct_sorted(sorted);
  if (k < 2 || k > distinct) {
    throw Error(Errc::InvalidK, "k=" + std::to_string(k) + " needs 2 <= k <= " + std::to_string(distinct));
  }
  return NaturalBreaks(sorted, k).partition(k);
}

double within_cluster_ss(std::span<const double> values, std::span<const std::uint32_t> labels) {
  if (values.size() != labels.size()) throw Error(Errc::LengthMismatch, "labels and values differ in length");
  const std::size_t k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> sum(k, 0.0), count(k, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[labels[i]] += values[i];
    count[labels[i]] += 1.0;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double mean = sum[labels[i]] / count[labels[i]];
    ss += (values[i] - mean) * (values[i] - mean);
  }
  return ss;
}

double silhouette_sorted(std::span<const double> x, std::span<const std::uint32_t> labels) {
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  // Cluster extents [begin, end) in sorted order.
  std::vector<std::size_t> begin, end;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || labels[i] != labels[i - 1]) {
      if (i > 0) end.push_back(i);
      begin.push_back(i);
    }
  }
  end.push_back(n);
  if (begin.size() < 2) return 0.0;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  auto range_sum = [&](std::size_t a, std::size_t b) { return prefix[b] - prefix[a]; };

  double total = 0.0;
  for (std::size_t c = 0; c < begin.size(); ++c) {
    const std::size_t a = begin[c], b = end[c];
    const std::size_t m = b - a;
    if (m == 1) continue;
    for (std::size_t i = a; i < b; ++i) {
      const double xi = x[i];
      const double left = static_cast<double>(i - a) * xi - range_sum(a, i);
      const double right = range_sum(i + 1, b) - static_cast<double>(b - i - 1) * xi;
      const double intra = std::max(0.0, left + right) / static_cast<double>(m - 1);
      // Clusters are contiguous in sorted order, so the nearest other cluster by
      // mean distance is one of the two neighbours.
      double inter = std::numeric_limits<double>::infinity();
      if (c > 0) {
        const std::size_t la = begin[c - 1], lb = end[c - 1];
        inter = std::min(inter, (static_cast<double>(lb - la) * xi - range_sum(la, lb)) / static_cast<double>(lb - la));
      }
      if (c + 1 < begin.size()) {
        const std::size_t ra = begin[c + 1], rb = end[c + 1];
        inter = std::min(inter, (range_sum(ra, rb) - static_cast<double>(rb - ra) * xi) / static_cast<double>(rb - ra));
      }
      inter = std::max(0.0, inter);
      const double denom = std::max(intra, inter);
      if (denom > 0.0) total += (inter - intra) / denom;
    }
  }
  return total / static_cast<double>(n);
}

KSelection select_k_silhouette(std::span<const double> sorted, std::size_t k_min, std::size_t k_max) {
  if (k_min < 2 || k_min > k_max) throw Error(Errc::InvalidArgument, "need 2 <= k_min <= k_max");
  const std::size_t distinct = count_distinct_sorted(sorted);
  if (distinct < k_min) {
    throw Error(Errc::DegenerateData, std::to_string(distinct) + " distinct values, need " + std::to_string(k_min));
  }
  const std::size_t k_hi = std::min(k_max, std::max(k_min, distinct - 1));
  const NaturalBreaks nb(sorted, k_hi);
  KSelection best;
  best.silhouette = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k <= k_hi; ++k) {
    auto labels = nb.partition(k);
    const double s = silhouette_sorted(sorted, labels);
    if (s > best.silhouette) {
      best.k = k;
      best.silhouette = s;
      best.labels = std::move(labels);
    }
  }
  return best;
}

// --- CDF distances --------------------------------------------------------------

double cdf_distance(std::span<const double> cluster, std::span<const double> all, double pmin, double pmax) {
  if (cluster.empty()) throw Error(Errc::EmptyCluster, "cluster has no members");
  if (all.empty()) throw Error(Errc::EmptyCluster, "full sample is empty");
  std::vector<double> c(cluster.begin(), cluster.end());
  std::vector<double> a(all.begin(), all.end());
  std::sort(c.begin(), c.end());
  std::sort(a.begin(), a.end());
  const double nc = static_cast<double>(c.size());
  const double na = static_cast<double>(a.size());

  // Sweep breakpoints in increasing order; between breakpoints both CDFs are constant.
  std::size_t ic = 0, ia = 0;
  while (ic < c.size() && c[ic] <= pmin) ++ic;
  while (ia < a.size() && a[ia] <= pmin) ++ia;
  double x = pmin;
  double dist = 0.0;
  while (x < pmax) {
    double next = pmax;
    if (ic < c.size()) next = std::min(next, c[ic]);
    if (ia < a.size()) next = std::min(next, a[ia]);
    dist += std::abs(static_cast<double>(ic) / nc - static_cast<double>(ia) / na) * (next - x);
    x = next;
    while (ic < c.size() && c[ic] <= x) ++ic;
    while (ia < a.size() && a[ia] <= x) ++ia;
  }
  return dist;
}

SortedSample::SortedSample(std::span<const double> values) : values_(values.begin(), values.end()) {
  std::sort(values_.begin(), values_.end());
  integral_.assign(values_.size(), 0.0);
  const double n = static_cast<double>(values_.size());
  for (std::size_t j = 1; j < values_.size(); ++j) {
    integral_[j] = integral_[j - 1] + static_cast<double>(j) / n * (values_[j] - values_[j - 1]);
  }
}

double SortedSample::subset_distance(std::span<const std::uint32_t> pos) const {
  const std::size_t n = values_.size();
  const std::size_t c = pos.size();
  if (c == 0) throw Error(Errc::EmptyCluster, "subset has no members");
  const auto& s = values_;
  const auto& in = integral_;

  // Below the first subset point the subset CDF is 0; above the last it is 1.
  double dist = in[pos[0]];
  dist += (s[n - 1] - s[pos[c - 1]]) - (in[n - 1] - in[pos[c - 1]]);
  // Full-sample CDF on [s_t, s_{t+1}) is (t+1)/n; it reaches level m/c from index
  // t* = ceil(m n / c) - 1. m n = q c + r is advanced without dividing per element.
  const double inv_c = 1.0 / static_cast<double>(c);
  const std::size_t step_q = n / c;
  const std::size_t step_r = n % c;
  std::size_t q = 0;
  std::size_t r = 0;
  for (std::size_t m = 1; m < c; ++m) {
    const std::size_t a = pos[m - 1];
    const std::size_t b = pos[m];
    const double level = static_cast<double>(m) * inv_c;
    q += step_q;
    r += step_r;
    if (r >= c) {
      r -= c;
      ++q;
    }
    const std::size_t t_star = q + (r > 0 ? 1 : 0) - 1;
    const std::size_t split = std::clamp(t_star, a, b);
    dist += level * (s[split] - s[a]) - (in[split] - in[a]);
    dist += (in[b] - in[split]) - level * (s[b] - s[split]);
  }
  return dist;
}

std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t param, std::size_t cluster_size, std::size_t runs) noexcept {
  return detail::mix64(detail::mix64(detail::mix64(seed, param), cluster_size), runs);
}

double bootstrap_threshold(const SortedSample& sample, std::size_t cluster_size, std::size_t b, double quantile,
                           std::uint64_t seed) {
  const std::size_t n = sample.size();
  if (cluster_size == 0 || cluster_size > n) throw Error(Errc::InvalidArgument, "cluster size must be in [1, R]");
  if (b == 0) throw Error(Errc::InvalidArgument, "bootstrap count must be >= 1");
  if (cluster_size == n) return 0.0;

  // A subset S and its complement C satisfy F_S - F_all = ((n - c) / n) (F_S - F_C) and
  // F_C - F_all = (c / n) (F_C - F_S), so d(S) = ((n - c) / c) d(C). Drawing the smaller
  // of the two keeps every draw O(min(c, n - c)).
  const bool complement = cluster_size > n - cluster_size;
  const std::size_t draw_size = complement ? n - cluster_size : cluster_size;
  const double scale =
      complement ? static_cast<double>(n - cluster_size) / static_cast<double>(cluster_size) : 1.0;

  std::mt19937_64 rng(seed);
  // Each 64-bit draw feeds two 32-bit halves; multiply-shift maps a half onto
  // [0, bound) (bound <= R < 2^32, so the bias is below 2^-20).
  std::uint64_t spare = 0;
  bool has_spare = false;
  const auto below = [&](std::uint64_t bound) {
    std::uint64_t half;
    if (has_spare) {
      half = spare >> 32;
    } else {
      spare = rng();
      half = spare & 0xffffffffu;
    }
    has_spare = !has_spare;
    return static_cast<std::size_t>((half * bound) >> 32);
  };
  std::vector<std::uint64_t> marked((n + 63) / 64, 0);
  std::vector<std::uint32_t> picked;
  picked.reserve(draw_size);
  std::vector<double> distances(b);
  for (std::size_t draw = 0; draw < b; ++draw) {
    // Floyd's algorithm into a bitmap: uniform subset without replacement whose
    // members are read back in ascending order.
    for (std::size_t j = n - draw_size; j < n; ++j) {
      std::size_t t = below(j + 1);
      if ((marked[t >> 6] >> (t & 63)) & 1u) t = j;
      marked[t >> 6] |= std::uint64_t{1} << (t & 63);
    }
    picked.clear();
    for (std::size_t w = 0; w < marked.size(); ++w) {
      std::uint64_t bits = marked[w];
      while (bits != 0) {
        picked.push_back(static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
        bits &= bits - 1;
      }
      marked[w] = 0;
    }
    distances[draw] = scale * sample.subset_distance(picked);
  }
  std::sort(distances.begin(), distances.end());
  const double h = static_cast<double>(b - 1) * quantile;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, b - 1);
  return distances[lo] + (h - static_cast<double>(lo)) * (distances[hi] - distances[lo]);
}

BootstrapCache::BootstrapCache(std::vector<SortedSample> params, std::size_t b, double quantile, std::uint64_t seed,
                               bool enabled)
    : params_(std::move(params)), b_(b), quantile_(quantile), seed_(seed), enabled_(enabled) {}

double BootstrapCache::threshold(std::size_t param, std::size_t cluster_size) const {
  const SortedSample& sample = params_.at(param);
  const std::size_t runs = sample.size();
  const std::uint64_t key = (static_cast<std::uint64_t>(param) << 40) | cluster_size;
  if (enabled_) {
    std::shared_lock lock(mutex_);
    if (auto it = table_.find(key); it != table_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  const double value =
      bootstrap_threshold(sample, cluster_size, b_, quantile_, bootstrap_seed(seed_, param, cluster_size, runs));
  if (enabled_) {
    std::unique_lock lock(mutex_);
    table_[key] = value;
  }
  return value;
}

// --- DGSA per voxel ---------------------------------------------------------------

namespace {

Matrix to_rank_space(const Matrix& p) {
  Matrix out(p.rows, p.cols);
  std::vector<std::uint32_t> order(p.rows);
  for (std::size_t i = 0; i < p.cols; ++i) {
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return p(a, i) < p(b, i); });
    const double denom = p.rows > 1 ? static_cast<double>(p.rows - 1) : 1.0;
    std::size_t j = 0;
    while (j < p.rows) {
      std::size_t k = j;
      while (k + 1 < p.rows && p(order[k + 1], i) == p(order[j], i)) ++k;
      const double rank = 0.5 * static_cast<double>(j + k) / denom;  // ties share the average rank
      for (std::size_t t = j; t <= k; ++t) out(order[t], i) = rank;
      j = k + 1;
    }
  }
  return out;
}

}  // namespace

DgsaContext::DgsaContext(const Matrix& p_in, const DgsaConfig& cfg) : cfg_(cfg), runs_(p_in.rows) {
  cfg.validate();
  const Matrix p = cfg.rank_space ? to_rank_space(p_in) : p_in;
  std::vector<SortedSample> samples;
  order_.resize(p.cols);
  sorted_.resize(p.cols);
  for (std::size_t i = 0; i < p.cols; ++i) {
    auto& ord = order_[i];
    ord.resize(runs_);
    std::iota(ord.begin(), ord.end(), 0u);
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) { return p(a, i) < p(b, i); });
    sorted_[i].resize(runs_);
    for (std::size_t j = 0; j < runs_; ++j) sorted_[i][j] = p(ord[j], i);
    samples.emplace_back(sorted_[i]);
  }
  cache_ = std::make_unique<BootstrapCache>(std::move(samples), cfg.bootstrap_b, cfg.quantile, cfg.seed, cfg.cache);
}

DgsaVoxelResult DgsaContext::evaluate(std::span<const double> y) const {
  if (y.size() != runs_) throw Error(Errc::LengthMismatch, "output sample count differs from parameter rows");
  const std::size_t n_params = order_.size();
  DgsaVoxelResult result;
  result.values.assign(n_params, 0.0);
  if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
    result.inert = true;
    return result;
  }

  std::vector<std::uint32_t> idx(runs_);
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return y[a] < y[b]; });
  std::vector<double> ys(runs_);
  for (std::size_t j = 0; j < runs_; ++j) ys[j] = y[idx[j]];

  KSelection sel;
  try {
    sel = select_k_silhouette(ys, cfg_.k_min, cfg_.k_max);
  } catch (const Error& e) {
    if (e.code() != Errc::DegenerateData) throw;
    result.inert = true;
    return result;
  }
  result.k = sel.k;

  // Cluster label per run; small clusters are dropped.
  std::vector<std::size_t> size(sel.k, 0);
  for (auto l : sel.labels) ++size[l];
  std::vector<int> keep_index(sel.k, -1);
  std::vector<std::size_t> kept_size;
  for (std::size_t c = 0; c < sel.k; ++c) {
    if (size[c] >= cfg_.min_cluster_size) {
      keep_index[c] = static_cast<int>(kept_size.size());
      kept_size.push_back(size[c]);
    }
  }
  const std::size_t kept = kept_size.size();
  result.surviving_clusters = kept;
  if (kept == 0) {
    result.inert = true;
    return result;
  }
  std::vector<int> run_cluster(runs_);
  for (std::size_t j = 0; j < runs_; ++j) run_cluster[idx[j]] = keep_index[sel.labels[j]];

  std::vector<double> dist(kept);
  std::vector<std::size_t> count(kept);
  const double n = static_cast<double>(runs_);
  for (std::size_t i = 0; i < n_params; ++i) {
    const auto& ord = order_[i];
    const auto& s = sorted_[i];
    std::fill(dist.begin(), dist.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    // One sweep over the parameter-sorted runs yields every cluster's CDF distance.
    for (std::size_t j = 0; j < runs_; ++j) {
      const int c = run_cluster[ord[j]];
      if (c >= 0) ++count[static_cast<std::size_t>(c)];
      if (j + 1 < runs_ && s[j + 1] > s[j]) {
        const double gap = s[j + 1] - s[j];
        const double f_all = static_cast<double>(j + 1) / n;
        for (std::size_t k = 0; k < kept; ++k) {
          dist[k] += std::abs(static_cast<double>(count[k]) / static_cast<double>(kept_size[k]) - f_all) * gap;
        }
      }
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < kept; ++k) {
      const double threshold = cache_->threshold(i, kept_size[k]);
      if (threshold > 0.0) acc += dist[k] / threshold;
    }
    result.values[i] = acc / static_cast<double>(kept);
  }
  return result;
}

DgsaVoxelResult dgsa_voxel(std::span<const double> y, const Matrix& p, const DgsaConfig& cfg) {
  if (y.size() != p.rows) throw Error(Errc::LengthMismatch, "output and parameter sample counts differ");
  return DgsaContext(p, cfg).evaluate(y);
}

SensitivityFieldSet dgsa_volume(const Ensemble& ens, const DgsaConfig& cfg, Exec exec, DgsaStats* stats) {
  const DgsaContext ctx(ens.pspace().samples, cfg);
  const std::size_t n = ens.param_count();
  const std::size_t voxels = ens.voxel_count();

  SensitivityFieldSet out;
  out.measure = Measure::Dgsa;
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
        const auto r = ctx.evaluate(y);
        for (std::size_t i = 0; i < n; ++i) out.fields[i][v] = r.values[i];
        out.flags[v] = r.inert ? voxel_flags::kInert : 0;
      },
      /*dynamic=*/true);

  if (stats) {
    stats->cache_hits = ctx.cache().hits();
    stats->cache_misses = ctx.cache().misses();
    stats->inert_voxels = static_cast<std::size_t>(
        std::count_if(out.flags.begin(), out.flags.end(), [](std::uint8_t f) { return f & voxel_flags::kInert; }));
  }
  return out;
}

}  // namespace spatialsens
