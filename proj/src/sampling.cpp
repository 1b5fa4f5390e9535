// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/sampling.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <random>

#include "parallel.hpp"
#include "spatialsens/error.hpp"

namespace spatialsens {

namespace {

// Joe & Kuo primitive polynomials and initial direction numbers for dimensions 2..21.
struct DirectionInit {
  unsigned degree;
  unsigned coeffs;
  std::array<std::uint32_t, 7> m;
};

constexpr std::array<DirectionInit, 20> kDirections{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

constexpr unsigned kBits = 32;

}  // namespace

SobolSequence::SobolSequence(std::size_t dimensions, std::uint64_t seed)
    : dims_(dimensions), directions_(dimensions * kBits), state_(dimensions, 0), shift_(dimensions), point_(dimensions) {
  if (dimensions == 0 || dimensions > max_dimensions()) {
    throw Error(Errc::InvalidArgument, "Sobol sequence supports 1.." + std::to_string(max_dimensions()) +
                                           " dimensions, requested " + std::to_string(dimensions));
  }
  for (unsigned k = 0; k < kBits; ++k) directions_[k] = 1u << (kBits - 1 - k);
  for (std::size_t d = 1; d < dimensions; ++d) {
    const auto& init = kDirections[d - 1];
    std::uint32_t* v = directions_.data() + d * kBits;
    const unsigned s = init.degree;
    for (unsigned k = 0; k < s && k < kBits; ++k) v[k] = init.m[k] << (kBits - 1 - k);
    for (unsigned k = s; k < kBits; ++k) {
      v[k] = v[k - s] ^ (v[k - s] >> s);
      for (unsigned l = 1; l < s; ++l) {
        if ((init.coeffs >> (s - 1 - l)) & 1u) v[k] ^= v[k - l];
      }
    }
  }
  std::mt19937_64 rng(detail::mix64(seed, 0x50b01ULL));
  for (auto& s : shift_) s = static_cast<std::uint32_t>(rng() >> 32);
}

const std::vector<double>& SobolSequence::next() {
  // Gray-code update: flip the direction number at the lowest zero bit of the index.
  const unsigned c = static_cast<unsigned>(std::countr_one(index_));
  ++index_;
  if (c >= kBits) throw Error(Errc::InvalidArgument, "Sobol sequence exhausted");
  for (std::size_t d = 0; d < dims_; ++d) {
    state_[d] ^= directions_[d * kBits + c];
    point_[d] = static_cast<double>(state_[d] ^ shift_[d]) * 0x1.0p-32;
  }
  return point_;
}

std::size_t saltelli_base_for_runs(std::size_t runs, std::size_t param_count) noexcept {
  return runs / (param_count + 2);
}

ParameterSpace saltelli_sample(const std::vector<ParameterRange>& ranges, std::size_t base_n, std::uint64_t seed) {
  if (base_n < 2) throw Error(Errc::InvalidBaseN, "Saltelli base N must be >= 2, got " + std::to_string(base_n));
  const std::size_t n = ranges.size();
  if (n == 0) throw Error(Errc::InvalidArgument, "at least one parameter is required");

  SobolSequence seq(2 * n, seed);
  ParameterSpace ps;
  ps.params = ranges;
  ps.samples = Matrix(base_n * (n + 2), n);
  auto scale = [&](std::size_t i, double u) {
    const double v = ranges[i].min + u * (ranges[i].max - ranges[i].min);
    return std::clamp(v, ranges[i].min, ranges[i].max);
  };
  for (std::size_t j = 0; j < base_n; ++j) {
    const auto& u = seq.next();
    for (std::size_t i = 0; i < n; ++i) {
      ps.samples(j, i) = scale(i, u[i]);
      ps.samples(base_n + j, i) = scale(i, u[n + i]);
    }
  }
  for (std::size_t block = 0; block < n; ++block) {
    const std::size_t offset = (2 + block) * base_n;
    for (std::size_t j = 0; j < base_n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        ps.samples(offset + j, i) = i == block ? ps.samples(base_n + j, i) : ps.samples(j, i);
      }
    }
  }
  return ps;
}

Ensemble synthetic_saltelli_ensemble(const SyntheticConfig& cfg) {
  const std::vector<ParameterRange> ranges{{"P1", 0.0, 1.0}, {"P2", 0.0, 1.0}, {"P3", 0.0, 1.0}};
  const std::size_t base = saltelli_base_for_runs(cfg.run_count, ranges.size());
  return generate_synthetic(cfg, saltelli_sample(ranges, base, cfg.seed), base);
}

ParameterSpace uniform_sample(const std::vector<ParameterRange>& ranges, std::size_t runs, std::uint64_t seed) {
  if (ranges.empty()) throw Error(Errc::InvalidArgument, "at least one parameter is required");
  if (runs == 0) throw Error(Errc::InvalidArgument, "run count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParameterSpace ps;
  ps.params = ranges;
  ps.samples = Matrix(runs, ranges.size());
  for (std::size_t r = 0; r < runs; ++r) {
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      ps.samples(r, i) = ranges[i].min + unit(rng) * (ranges[i].max - ranges[i].min);
    }
  }
  return ps;
}

}  // namespace spatialsens
