// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "spatialsens/error.hpp"
#include "spatialsens/sampling.hpp"
#include "spatialsens/sensitivity.hpp"

using namespace spatialsens;

namespace {

constexpr double kPi = std::numbers::pi;

double ishigami(double x1, double x2, double x3, double a, double b) {
  return std::sin(x1) + a * std::sin(x2) * std::sin(x2) + b * std::pow(x3, 4) * std::sin(x1);
}

// Closed-form first-order indices of the Ishigami function.
std::array<double, 3> ishigami_indices(double a, double b) {
  const double v1 = 0.5 * std::pow(1.0 + b * std::pow(kPi, 4) / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double v13 = b * b * std::pow(kPi, 8) * (1.0 / 18.0 - 1.0 / 50.0);
  const double v = v1 + v2 + v13;
  return {v1 / v, v2 / v, 0.0};
}

std::vector<double> evaluate_design(const ParameterSpace& ps, double a, double b) {
  std::vector<double> y(ps.run_count());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = ishigami(ps.samples(r, 0), ps.samples(r, 1), ps.samples(r, 2), a, b);
  return y;
}

}  // namespace

TEST_CASE("closed-form Ishigami indices match the textbook values") {
  const auto s = ishigami_indices(7.0, 0.1);
  CHECK(s[0] == doctest::Approx(0.3139).epsilon(1e-3));
  CHECK(s[1] == doctest::Approx(0.4424).epsilon(1e-3));
}

TEST_CASE("Sobol first-order estimator converges on Ishigami") {
  const std::vector<ParameterRange> r{{"x1", -kPi, kPi}, {"x2", -kPi, kPi}, {"x3", -kPi, kPi}};
  const std::size_t n = 8192;
  const auto ps = saltelli_sample(r, n, 1);
  const auto s = sobol_first_order(evaluate_design(ps, 7.0, 0.1), 3, n);
  const auto truth = ishigami_indices(7.0, 0.1);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s[i] - truth[i]) < 0.03);
}

TEST_CASE("Sobol estimator: additive linear model has S_i = c_i^2 / sum c^2") {
  const std::vector<ParameterRange> r{{"a", 0.0, 1.0}, {"b", 0.0, 1.0}};
  const std::size_t n = 4096;
  const auto ps = saltelli_sample(r, n, 5);
  std::vector<double> y(ps.run_count());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = 3.0 * ps.samples(k, 0) + 1.0 * ps.samples(k, 1);
  const auto s = sobol_first_order(y, 2, n);
  CHECK(std::abs(s[0] - 0.9) < 0.02);
  CHECK(std::abs(s[1] - 0.1) < 0.02);
}

TEST_CASE("Sobol estimator rejects constant output and wrong layouts") {
  std::vector<double> y(5 * 10, 1.0);
  try {
    (void)sobol_first_order(y, 3, 10);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::VarianceZero);
  }
  try {
    (void)sobol_first_order(std::vector<double>(49, 0.0), 3, 10);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::LayoutMismatch);
  }
}

TEST_CASE("Sobol volume: serial and parallel kernels agree bit-for-bit and flag inert voxels") {
  SyntheticConfig cfg;
  cfg.dims = {8, 8, 4};
  cfg.run_count = 500;
  cfg.noise_max = 0.0;
  const Ensemble e = synthetic_saltelli_ensemble(cfg);
  const auto a = sobol_volume(e, Exec::Serial);
  const auto b = sobol_volume(e, Exec::Parallel);
  CHECK(a.fields == b.fields);
  CHECK(a.flags == b.flags);
  CHECK(a.param_names == std::vector<std::string>{"P1", "P2", "P3"});
  // P3 does not enter the noiseless field, so its AB block reproduces A exactly.
  for (double v : a.fields[2]) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("Sobol volume requires a Saltelli layout") {
  ParameterSpace ps;
  ps.params = {{"a", 0.0, 1.0}};
  ps.samples = Matrix(4, 1, 0.5);
  const Ensemble e("plain", {2, 2, 1}, ps, std::vector<float>(16, 1.0f));
  try {
    (void)sobol_volume(e);
    FAIL("expected throw");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::NotSaltelliLayout);
  }
}
