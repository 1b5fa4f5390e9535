// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "spatialsens/error.hpp"
#include "spatialsens/evaluation.hpp"
#include "spatialsens/sampling.hpp"
#include "support.hpp"

using namespace spatialsens;
using spatialsens::testing::random_fields;
using spatialsens::testing::ScratchDir;

namespace {

// Textbook ACF with (len - lag) normalization and population variance, clamped.
double acf_oracle(const std::vector<double>& x, std::size_t lag) {
  const double n = static_cast<double>(x.size());
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= n;
  double var = 0.0;
  for (double v : x) var += (v - mu) * (v - mu);
  var /= n;
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) acc += (x[i] - mu) * (x[i + lag] - mu);
  return std::clamp(acc / ((n - static_cast<double>(lag)) * var), -1.0, 1.0);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("autocorrelation matches the direct formula") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> x(500);
  double prev = 0.0;
  for (auto& v : x) v = prev = 0.8 * prev + nd(rng);
  const auto a = autocorrelation(x, 20);
  REQUIRE(a.acf.size() == 21);
  CHECK(a.acf[0] == 1.0);
  double mean = 0.0;
  for (std::size_t l = 1; l <= 20; ++l) {
    CHECK(a.acf[l] == doctest::Approx(acf_oracle(x, l)).epsilon(1e-12));
    mean += a.acf[l];
  }
  CHECK(a.summary == doctest::Approx(mean / 20.0));
  CHECK(a.acf[1] == doctest::Approx(0.8).epsilon(0.1));
}

TEST_CASE("autocorrelation edge cases") {
  const auto flat = autocorrelation(std::vector<double>(10, 3.0), 4);
  CHECK(flat.summary == 1.0);
  // Alternating series: ACF(1) = -1 exactly.
  std::vector<double> alt(100);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
  const auto a = autocorrelation(alt, 2);
  CHECK(a.acf[1] == doctest::Approx(-1.0));
  CHECK(a.acf[2] == doctest::Approx(1.0));
  // A trend over a short series pushes the raw estimate past 1 at large lags; it is clamped.
  std::vector<double> ramp{0, 1, 2, 3, 4, 5, 6, 7};
  for (double v : autocorrelation(ramp, 6).acf) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  try {
    (void)autocorrelation(std::vector<double>(5, 0.0), 5);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SeriesTooShort);
  }
  CHECK_THROWS_AS(autocorrelation(std::vector<double>(5, 0.0), 0), Error);
}

TEST_CASE("value and positional coherency are ACF summaries along the curve") {
  const GridDims g{8, 8, 2};
  const auto f = random_fields(g, 3, 4);
  const auto curve = scanline_curve(g);
  std::vector<double> per;
  const double vc = value_coherency(curve, f, 10, &per);
  REQUIRE(per.size() == 3);
  double mean = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<double> s;
    for (auto v : curve.order) s.push_back(f.fields[i][v]);
    const auto a = autocorrelation(s, 10);
    CHECK(per[i] == doctest::Approx(a.summary));
    mean += a.summary / 3.0;
  }
  CHECK(vc == doctest::Approx(mean));

  const std::array<double, 3> ref{1.0, 2.0, 0.0};
  std::vector<double> t;
  for (auto v : curve.order) {
    const auto c = g.coords(v);
    t.push_back(std::hypot(c[0] - ref[0], c[1] - ref[1], c[2] - ref[2]));
  }
  CHECK(positional_coherency(curve, ref, 10) == doctest::Approx(autocorrelation(t, 10).summary));

  const auto other = random_fields({4, 4, 4}, 3, 1);
  try {
    (void)value_coherency(curve, other, 10);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimsMismatch);
  }
}

TEST_CASE("smooth fields are more coherent along the Hilbert curve than along a scanline") {
  const GridDims g{16, 16, 16};
  auto f = random_fields(g, 1, 0, 0.0);
  for (std::size_t v = 0; v < g.voxel_count(); ++v) {
    const auto c = g.coords(v);
    f.fields[0][v] = std::exp(-((c[0] - 8.0) * (c[0] - 8.0) + (c[1] - 8.0) * (c[1] - 8.0)) / 20.0);
  }
  const auto h = evaluate_coherency(hilbert_curve(g), f, 50);
  const auto s = evaluate_coherency(scanline_curve(g), f, 50);
  CHECK(h.value_coherency > s.value_coherency);
  CHECK(h.positional_coherency > s.positional_coherency);
  CHECK(h.curve_kind == "hilbert");
}

TEST_CASE("convergence statistics pool absolute differences over parameters") {
  const GridDims g{2, 2, 1};
  SensitivityFieldSet a, b, c;
  for (auto* fs : {&a, &b, &c}) {
    fs->dims = g;
    fs->param_names = {"x", "y"};
    fs->flags.assign(4, 0);
  }
  a.fields = {{0, 0, 0, 0}, {1, 1, 1, 1}};
  b.fields = {{0.5, 0, 0, 0}, {1, 1, 1, 0.5}};
  c.fields = {{0.5, 0, 0, 0}, {1, 1, 1, 0.25}};
  const std::vector<SensitivityFieldSet> seq{a, b, c};
  const std::vector<std::size_t> runs{16, 32, 64};
  const auto rep = convergence_study(seq, runs);
  REQUIRE(rep.steps.size() == 2);
  CHECK(rep.steps[0].previous_runs == 16);
  CHECK(rep.steps[0].runs == 32);
  CHECK(rep.steps[0].mean_abs_diff == doctest::Approx(1.0 / 8.0));
  CHECK(rep.steps[0].max_abs_diff == doctest::Approx(0.5));
  CHECK(rep.steps[0].min_abs_diff == 0.0);
  CHECK(rep.steps[1].mean_abs_diff == doctest::Approx(0.25 / 8.0));

  auto d = c;
  d.dims = {4, 1, 1};
  const std::vector<SensitivityFieldSet> bad{a, d};
  try {
    (void)convergence_study(bad, std::vector<std::size_t>{1, 2});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GridMismatch);
  }
}

TEST_CASE("ensemble convergence study and timing harness run every measure") {
  std::vector<Ensemble> seq;
  for (std::size_t r : {40u, 80u}) {
    SyntheticConfig cfg;
    cfg.dims = {4, 4, 4};
    cfg.run_count = r;
    seq.push_back(synthetic_saltelli_ensemble(cfg));
  }
  MeasureConfig mc;
  mc.dgsa.bootstrap_b = 50;
  for (Measure m : {Measure::Sobol, Measure::Delta, Measure::Dgsa}) {
    const auto rep = convergence_study(std::span<const Ensemble>(seq), m, mc, Exec::Serial);
    CHECK(rep.measure == m);
    CHECK(rep.run_counts == std::vector<std::size_t>{40, 80});
    CHECK(rep.steps.size() == 1);
  }
  const std::vector<Measure> ms{Measure::Sobol, Measure::Delta};
  const auto rows = timing_harness(seq, ms, mc);
  CHECK(rows.size() == 4);
  for (const auto& r : rows) CHECK(r.seconds >= 0.0);
}

TEST_CASE("evaluation reports round-trip through JSON and CSV") {
  ScratchDir dir("report");
  const GridDims g{4, 4, 4};
  const auto f = random_fields(g, 2, 6);
  EvaluationReport rep;
  rep.coherency.push_back(evaluate_coherency(scanline_curve(g), f, 5, true));
  rep.coherency.push_back(evaluate_coherency(hilbert_curve(g), f, 5, false));
  ConvergenceReport conv;
  conv.measure = Measure::Delta;
  conv.run_counts = {16, 32};
  conv.steps.push_back({16, 32, 0.1, 0.0, 0.5});
  rep.convergence.push_back(conv);
  rep.timings.push_back({"synthetic", 32, Measure::Delta, 1.5});

  write_report(rep, dir.path() / "r.json");
  const auto back = read_report(dir.path() / "r.json");
  REQUIRE(back.coherency.size() == 2);
  CHECK(back.coherency[0].value_coherency == rep.coherency[0].value_coherency);
  CHECK(back.coherency[0].per_field_acf == rep.coherency[0].per_field_acf);
  CHECK(back.coherency[1].positional_coherency == rep.coherency[1].positional_coherency);
  CHECK(back.coherency[1].field_names == rep.coherency[1].field_names);
  REQUIRE(back.convergence.size() == 1);
  CHECK(back.convergence[0].measure == Measure::Delta);
  CHECK(back.convergence[0].steps[0].max_abs_diff == 0.5);
  REQUIRE(back.timings.size() == 1);
  CHECK(back.timings[0].seconds == 1.5);
  CHECK_THROWS_AS(report_from_json("{\"coherency\": 3}"), Error);

  write_acf_csv(rep.coherency, dir.path() / "acf.csv");
  const auto acf = slurp(dir.path() / "acf.csv");
  CHECK(acf.rfind("curve,distance,field,lag,acf", 0) == 0);
  write_convergence_csv(rep.convergence, dir.path() / "conv.csv");
  const auto cv = slurp(dir.path() / "conv.csv");
  CHECK(cv.rfind("measure,previous_runs,runs,mean_abs_diff,min_abs_diff,max_abs_diff", 0) == 0);
  CHECK(cv.find("delta,16,32") != std::string::npos);
}
