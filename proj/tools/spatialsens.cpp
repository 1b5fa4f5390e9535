// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

// Preprocessing and serving front end: generate-synthetic, sensitivity, sfc,
// resample, evaluate, convergence, serve.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spatialsens/dgsa.hpp"
#include "spatialsens/ensemble.hpp"
#include "spatialsens/error.hpp"
#include "spatialsens/evaluation.hpp"
#include "spatialsens/sampling.hpp"
#include "spatialsens/sensitivity.hpp"
#include "spatialsens/service.hpp"
#include "spatialsens/sfc.hpp"

namespace fs = std::filesystem;
using namespace spatialsens;

namespace {

// "32" -> 32x32x32, "32x16x8" -> as given, "64x64" -> 64x64x1.
GridDims parse_dims(const std::string& text) {
  std::vector<std::uint32_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      parts.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidArgument, "bad dims '" + text + "'");
    }
  }
  if (parts.size() == 1) return {parts[0], parts[0], parts[0]};
  if (parts.size() == 2) return {parts[0], parts[1], 1};
  if (parts.size() == 3) return {parts[0], parts[1], parts[2]};
  throw Error(Errc::InvalidArgument, "bad dims '" + text + "'");
}

Exec exec_from(bool serial) { return serial ? Exec::Serial : Exec::Parallel; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct SensitivityFlags {
  std::optional<std::size_t> slices;
  std::string bandwidth = "scott";
  std::size_t bootstrap = 1000;
  std::size_t k_min = 3;
  std::size_t k_max = 10;
  std::uint64_t seed = 0;
  bool rank_space = false;
  bool no_cache = false;

  MeasureConfig config() const {
    MeasureConfig c;
    c.delta.slices = slices;
    c.delta.bandwidth = bandwidth == "silverman" ? Bandwidth::Silverman : Bandwidth::Scott;
    c.dgsa.bootstrap_b = bootstrap;
    c.dgsa.k_min = k_min;
    c.dgsa.k_max = k_max;
    c.dgsa.seed = seed;
    c.dgsa.rank_space = rank_space;
    c.dgsa.cache = !no_cache;
    return c;
  }
};

void add_sensitivity_flags(CLI::App* cmd, SensitivityFlags& f) {
  cmd->add_option("--slices", f.slices, "delta: equal-frequency slice count (default: automatic)");
  cmd->add_option("--bandwidth", f.bandwidth, "delta: KDE bandwidth rule")
      ->check(CLI::IsMember({"scott", "silverman"}));
  cmd->add_option("--bootstrap", f.bootstrap, "dgsa: bootstrap resamples per threshold");
  cmd->add_option("--k-min", f.k_min, "dgsa: smallest cluster count");
  cmd->add_option("--k-max", f.k_max, "dgsa: largest cluster count");
  cmd->add_option("--dgsa-seed", f.seed, "dgsa: bootstrap seed");
  cmd->add_flag("--rank-space", f.rank_space, "dgsa: compare CDFs of parameter ranks");
  cmd->add_flag("--no-cache", f.no_cache, "dgsa: disable the bootstrap threshold cache");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatialsens: spatial sensitivity volumes, space-filling curves and view data"};
  app.require_subcommand(1);

  // generate-synthetic
  auto* gen = app.add_subcommand("generate-synthetic", "Write the three-parameter synthetic Gaussian ensemble");
  std::string gen_out = "synthetic";
  std::string gen_dims = "32";
  std::size_t gen_runs = 4096;
  std::uint64_t gen_seed = 0;
  double gen_noise = 0.01;
  std::string gen_sampling = "saltelli";
  gen->add_option("--out", gen_out, "output dataset directory");
  gen->add_option("--dims", gen_dims, "grid: N, NxM or NxMxK");
  gen->add_option("--runs", gen_runs, "number of runs (Saltelli rounds down to a multiple of 5)");
  gen->add_option("--seed", gen_seed, "sampling and noise seed");
  gen->add_option("--noise", gen_noise, "maximum of the uniform noise term");
  gen->add_option("--sampling", gen_sampling, "parameter design")->check(CLI::IsMember({"saltelli", "uniform"}));

  // sensitivity
  auto* sens = app.add_subcommand("sensitivity", "Compute one sensitivity volume per parameter");
  std::string sens_dataset = ".";
  std::string sens_manifest;
  std::string sens_measure = "delta";
  std::string sens_out;
  bool sens_serial = false;
  SensitivityFlags sens_flags;
  sens->add_option("--dataset", sens_dataset, "dataset directory containing ensemble.json");
  sens->add_option("--manifest", sens_manifest, "explicit manifest path (overrides --dataset)");
  sens->add_option("--measure", sens_measure, "sensitivity measure")->check(CLI::IsMember({"sobol", "delta", "dgsa"}));
  sens->add_option("--out", sens_out, "output directory (default <dataset>/sensitivity/<measure>)");
  sens->add_flag("--serial", sens_serial, "use the serial reference kernels");
  add_sensitivity_flags(sens, sens_flags);

  // sfc
  auto* sfc = app.add_subcommand("sfc", "Build a space-filling curve over the grid");
  std::string sfc_dataset = ".";
  std::string sfc_measure = "delta";
  std::string sfc_kind = "datadriven";
  std::string sfc_distance = "l1";
  double sfc_alpha = 0.1;
  std::vector<double> sfc_ref{0.0, 0.0, 0.0};
  std::string sfc_out;
  sfc->add_option("--dataset", sfc_dataset, "dataset directory");
  sfc->add_option("--measure", sfc_measure, "sensitivity volumes driving the curve")
      ->check(CLI::IsMember({"sobol", "delta", "dgsa"}));
  sfc->add_option("--kind", sfc_kind, "curve kind")->check(CLI::IsMember({"datadriven", "hilbert", "scanline"}));
  sfc->add_option("--distance", sfc_distance, "vector distance for value coherency")
      ->check(CLI::IsMember({"l1", "l2", "linf", "ssd", "cosine"}));
  sfc->add_option("--alpha", sfc_alpha, "positional coherency weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  sfc->add_option("--ref", sfc_ref, "reference point x y z")->expected(3);
  sfc->add_option("--out", sfc_out, "output curve file (default <dataset>/curve.sfc)");

  // resample
  auto* res = app.add_subcommand("resample", "Trilinearly resample every run to a new grid");
  std::string res_manifest;
  std::string res_dims;
  std::string res_out;
  res->add_option("--manifest", res_manifest, "input manifest")->required();
  res->add_option("--dims", res_dims, "target grid: N, NxM or NxMxK")->required();
  res->add_option("--out", res_out, "output dataset directory")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Value and positional coherency of curves");
  std::string eval_dataset = ".";
  std::string eval_measure = "delta";
  std::vector<std::string> eval_curves;
  std::size_t eval_lag = 100;
  bool eval_baselines = false;
  std::string eval_out;
  std::string eval_csv;
  eval->add_option("--dataset", eval_dataset, "dataset directory");
  eval->add_option("--measure", eval_measure, "sensitivity volumes to evaluate")
      ->check(CLI::IsMember({"sobol", "delta", "dgsa"}));
  eval->add_option("--curve", eval_curves, "curve files (default <dataset>/curve.sfc)");
  eval->add_option("--max-lag", eval_lag, "largest autocorrelation lag L (summary = mean over 1..L)");
  eval->add_flag("--baselines", eval_baselines, "also evaluate scanline and (where defined) Hilbert curves");
  eval->add_option("--out", eval_out, "report path (default <dataset>/report.json)");
  eval->add_option("--csv", eval_csv, "also write per-lag autocorrelations as CSV");

  // convergence
  auto* conv = app.add_subcommand("convergence", "Convergence study on a synthetic Saltelli run sequence");
  std::string conv_dims = "32";
  std::size_t conv_min = 16;
  std::size_t conv_max = 4096;
  std::vector<std::string> conv_measures{"sobol", "delta", "dgsa"};
  std::uint64_t conv_seed = 0;
  bool conv_timings = false;
  bool conv_serial = false;
  std::string conv_out = "convergence.json";
  std::string conv_csv;
  SensitivityFlags conv_flags;
  conv->add_option("--dims", conv_dims, "grid: N, NxM or NxMxK");
  conv->add_option("--min-runs", conv_min, "smallest run count (doubled each step)");
  conv->add_option("--max-runs", conv_max, "largest run count");
  conv->add_option("--measure", conv_measures, "measures to study")
      ->check(CLI::IsMember({"sobol", "delta", "dgsa"}));
  conv->add_option("--seed", conv_seed, "ensemble seed");
  conv->add_flag("--timings", conv_timings, "record wall times per measure and ensemble");
  conv->add_flag("--serial", conv_serial, "use the serial reference kernels");
  conv->add_option("--out", conv_out, "report path");
  conv->add_option("--csv", conv_csv, "also write one CSV row per step");
  add_sensitivity_flags(conv, conv_flags);

  // serve
  auto* srv = app.add_subcommand("serve", "Serve view data for a preprocessed dataset over HTTP");
  std::string srv_dataset = ".";
  std::string srv_host = "127.0.0.1";
  int srv_port = 8080;
  std::string srv_measure;
  std::size_t srv_count = kDefaultSubsampleCount;
  std::uint64_t srv_seed = 0;
  std::size_t srv_m = 2;
  srv->add_option("--dataset", srv_dataset, "dataset directory");
  srv->add_option("--host", srv_host, "bind address");
  srv->add_option("--port", srv_port, "port (SPATIALSENS_PORT overrides)");
  srv->add_option("--measure", srv_measure, "active measure")->check(CLI::IsMember({"sobol", "delta", "dgsa"}));
  srv->add_option("--count", srv_count, "default subsample size for PCP and sensitivity view");
  srv->add_option("--seed", srv_seed, "default subsample seed");
  srv->add_option("--m", srv_m, "initial number of horizon graphs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SyntheticConfig cfg;
      cfg.dims = parse_dims(gen_dims);
      cfg.run_count = gen_runs;
      cfg.seed = gen_seed;
      cfg.noise_max = gen_noise;
      const auto t0 = std::chrono::steady_clock::now();
      Ensemble ens;
      if (gen_sampling == "saltelli") {
        if (gen_runs % 5 != 0) {
          std::cerr << "note: Saltelli layout uses " << gen_runs / 5 * 5 << " of the requested " << gen_runs
                    << " runs\n";
        }
        ens = synthetic_saltelli_ensemble(cfg);
      } else {
        const std::vector<ParameterRange> ranges{{"P1", 0.0, 1.0}, {"P2", 0.0, 1.0}, {"P3", 0.0, 1.0}};
        ens = generate_synthetic(cfg, uniform_sample(ranges, gen_runs, gen_seed));
      }
      const auto manifest = write_ensemble(ens, gen_out);
      std::cout << "wrote " << ens.run_count() << " runs on " << to_string(ens.dims()) << " to " << manifest.string()
                << " (" << seconds_since(t0) << " s)\n";
    } else if (*sens) {
      const fs::path manifest = sens_manifest.empty() ? DatasetLayout{sens_dataset}.manifest() : fs::path(sens_manifest);
      const Measure m = measure_from_string(sens_measure);
      const fs::path out = sens_out.empty() ? DatasetLayout{manifest.parent_path()}.sensitivity(m) : fs::path(sens_out);
      const auto ens = load_ensemble(manifest);
      const auto t0 = std::chrono::steady_clock::now();
      const auto fs_out = compute_sensitivity(ens, m, sens_flags.config(), exec_from(sens_serial));
      write_sensitivity(fs_out, out);
      std::cout << "wrote " << to_string(m) << " volumes for " << fs_out.field_count() << " parameters to "
                << out.string() << " (" << seconds_since(t0) << " s)\n";
    } else if (*sfc) {
      const DatasetLayout layout{sfc_dataset};
      const fs::path out = sfc_out.empty() ? layout.curve() : fs::path(sfc_out);
      const CurveKind kind = curve_kind_from_string(sfc_kind);
      const auto t0 = std::chrono::steady_clock::now();
      SfcCurve curve;
      if (kind == CurveKind::DataDriven) {
        const auto fields = read_sensitivity(layout.sensitivity(measure_from_string(sfc_measure)));
        SfcConfig cfg;
        cfg.alpha = sfc_alpha;
        cfg.distance = distance_from_string(sfc_distance);
        cfg.ref_point = {sfc_ref[0], sfc_ref[1], sfc_ref[2]};
        curve = data_driven_curve(fields, cfg);
      } else {
        const auto ens_dims = load_ensemble(layout.manifest()).dims();
        curve = kind == CurveKind::Hilbert ? hilbert_curve(ens_dims) : scanline_curve(ens_dims);
      }
      write_curve(curve, out);
      std::cout << "wrote " << to_string(kind) << " curve over " << curve.size() << " voxels to " << out.string()
                << " (" << seconds_since(t0) << " s)\n";
    } else if (*res) {
      const auto ens = load_ensemble(res_manifest);
      const auto out = resample_trilinear(ens, parse_dims(res_dims));
      const auto manifest = write_ensemble(out, res_out);
      std::cout << "resampled " << to_string(ens.dims()) << " -> " << to_string(out.dims()) << ", wrote "
                << manifest.string() << '\n';
    } else if (*eval) {
      const DatasetLayout layout{eval_dataset};
      const auto fields = read_sensitivity(layout.sensitivity(measure_from_string(eval_measure)));
      std::vector<SfcCurve> curves;
      if (eval_curves.empty()) {
        curves.push_back(read_curve(layout.curve()));
      } else {
        for (const auto& c : eval_curves) curves.push_back(read_curve(c));
      }
      if (eval_baselines) {
        curves.push_back(scanline_curve(fields.dims));
        try {
          curves.push_back(hilbert_curve(fields.dims));
        } catch (const Error& e) {
          if (e.code() != Errc::UnsupportedDims) throw;
          std::cerr << "note: no Hilbert baseline for " << to_string(fields.dims) << '\n';
        }
      }
      EvaluationReport report;
      for (const auto& c : curves) {
        report.coherency.push_back(evaluate_coherency(c, fields, eval_lag, !eval_csv.empty()));
        const auto& r = report.coherency.back();
        std::printf("%-10s %-6s value %.4f  positional %.4f\n", r.curve_kind.c_str(), r.distance.c_str(),
                    r.value_coherency, r.positional_coherency);
      }
      write_report(report, eval_out.empty() ? eval_dataset / fs::path("report.json") : fs::path(eval_out));
      if (!eval_csv.empty()) write_acf_csv(report.coherency, eval_csv);
    } else if (*conv) {
      if (conv_min < 5 || conv_max < conv_min) throw Error(Errc::InvalidArgument, "need 5 <= min-runs <= max-runs");
      std::vector<Ensemble> seq;
      for (std::size_t r = conv_min; r <= conv_max; r *= 2) {
        SyntheticConfig cfg;
        cfg.dims = parse_dims(conv_dims);
        cfg.run_count = r;
        cfg.seed = conv_seed;
        seq.push_back(synthetic_saltelli_ensemble(cfg));
      }
      EvaluationReport report;
      std::vector<Measure> measures;
      for (const auto& name : conv_measures) measures.push_back(measure_from_string(name));
      for (Measure m : measures) {
        report.convergence.push_back(
            convergence_study(std::span<const Ensemble>(seq), m, conv_flags.config(), exec_from(conv_serial)));
        for (const auto& s : report.convergence.back().steps) {
          std::printf("%-6s %5zu -> %5zu  mean %.3e  min %.3e  max %.3e\n", std::string(to_string(m)).c_str(),
                      s.previous_runs, s.runs, s.mean_abs_diff, s.min_abs_diff, s.max_abs_diff);
        }
      }
      if (conv_timings) report.timings = timing_harness(seq, measures, conv_flags.config(), exec_from(conv_serial));
      write_report(report, conv_out);
      if (!conv_csv.empty()) write_convergence_csv(report.convergence, conv_csv);
    } else if (*srv) {
      ServiceOptions opts;
      opts.dataset = srv_dataset;
      if (!srv_measure.empty()) opts.measure = measure_from_string(srv_measure);
      opts.subsample_count = srv_count;
      opts.seed = srv_seed;
      opts.m = srv_m;
      Service service(opts);
      if (!service.preprocessed()) {
        std::cerr << "warning: dataset is not preprocessed; view endpoints answer 409\n";
      }
      serve_http(service, srv_host, resolve_port(srv_port));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
