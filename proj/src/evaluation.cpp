// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "spatialsens/error.hpp"

namespace spatialsens {

using nlohmann::json;

Autocorrelation autocorrelation(std::span<const double> x, std::size_t max_lag) {
  if (max_lag < 1 || x.size() <= max_lag) {
    throw Error(Errc::SeriesTooShort, "series of length " + std::to_string(x.size()) + " cannot provide " +
                                          std::to_string(max_lag) + " lags");
  }
  Autocorrelation out;
  out.acf.assign(max_lag + 1, 1.0);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) {
    out.summary = 1.0;
    return out;
  }
  const auto len = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= len;
  std::vector<double> c(x.size());
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c[i] = x[i] - mean;
    var += c[i] * c[i];
  }
  var /= len;
  if (!(var > 0.0)) {
    out.summary = 1.0;
    return out;
  }
  double sum = 0.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double acc = 0.0;
    const std::size_t m = x.size() - lag;
    for (std::size_t i = 0; i < m; ++i) acc += c[i] * c[i + lag];
    // The (len - lag) normalization with the global variance is not bounded by 1 on
    // short or trending series; clamp to the admissible range.
    out.acf[lag] = std::clamp(acc / (static_cast<double>(m) * var), -1.0, 1.0);
    sum += out.acf[lag];
  }
  out.summary = sum / static_cast<double>(max_lag);
  return out;
}

namespace {

void check_dims(const SfcCurve& curve, const SensitivityFieldSet& fields) {
  if (!(curve.dims == fields.dims) || curve.order.size() != fields.dims.voxel_count()) {
    throw Error(Errc::DimsMismatch,
                "curve grid " + to_string(curve.dims) + " differs from field grid " + to_string(fields.dims));
  }
}

std::vector<double> along_curve(const SfcCurve& curve, const std::vector<double>& field) {
  std::vector<double> out(curve.order.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = field[curve.order[p]];
  return out;
}

std::vector<double> radial_series(const SfcCurve& curve, const std::array<double, 3>& ref) {
  std::vector<double> t(curve.order.size());
  for (std::size_t p = 0; p < t.size(); ++p) {
    const auto c = curve.dims.coords(curve.order[p]);
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r += (c[i] - ref[i]) * (c[i] - ref[i]);
    t[p] = std::sqrt(r);
  }
  return t;
}

}  // namespace

double value_coherency(const SfcCurve& curve, const SensitivityFieldSet& fields, std::size_t max_lag,
                       std::vector<double>* per_field) {
  check_dims(curve, fields);
  if (fields.fields.empty()) throw Error(Errc::InvalidArgument, "no fields to evaluate");
  double sum = 0.0;
  if (per_field) per_field->clear();
  for (const auto& f : fields.fields) {
    const double s = autocorrelation(along_curve(curve, f), max_lag).summary;
    if (per_field) per_field->push_back(s);
    sum += s;
  }
  return sum / static_cast<double>(fields.fields.size());
}

double positional_coherency(const SfcCurve& curve, const std::array<double, 3>& ref, std::size_t max_lag) {
  return autocorrelation(radial_series(curve, ref), max_lag).summary;
}

CoherencyReport evaluate_coherency(const SfcCurve& curve, const SensitivityFieldSet& fields, std::size_t max_lag,
                                   bool keep_curves) {
  check_dims(curve, fields);
  CoherencyReport r;
  r.curve_kind = std::string(to_string(curve.kind));
  r.distance = curve.kind == CurveKind::DataDriven ? std::string(to_string(curve.distance)) : "";
  r.alpha = curve.alpha;
  r.max_lag = max_lag;
  r.field_names = fields.param_names;
  double sum = 0.0;
  for (const auto& f : fields.fields) {
    auto acf = autocorrelation(along_curve(curve, f), max_lag);
    r.per_field.push_back(acf.summary);
    sum += acf.summary;
    if (keep_curves) r.per_field_acf.push_back(std::move(acf.acf));
  }
  r.value_coherency = fields.fields.empty() ? 0.0 : sum / static_cast<double>(fields.fields.size());
  auto pos = autocorrelation(radial_series(curve, curve.ref_point), max_lag);
  r.positional_coherency = pos.summary;
  if (keep_curves) r.positional_acf = std::move(pos.acf);
  return r;
}

SensitivityFieldSet compute_sensitivity(const Ensemble& ens, Measure m, const MeasureConfig& cfg, Exec exec) {
  switch (m) {
    case Measure::Sobol: return sobol_volume(ens, exec);
    case Measure::Delta: return delta_volume(ens, cfg.delta, exec);
    case Measure::Dgsa: return dgsa_volume(ens, cfg.dgsa, exec);
  }
  throw Error(Errc::InvalidArgument, "unknown measure");
}

ConvergenceReport convergence_study(std::span<const SensitivityFieldSet> seq, std::span<const std::size_t> runs) {
  if (seq.size() < 2) throw Error(Errc::InvalidArgument, "convergence needs at least two field sets");
  if (runs.size() != seq.size()) throw Error(Errc::LengthMismatch, "one run count per field set is required");
  ConvergenceReport rep;
  rep.measure = seq.front().measure;
  rep.run_counts.assign(runs.begin(), runs.end());
  for (std::size_t s = 1; s < seq.size(); ++s) {
    const auto& a = seq[s - 1];
    const auto& b = seq[s];
    if (!(a.dims == b.dims) || a.param_names != b.param_names) {
      throw Error(Errc::GridMismatch, "field sets " + std::to_string(s - 1) + " and " + std::to_string(s) +
                                          " differ in grid or parameters");
    }
    ConvergenceStep step{runs[s - 1], runs[s], 0.0, std::numeric_limits<double>::infinity(), 0.0};
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.fields.size(); ++i) {
      for (std::size_t v = 0; v < a.fields[i].size(); ++v) {
        const double d = std::abs(b.fields[i][v] - a.fields[i][v]);
        sum += d;
        step.min_abs_diff = std::min(step.min_abs_diff, d);
        step.max_abs_diff = std::max(step.max_abs_diff, d);
        ++count;
      }
    }
    step.mean_abs_diff = count ? sum / static_cast<double>(count) : 0.0;
    if (!count) step.min_abs_diff = 0.0;
    rep.steps.push_back(step);
  }
  return rep;
}

ConvergenceReport convergence_study(std::span<const Ensemble> ensembles, Measure m, const MeasureConfig& cfg,
                                    Exec exec) {
  if (ensembles.size() < 2) throw Error(Errc::InvalidArgument, "convergence needs at least two ensembles");
  std::vector<SensitivityFieldSet> seq;
  std::vector<std::size_t> runs;
  for (const auto& e : ensembles) {
    if (!(e.dims() == ensembles.front().dims())) throw Error(Errc::GridMismatch, "ensembles differ in grid");
    seq.push_back(compute_sensitivity(e, m, cfg, exec));
    runs.push_back(e.run_count());
  }
  auto rep = convergence_study(std::span<const SensitivityFieldSet>(seq), runs);
  rep.measure = m;
  return rep;
}

std::vector<TimingRow> timing_harness(std::span<const Ensemble> ensembles, std::span<const Measure> measures,
                                      const MeasureConfig& cfg, Exec exec) {
  std::vector<TimingRow> rows;
  for (const auto& e : ensembles) {
    for (Measure m : measures) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto fs = compute_sensitivity(e, m, cfg, exec);
      const auto t1 = std::chrono::steady_clock::now();
      const double secs = std::chrono::duration<double>(t1 - t0).count();
      rows.push_back({e.name(), e.run_count(), m, std::max(secs, std::numeric_limits<double>::min())});
    }
  }
  return rows;
}

// --- reports -------------------------------------------------------------------

std::string report_to_json(const EvaluationReport& report) {
  json j;
  j["coherency"] = json::array();
  for (const auto& c : report.coherency) {
    json e = {{"curve", c.curve_kind},       {"distance", c.distance},
              {"alpha", c.alpha},            {"max_lag", c.max_lag},
              {"summary", "mean_acf_lags_1_to_L"},
              {"value_coherency", c.value_coherency},
              {"positional_coherency", c.positional_coherency},
              {"fields", c.field_names},     {"per_field", c.per_field}};
    if (!c.per_field_acf.empty()) e["per_field_acf"] = c.per_field_acf;
    if (!c.positional_acf.empty()) e["positional_acf"] = c.positional_acf;
    j["coherency"].push_back(std::move(e));
  }
  j["convergence"] = json::array();
  for (const auto& c : report.convergence) {
    json steps = json::array();
    for (const auto& s : c.steps) {
      steps.push_back({{"previous_runs", s.previous_runs},
                       {"runs", s.runs},
                       {"mean_abs_diff", s.mean_abs_diff},
                       {"min_abs_diff", s.min_abs_diff},
                       {"max_abs_diff", s.max_abs_diff}});
    }
    j["convergence"].push_back(
        {{"measure", std::string(to_string(c.measure))}, {"run_counts", c.run_counts}, {"steps", steps}});
  }
  j["timings"] = json::array();
  for (const auto& t : report.timings) {
    j["timings"].push_back({{"ensemble", t.ensemble},
                            {"runs", t.runs},
                            {"measure", std::string(to_string(t.measure))},
                            {"seconds", t.seconds}});
  }
  return j.dump(2);
}

EvaluationReport report_from_json(const std::string& text) {
  EvaluationReport r;
  try {
    const json j = json::parse(text);
    for (const auto& e : j.value("coherency", json::array())) {
      CoherencyReport c;
      c.curve_kind = e.at("curve").get<std::string>();
      c.distance = e.value("distance", std::string{});
      c.alpha = e.at("alpha").get<double>();
      c.max_lag = e.at("max_lag").get<std::size_t>();
      c.value_coherency = e.at("value_coherency").get<double>();
      c.positional_coherency = e.at("positional_coherency").get<double>();
      c.field_names = e.at("fields").get<std::vector<std::string>>();
      c.per_field = e.at("per_field").get<std::vector<double>>();
      if (e.contains("per_field_acf")) c.per_field_acf = e["per_field_acf"].get<std::vector<std::vector<double>>>();
      if (e.contains("positional_acf")) c.positional_acf = e["positional_acf"].get<std::vector<double>>();
      r.coherency.push_back(std::move(c));
    }
    for (const auto& e : j.value("convergence", json::array())) {
      ConvergenceReport c;
      c.measure = measure_from_string(e.at("measure").get<std::string>());
      c.run_counts = e.at("run_counts").get<std::vector<std::size_t>>();
      for (const auto& s : e.at("steps")) {
        c.steps.push_back({s.at("previous_runs").get<std::size_t>(), s.at("runs").get<std::size_t>(),
                           s.at("mean_abs_diff").get<double>(), s.at("min_abs_diff").get<double>(),
                           s.at("max_abs_diff").get<double>()});
      }
      r.convergence.push_back(std::move(c));
    }
    for (const auto& t : j.value("timings", json::array())) {
      r.timings.push_back({t.at("ensemble").get<std::string>(), t.at("runs").get<std::size_t>(),
                           measure_from_string(t.at("measure").get<std::string>()), t.at("seconds").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedManifest, std::string("report: ") + e.what());
  }
  return r;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << report_to_json(report) << '\n';
}

EvaluationReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

void write_acf_csv(std::span<const CoherencyReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << "curve,distance,field,lag,acf\n";
  out.precision(17);
  for (const auto& r : reports) {
    for (std::size_t f = 0; f < r.per_field_acf.size(); ++f) {
      for (std::size_t lag = 0; lag < r.per_field_acf[f].size(); ++lag) {
        out << r.curve_kind << ',' << r.distance << ',' << r.field_names[f] << ',' << lag << ','
            << r.per_field_acf[f][lag] << '\n';
      }
    }
    for (std::size_t lag = 0; lag < r.positional_acf.size(); ++lag) {
      out << r.curve_kind << ',' << r.distance << ",position," << lag << ',' << r.positional_acf[lag] << '\n';
    }
  }
}

void write_convergence_csv(std::span<const ConvergenceReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << "measure,previous_runs,runs,mean_abs_diff,min_abs_diff,max_abs_diff\n";
  out.precision(17);
  for (const auto& r : reports) {
    for (const auto& s : r.steps) {
      out << to_string(r.measure) << ',' << s.previous_runs << ',' << s.runs << ',' << s.mean_abs_diff << ','
          << s.min_abs_diff << ',' << s.max_abs_diff << '\n';
    }
  }
}

}  // namespace spatialsens
