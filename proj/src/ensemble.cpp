// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "parallel.hpp"
#include "spatialsens/error.hpp"

namespace spatialsens {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "raw volume IO assumes a little-endian host");

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = (*this)(r, c);
  return out;
}

void ParameterSpace::validate() const {
  if (params.empty()) throw Error(Errc::MalformedManifest, "at least one parameter is required");
  if (samples.cols != params.size()) {
    throw Error(Errc::MalformedManifest, "sample matrix has " + std::to_string(samples.cols) +
                                             " columns for " + std::to_string(params.size()) + " parameters");
  }
  if (samples.rows == 0) throw Error(Errc::MalformedManifest, "at least one run is required");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i].min <= params[i].max)) {
      throw Error(Errc::MalformedManifest, "parameter '" + params[i].name + "' has min > max");
    }
  }
  for (std::size_t r = 0; r < samples.rows; ++r) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double v = samples(r, i);
      if (!(v >= params[i].min && v <= params[i].max)) {
        throw Error(Errc::RangeViolation, "run " + std::to_string(r) + " parameter '" + params[i].name +
                                              "' = " + std::to_string(v) + " outside [" +
                                              std::to_string(params[i].min) + ", " +
                                              std::to_string(params[i].max) + "]");
      }
    }
  }
}

Ensemble::Ensemble(std::string name, GridDims dims, ParameterSpace pspace, std::vector<float> values,
                   std::vector<AuxField> aux, std::optional<std::size_t> saltelli_base)
    : name_(std::move(name)),
      dims_(dims),
      pspace_(std::move(pspace)),
      values_(std::move(values)),
      aux_(std::move(aux)),
      saltelli_base_(saltelli_base) {
  dims_.validate();
  pspace_.validate();
  if (values_.size() != run_count() * voxel_count()) {
    throw Error(Errc::SizeMismatch, "expected " + std::to_string(run_count()) + " volumes of " +
                                        std::to_string(voxel_count()) + " voxels");
  }
  for (const auto& a : aux_) {
    if (a.values.size() != voxel_count()) {
      throw Error(Errc::SizeMismatch, "aux field '" + a.name + "' has wrong voxel count");
    }
  }
  if (saltelli_base_ && *saltelli_base_ * (param_count() + 2) != run_count()) {
    throw Error(Errc::LayoutMismatch, "Saltelli base " + std::to_string(*saltelli_base_) +
                                          " inconsistent with " + std::to_string(run_count()) + " runs");
  }
}

void Ensemble::gather(std::size_t voxel, std::span<double> out) const {
  const std::size_t v = voxel_count();
  const float* base = values_.data() + voxel;
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = static_cast<double>(base[r * v]);
}

std::vector<double> voxel_series(const Ensemble& ens, std::size_t linear_index) {
  if (linear_index >= ens.voxel_count()) {
    throw Error(Errc::IndexOutOfBounds,
                "voxel " + std::to_string(linear_index) + " >= " + std::to_string(ens.voxel_count()));
  }
  std::vector<double> out(ens.run_count());
  ens.gather(linear_index, out);
  return out;
}

std::vector<float> read_raw_f32(const fs::path& path, std::size_t count) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw Error(Errc::MissingFile, path.string());
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw Error(Errc::IoError, "cannot stat " + path.string());
  if (bytes != count * sizeof(float)) {
    throw Error(Errc::SizeMismatch, path.string() + " has " + std::to_string(bytes) + " bytes, expected " +
                                        std::to_string(count * sizeof(float)));
  }
  std::vector<float> out(count);
  std::ifstream in(path, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes))) {
    throw Error(Errc::IoError, "short read on " + path.string());
  }
  return out;
}

void write_raw_f32(const fs::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw Error(Errc::IoError, "write failed on " + path.string());
}

namespace {

json parse_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedManifest, path.string() + ": " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(Errc::MalformedManifest, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedManifest, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

Ensemble load_ensemble(const fs::path& manifest_path) {
  const json m = parse_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();

  const auto dims_v = require<std::vector<std::uint32_t>>(m, "dims");
  if (dims_v.size() != 3) throw Error(Errc::MalformedManifest, "dims must have three entries");
  const GridDims dims{dims_v[0], dims_v[1], dims_v[2]};
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw Error(Errc::MalformedManifest, "dims must be positive");
  if (m.contains("dtype") && m["dtype"] != "float32") throw Error(Errc::MalformedManifest, "dtype must be float32");
  if (m.contains("order") && m["order"] != "x-fastest") {
    throw Error(Errc::MalformedManifest, "order must be x-fastest");
  }

  ParameterSpace ps;
  for (const auto& p : require<json>(m, "parameters")) {
    ps.params.push_back({require<std::string>(p, "name"), require<double>(p, "min"), require<double>(p, "max")});
  }
  const auto runs = require<json>(m, "runs");
  if (!runs.is_array() || runs.empty()) throw Error(Errc::MalformedManifest, "runs must be a non-empty array");
  const std::size_t n = ps.params.size();
  ps.samples = Matrix(runs.size(), n);
  std::vector<fs::path> files;
  files.reserve(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto params = require<std::vector<double>>(runs[r], "params");
    if (params.size() != n) {
      throw Error(Errc::MalformedManifest, "run " + std::to_string(r) + " has " + std::to_string(params.size()) +
                                               " parameter values, expected " + std::to_string(n));
    }
    std::copy(params.begin(), params.end(), ps.samples.data.begin() + static_cast<std::ptrdiff_t>(r * n));
    files.push_back(root / require<std::string>(runs[r], "file"));
  }
  ps.validate();

  std::optional<std::size_t> saltelli_base;
  if (m.contains("sampling")) {
    const auto& s = m["sampling"];
    if (require<std::string>(s, "scheme") == "saltelli") saltelli_base = require<std::size_t>(s, "base");
  }

  const std::size_t voxels = dims.voxel_count();
  std::vector<float> values(files.size() * voxels);
  detail::parallel_for(files.size(), Exec::Parallel, [&](std::size_t r) {
    const auto vol = read_raw_f32(files[r], voxels);
    std::copy(vol.begin(), vol.end(), values.begin() + static_cast<std::ptrdiff_t>(r * voxels));
  });

  std::vector<AuxField> aux;
  if (m.contains("aux")) {
    for (const auto& a : m["aux"]) {
      aux.push_back({require<std::string>(a, "name"), read_raw_f32(root / require<std::string>(a, "file"), voxels)});
    }
  }
  return Ensemble(m.value("name", std::string{"ensemble"}), dims, std::move(ps), std::move(values), std::move(aux),
                  saltelli_base);
}

fs::path write_ensemble(const Ensemble& ens, const fs::path& dir) {
  fs::create_directories(dir);
  json m;
  m["name"] = ens.name();
  m["dims"] = {ens.dims().nx, ens.dims().ny, ens.dims().nz};
  m["dtype"] = "float32";
  m["order"] = "x-fastest";
  json params = json::array();
  for (const auto& p : ens.pspace().params) params.push_back({{"name", p.name}, {"min", p.min}, {"max", p.max}});
  m["parameters"] = params;

  const std::size_t runs = ens.run_count();
  const int width = std::max<int>(4, static_cast<int>(std::to_string(runs).size()));
  json run_list = json::array();
  std::vector<std::string> names(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    std::string digits = std::to_string(r);
    names[r] = "run_" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(digits.size(), width), '0') +
               digits + ".raw";
    const auto row = ens.pspace().samples.row(r);
    run_list.push_back({{"params", std::vector<double>(row.begin(), row.end())}, {"file", names[r]}});
  }
  m["runs"] = run_list;
  json aux = json::array();
  for (const auto& a : ens.aux()) {
    const std::string file = "aux_" + a.name + ".raw";
    write_raw_f32(dir / file, a.values);
    aux.push_back({{"name", a.name}, {"file", file}});
  }
  m["aux"] = aux;
  if (ens.saltelli_base()) m["sampling"] = {{"scheme", "saltelli"}, {"base", *ens.saltelli_base()}};

  detail::parallel_for(runs, Exec::Parallel, [&](std::size_t r) { write_raw_f32(dir / names[r], ens.volume(r)); });

  const fs::path manifest = dir / "ensemble.json";
  std::ofstream out(manifest);
  if (!out) throw Error(Errc::IoError, "cannot write " + manifest.string());
  out << m.dump(1) << '\n';
  return manifest;
}

namespace {

double gaussian_kernel(double x, double y, double z, double cx, double cy, double cz) noexcept {
  constexpr double sigma = 3.0;
  const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy) + (z - cz) * (z - cz);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

}  // namespace

double synthetic_field(double x, double y, double z, double p1, double p2) noexcept {
  return p1 * gaussian_kernel(x, y, z, 7, 7, 7) + p1 * p2 * gaussian_kernel(x, y, z, 10, 25, 15) +
         gaussian_kernel(x, y, z, 20, 20, 5 + p2 * 20);
}

Ensemble generate_synthetic(const SyntheticConfig& cfg, const ParameterSpace& samples,
                            std::optional<std::size_t> saltelli_base) {
  cfg.dims.validate();
  if (!(cfg.noise_max >= 0.0)) throw Error(Errc::InvalidArgument, "noise_max must be >= 0");
  if (samples.param_count() != 3) {
    throw Error(Errc::WrongParamCount, "synthetic ensemble needs 3 parameters, got " +
                                           std::to_string(samples.param_count()));
  }
  for (std::size_t r = 0; r < samples.run_count(); ++r) {
    for (std::size_t i = 0; i < 3; ++i) {
      const double v = samples.samples(r, i);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::ParamOutOfRange, "run " + std::to_string(r) + " P" + std::to_string(i + 1) + " = " +
                                               std::to_string(v) + " outside [0, 1]");
      }
    }
  }
  const std::size_t runs = samples.run_count();
  const std::size_t voxels = cfg.dims.voxel_count();
  std::vector<float> values(runs * voxels);
  detail::parallel_for(runs, Exec::Parallel, [&](std::size_t r) {
    const double p1 = samples.samples(r, 0);
    const double p2 = samples.samples(r, 1);
    const std::uint64_t run_key = detail::mix64(cfg.seed, r);
    float* out = values.data() + r * voxels;
    for (std::size_t v = 0; v < voxels; ++v) {
      const auto c = cfg.dims.coords(v);
      double g = synthetic_field(c[0], c[1], c[2], p1, p2);
      if (cfg.noise_max > 0.0) g += cfg.noise_max * detail::to_unit(detail::mix64(run_key, v));
      out[v] = static_cast<float>(g);
    }
  });
  return Ensemble("synthetic", cfg.dims, samples, std::move(values), {}, saltelli_base);
}

namespace {

struct AxisWeights {
  std::vector<std::uint32_t> lo;
  std::vector<float> t;
};

AxisWeights axis_weights(std::uint32_t src, std::uint32_t dst) {
  AxisWeights w;
  w.lo.resize(dst);
  w.t.resize(dst);
  const double scale = static_cast<double>(src) / dst;
  for (std::uint32_t i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    auto lo = static_cast<std::uint32_t>(std::floor(s));
    if (lo + 1 >= src) lo = src > 1 ? src - 2 : 0;
    w.lo[i] = lo;
    w.t[i] = src > 1 ? static_cast<float>(s - lo) : 0.0f;
  }
  return w;
}

std::vector<float> resample_volume(std::span<const float> in, const GridDims& s, const GridDims& d,
                                   const AxisWeights& wx, const AxisWeights& wy, const AxisWeights& wz) {
  std::vector<float> out(d.voxel_count());
  auto at = [&](std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    return static_cast<double>(in[s.linear(std::min(x, s.nx - 1), std::min(y, s.ny - 1), std::min(z, s.nz - 1))]);
  };
  for (std::uint32_t z = 0; z < d.nz; ++z) {
    for (std::uint32_t y = 0; y < d.ny; ++y) {
      for (std::uint32_t x = 0; x < d.nx; ++x) {
        const std::uint32_t x0 = wx.lo[x], y0 = wy.lo[y], z0 = wz.lo[z];
        const double tx = wx.t[x], ty = wy.t[y], tz = wz.t[z];
        const double c00 = at(x0, y0, z0) * (1 - tx) + at(x0 + 1, y0, z0) * tx;
        const double c10 = at(x0, y0 + 1, z0) * (1 - tx) + at(x0 + 1, y0 + 1, z0) * tx;
        const double c01 = at(x0, y0, z0 + 1) * (1 - tx) + at(x0 + 1, y0, z0 + 1) * tx;
        const double c11 = at(x0, y0 + 1, z0 + 1) * (1 - tx) + at(x0 + 1, y0 + 1, z0 + 1) * tx;
        const double c0 = c00 * (1 - ty) + c10 * ty;
        const double c1 = c01 * (1 - ty) + c11 * ty;
        out[d.linear(x, y, z)] = static_cast<float>(c0 * (1 - tz) + c1 * tz);
      }
    }
  }
  return out;
}

}  // namespace

Ensemble resample_trilinear(const Ensemble& ens, const GridDims& target) {
  target.validate();
  const auto& s = ens.dims();
  const auto wx = axis_weights(s.nx, target.nx);
  const auto wy = axis_weights(s.ny, target.ny);
  const auto wz = axis_weights(s.nz, target.nz);
  const std::size_t voxels = target.voxel_count();
  std::vector<float> values(ens.run_count() * voxels);
  detail::parallel_for(ens.run_count(), Exec::Parallel, [&](std::size_t r) {
    const auto vol = resample_volume(ens.volume(r), s, target, wx, wy, wz);
    std::copy(vol.begin(), vol.end(), values.begin() + static_cast<std::ptrdiff_t>(r * voxels));
  });
  std::vector<AuxField> aux;
  for (const auto& a : ens.aux()) aux.push_back({a.name, resample_volume(a.values, s, target, wx, wy, wz)});
  return Ensemble(ens.name(), target, ens.pspace(), std::move(values), std::move(aux), ens.saltelli_base());
}

}  // namespace spatialsens
