// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "json.hpp"
#include "spatialsens/error.hpp"
#include "spatialsens/sensitivity.hpp"

namespace spatialsens {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string field_file(const std::string& param) { return "sens_" + param + ".raw"; }

}  // namespace

void write_sensitivity(const SensitivityFieldSet& fs_in, const fs::path& dir) {
  const std::size_t voxels = fs_in.dims.voxel_count();
  if (fs_in.fields.size() != fs_in.param_names.size() || fs_in.flags.size() != voxels) {
    throw Error(Errc::SizeMismatch, "sensitivity field set is internally inconsistent");
  }
  fs::create_directories(dir);
  json params = json::array();
  for (std::size_t i = 0; i < fs_in.fields.size(); ++i) {
    if (fs_in.fields[i].size() != voxels) throw Error(Errc::SizeMismatch, "field size differs from grid");
    std::vector<float> values(fs_in.fields[i].begin(), fs_in.fields[i].end());
    write_raw_f32(dir / field_file(fs_in.param_names[i]), values);
    params.push_back({{"name", fs_in.param_names[i]}, {"file", field_file(fs_in.param_names[i])}});
  }
  {
    std::ofstream out(dir / "flags.raw", std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(fs_in.flags.data()), static_cast<std::streamsize>(fs_in.flags.size()));
    if (!out) throw Error(Errc::IoError, "cannot write " + (dir / "flags.raw").string());
  }
  const json meta = {{"measure", std::string(to_string(fs_in.measure))},
                     {"dims", {fs_in.dims.nx, fs_in.dims.ny, fs_in.dims.nz}},
                     {"dtype", "float32"},
                     {"parameters", params},
                     {"flags_file", "flags.raw"}};
  std::ofstream out(dir / "sensitivity.json", std::ios::trunc);
  out << meta.dump(2) << '\n';
  if (!out) throw Error(Errc::IoError, "cannot write " + (dir / "sensitivity.json").string());
}

SensitivityFieldSet read_sensitivity(const fs::path& dir) {
  const fs::path meta_path = dir / "sensitivity.json";
  std::ifstream in(meta_path);
  if (!in) throw Error(Errc::MissingFile, meta_path.string());
  SensitivityFieldSet out;
  try {
    const json meta = json::parse(in);
    out.measure = measure_from_string(meta.at("measure").get<std::string>());
    const auto d = meta.at("dims").get<std::vector<std::uint32_t>>();
    if (d.size() != 3) throw Error(Errc::MalformedManifest, "dims must have three entries");
    out.dims = {d[0], d[1], d[2]};
    out.dims.validate();
    const std::size_t voxels = out.dims.voxel_count();
    for (const auto& p : meta.at("parameters")) {
      out.param_names.push_back(p.at("name").get<std::string>());
      const auto values = read_raw_f32(dir / p.at("file").get<std::string>(), voxels);
      out.fields.emplace_back(values.begin(), values.end());
    }
    const fs::path flags_path = dir / meta.value("flags_file", std::string{"flags.raw"});
    if (!fs::exists(flags_path)) throw Error(Errc::MissingFile, flags_path.string());
    if (fs::file_size(flags_path) != voxels) throw Error(Errc::SizeMismatch, flags_path.string());
    out.flags.resize(voxels);
    std::ifstream fin(flags_path, std::ios::binary);
    fin.read(reinterpret_cast<char*>(out.flags.data()), static_cast<std::streamsize>(voxels));
    if (!fin) throw Error(Errc::IoError, "short read on " + flags_path.string());
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedManifest, meta_path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace spatialsens
