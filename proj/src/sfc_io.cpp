// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

// curve.sfc layout (little endian):
//   char[4] "SFC1" | u32 kind | u32 nx, ny, nz | f64 alpha | u32 distance | f64 ref[3]
//   followed by nx*ny*nz u32 voxel indices in curve order.

#include <cstring>
#include <fstream>

#include "spatialsens/error.hpp"
#include "spatialsens/sfc.hpp"

namespace spatialsens {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'C', '1'};

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(Errc::IoError, "truncated curve file " + path.string());
  return v;
}

}  // namespace

void write_curve(const SfcCurve& curve, const std::filesystem::path& path) {
  if (curve.order.size() != curve.dims.voxel_count()) throw Error(Errc::SizeMismatch, "curve length differs from grid");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(kMagic, sizeof(kMagic));
  put(out, static_cast<std::uint32_t>(curve.kind));
  put(out, curve.dims.nx);
  put(out, curve.dims.ny);
  put(out, curve.dims.nz);
  put(out, curve.alpha);
  put(out, static_cast<std::uint32_t>(curve.distance));
  for (double r : curve.ref_point) put(out, r);
  out.write(reinterpret_cast<const char*>(curve.order.data()),
            static_cast<std::streamsize>(curve.order.size() * sizeof(std::uint32_t)));
  if (!out) throw Error(Errc::IoError, "write failed on " + path.string());
}

SfcCurve read_curve(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(Errc::MalformedManifest, path.string() + " is not a curve file");
  }
  SfcCurve c;
  const auto kind = get<std::uint32_t>(in, path);
  if (kind > static_cast<std::uint32_t>(CurveKind::Scanline)) throw Error(Errc::MalformedManifest, "bad curve kind");
  c.kind = static_cast<CurveKind>(kind);
  c.dims.nx = get<std::uint32_t>(in, path);
  c.dims.ny = get<std::uint32_t>(in, path);
  c.dims.nz = get<std::uint32_t>(in, path);
  c.dims.validate();
  c.alpha = get<double>(in, path);
  const auto dist = get<std::uint32_t>(in, path);
  if (dist > static_cast<std::uint32_t>(DistanceKind::Cosine)) throw Error(Errc::MalformedManifest, "bad distance");
  c.distance = static_cast<DistanceKind>(dist);
  for (auto& r : c.ref_point) r = get<double>(in, path);
  c.order.resize(c.dims.voxel_count());
  if (!in.read(reinterpret_cast<char*>(c.order.data()),
               static_cast<std::streamsize>(c.order.size() * sizeof(std::uint32_t)))) {
    throw Error(Errc::SizeMismatch, "curve file " + path.string() + " is shorter than its grid");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::SizeMismatch, "curve file " + path.string() + " has trailing bytes");
  }
  try {
    c.rebuild_inverse();
  } catch (const Error&) {
    throw Error(Errc::MalformedManifest, "curve file " + path.string() + " is not a permutation");
  }
  return c;
}

}  // namespace spatialsens
