// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "spatialsens/error.hpp"
#include "spatialsens/mesh.hpp"

using namespace spatialsens;

namespace {

struct Topology {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  bool closed = true;       // every undirected edge has exactly two triangles
  bool consistent = true;   // every directed edge appears once
};

Topology topology(const Mesh& m) {
  Topology t;
  t.vertices = m.vertex_count();
  t.faces = m.triangle_count();
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> undirected;
  for (std::size_t f = 0; f < t.faces; ++f) {
    for (int k = 0; k < 3; ++k) {
      const auto a = m.indices[3 * f + k];
      const auto b = m.indices[3 * f + (k + 1) % 3];
      ++directed[{a, b}];
      ++undirected[{std::min(a, b), std::max(a, b)}];
    }
  }
  t.edges = undirected.size();
  for (const auto& [e, n] : undirected) t.closed = t.closed && n == 2;
  for (const auto& [e, n] : directed) t.consistent = t.consistent && n == 1;
  return t;
}

double signed_volume(const Mesh& m) {
  double vol = 0.0;
  for (std::size_t f = 0; f < m.triangle_count(); ++f) {
    const float* a = &m.vertices[3 * m.indices[3 * f]];
    const float* b = &m.vertices[3 * m.indices[3 * f + 1]];
    const float* c = &m.vertices[3 * m.indices[3 * f + 2]];
    vol += (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
            a[2] * (b[0] * c[1] - b[1] * c[0])) /
           6.0;
  }
  return vol;
}

}  // namespace

TEST_CASE("single voxel gives a closed outward octahedron") {
  const GridDims g{3, 3, 3};
  const std::vector<std::uint32_t> voxel{static_cast<std::uint32_t>(g.linear(1, 1, 1))};
  const Mesh m = selection_mesh(voxel, g);
  const auto t = topology(m);
  CHECK(t.vertices == 6);
  CHECK(t.faces == 8);
  CHECK(t.edges == 12);
  CHECK(static_cast<long>(t.vertices) - static_cast<long>(t.edges) + static_cast<long>(t.faces) == 2);
  CHECK(t.closed);
  CHECK(t.consistent);
  CHECK(signed_volume(m) == doctest::Approx(1.0 / 6.0));
  for (std::size_t i = 0; i < m.vertices.size(); i += 3) {
    const double d = std::abs(m.vertices[i] - 1.0) + std::abs(m.vertices[i + 1] - 1.0) + std::abs(m.vertices[i + 2] - 1.0);
    CHECK(d == doctest::Approx(0.5));
  }
}

TEST_CASE("voxels on the grid boundary still give closed surfaces") {
  const GridDims g{2, 2, 2};
  std::vector<std::uint8_t> mask(8, 1);
  const Mesh m = mask_surface(mask, g);
  const auto t = topology(m);
  CHECK(t.closed);
  CHECK(t.consistent);
  CHECK(static_cast<long>(t.vertices) - static_cast<long>(t.edges) + static_cast<long>(t.faces) == 2);
  CHECK(signed_volume(m) > 0.0);
}

TEST_CASE("random masks produce closed, consistently oriented surfaces") {
  std::mt19937_64 rng(3);
  const GridDims g{6, 5, 4};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::uint8_t> mask(g.voxel_count());
    for (auto& v : mask) v = (rng() % 100) < 35 ? 1 : 0;
    const Mesh m = mask_surface(mask, g);
    const auto t = topology(m);
    CHECK(t.closed);
    CHECK(t.consistent);
    CHECK(signed_volume(m) > 0.0);
  }
}

TEST_CASE("empty selections give empty meshes; bad indices are rejected") {
  const GridDims g{4, 4, 4};
  CHECK(selection_mesh({}, g).triangle_count() == 0);
  const std::vector<std::uint32_t> bad{64};
  try {
    (void)selection_mesh(bad, g);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IndexOutOfBounds);
  }
}

TEST_CASE("binary mesh encoding round-trips the triangle soup") {
  const GridDims g{4, 4, 4};
  const std::vector<std::uint32_t> vox{0, 1, 5, 21, 63};
  const Mesh m = selection_mesh(vox, g);
  const auto bytes = encode_mesh_binary(m);
  CHECK(bytes.size() == 4 + m.triangle_count() * (36 + 12));
  const Mesh back = decode_mesh_binary(bytes);
  REQUIRE(back.triangle_count() == m.triangle_count());
  for (std::size_t f = 0; f < m.triangle_count(); ++f) {
    for (int k = 0; k < 3; ++k) {
      CHECK(back.indices[3 * f + k] == 3 * f + k);
      for (int c = 0; c < 3; ++c) {
        CHECK(back.vertices[3 * back.indices[3 * f + k] + c] == m.vertices[3 * m.indices[3 * f + k] + c]);
      }
    }
  }
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_mesh_binary(truncated), Error);
}
