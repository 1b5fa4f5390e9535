// Copyright 2026 The spatialsens Authors
// SPDX-License-Identifier: Apache-2.0

#include "spatialsens/sfc.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "parallel.hpp"
#include "spatialsens/error.hpp"

namespace spatialsens {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(CurveKind k) noexcept {
  switch (k) {
    case CurveKind::DataDriven: return "datadriven";
    case CurveKind::Hilbert: return "hilbert";
    case CurveKind::Scanline: return "scanline";
  }
  return "unknown";
}

std::string_view to_string(DistanceKind k) noexcept {
  switch (k) {
    case DistanceKind::L1: return "l1";
    case DistanceKind::L2: return "l2";
    case DistanceKind::LInf: return "linf";
    case DistanceKind::SSD: return "ssd";
    case DistanceKind::Cosine: return "cosine";
  }
  return "unknown";
}

CurveKind curve_kind_from_string(std::string_view s) {
  const auto l = lowercase(s);
  if (l == "datadriven") return CurveKind::DataDriven;
  if (l == "hilbert") return CurveKind::Hilbert;
  if (l == "scanline") return CurveKind::Scanline;
  throw Error(Errc::InvalidArgument, "unknown curve kind '" + std::string(s) + "'");
}

DistanceKind distance_from_string(std::string_view s) {
  const auto l = lowercase(s);
  if (l == "l1") return DistanceKind::L1;
  if (l == "l2") return DistanceKind::L2;
  if (l == "linf") return DistanceKind::LInf;
  if (l == "ssd") return DistanceKind::SSD;
  if (l == "cosine") return DistanceKind::Cosine;
  throw Error(Errc::InvalidArgument, "unknown distance '" + std::string(s) + "'");
}

double vector_distance(DistanceKind kind, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "distance between vectors of different length");
  double acc = 0.0;
  switch (kind) {
    case DistanceKind::L1:
      for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(b[i] - a[i]);
      return acc;
    case DistanceKind::L2:
    case DistanceKind::SSD:
      for (std::size_t i = 0; i < a.size(); ++i) acc += (b[i] - a[i]) * (b[i] - a[i]);
      return kind == DistanceKind::L2 ? std::sqrt(acc) : acc;
    case DistanceKind::LInf:
      for (std::size_t i = 0; i < a.size(); ++i) acc = std::max(acc, std::abs(b[i] - a[i]));
      return acc;
    case DistanceKind::Cosine: {
      double na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
      }
      const bool za = na == 0.0, zb = nb == 0.0;
      if (za && zb) return 0.0;
      if (za || zb) return 1.0;
      return 1.0 - acc / (std::sqrt(na) * std::sqrt(nb));
    }
  }
  return 0.0;
}

void SfcConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in [0, 1]");
}

void SfcCurve::rebuild_inverse() {
  const std::size_t v = order.size();
  inverse.assign(v, std::numeric_limits<std::uint32_t>::max());
  for (std::size_t p = 0; p < v; ++p) {
    if (order[p] >= v || inverse[order[p]] != std::numeric_limits<std::uint32_t>::max()) {
      throw Error(Errc::InvalidArgument, "curve order is not a permutation");
    }
    inverse[order[p]] = static_cast<std::uint32_t>(p);
  }
}

// --- invariant checks ------------------------------------------------------------

bool is_permutation_curve(const SfcCurve& c) {
  const std::size_t v = c.dims.voxel_count();
  if (c.order.size() != v || c.inverse.size() != v) return false;
  std::vector<std::uint8_t> seen(v, 0);
  for (std::size_t p = 0; p < v; ++p) {
    const auto x = c.order[p];
    if (x >= v || seen[x]) return false;
    seen[x] = 1;
    if (c.inverse[x] != p) return false;
  }
  return true;
}

bool has_adjacent_steps(const SfcCurve& c) {
  for (std::size_t p = 1; p < c.order.size(); ++p) {
    if (!face_adjacent(c.dims, c.order[p - 1], c.order[p])) return false;
  }
  return true;
}

bool is_closed_cycle(const SfcCurve& c) {
  return c.order.size() > 1 && face_adjacent(c.dims, c.order.back(), c.order.front());
}

bool is_valid_curve(const SfcCurve& c) {
  if (!is_permutation_curve(c) || !has_adjacent_steps(c)) return false;
  return c.kind != CurveKind::DataDriven || is_closed_cycle(c);
}

// --- circuit graph ---------------------------------------------------------------

GridDims cell_grid(const GridDims& dims) {
  dims.validate();
  const bool odd = dims.nx % 2 || dims.ny % 2 || (!dims.is_2d() && dims.nz % 2);
  if (odd) throw Error(Errc::OddDimension, "grid " + to_string(dims) + " must have even extents");
  return {dims.nx / 2, dims.ny / 2, dims.is_2d() ? 1u : dims.nz / 2};
}

CircuitGraph build_circuit_graph(const SensitivityFieldSet& fields, const SfcConfig& cfg, Exec exec) {
  cfg.validate();
  CircuitGraph g;
  g.dims = fields.dims;
  g.cells = cell_grid(fields.dims);
  const GridDims& vd = g.dims;
  const GridDims& cd = g.cells;
  const bool three_d = !vd.is_2d();
  const std::size_t n = fields.fields.size();

  struct Pending {
    std::uint32_t a, b;
    unsigned axis;
  };
  std::vector<Pending> pending;
  for (std::uint32_t z = 0; z < cd.nz; ++z) {
    for (std::uint32_t y = 0; y < cd.ny; ++y) {
      for (std::uint32_t x = 0; x < cd.nx; ++x) {
        const auto a = static_cast<std::uint32_t>(cd.linear(x, y, z));
        if (x + 1 < cd.nx) pending.push_back({a, static_cast<std::uint32_t>(cd.linear(x + 1, y, z)), 0});
        if (y + 1 < cd.ny) pending.push_back({a, static_cast<std::uint32_t>(cd.linear(x, y + 1, z)), 1});
        if (z + 1 < cd.nz) pending.push_back({a, static_cast<std::uint32_t>(cd.linear(x, y, z + 1)), 2});
      }
    }
  }

  auto center = [&](std::uint32_t cell) {
    const auto c = cd.coords(cell);
    std::array<double, 3> p{2.0 * c[0] + 0.5, 2.0 * c[1] + 0.5, three_d ? 2.0 * c[2] + 0.5 : 0.0};
    double r = 0.0;
    for (int i = 0; i < 3; ++i) r += (p[i] - cfg.ref_point[i]) * (p[i] - cfg.ref_point[i]);
    return std::sqrt(r);
  };

  g.edges.resize(pending.size());
  detail::parallel_for(pending.size(), exec, [&](std::size_t e) {
    const auto [a, b, axis] = pending[e];
    const auto ca = cd.coords(a);
    thread_local std::vector<double> va, vb;
    va.resize(n);
    vb.resize(n);
    double sum = 0.0;
    unsigned pairs = 0;
    // Voxels on the upper face of block a paired with their neighbours in block b.
    const unsigned locals = three_d ? 8u : 4u;
    for (unsigned l = 0; l < locals; ++l) {
      if (((l >> axis) & 1u) == 0) continue;
      const std::uint32_t x = 2 * ca[0] + (l & 1u), y = 2 * ca[1] + ((l >> 1) & 1u), z = 2 * ca[2] + ((l >> 2) & 1u);
      const std::size_t u = vd.linear(x, y, z);
      const std::size_t w = vd.linear(x + (axis == 0), y + (axis == 1), z + (axis == 2));
      for (std::size_t i = 0; i < n; ++i) {
        va[i] = fields.fields[i][u];
        vb[i] = fields.fields[i][w];
      }
      sum += vector_distance(cfg.distance, va, vb);
      ++pairs;
    }
    g.edges[e] = {a, b, sum / pairs, std::abs(center(a) - center(b)), 0.0};
  });

  double max_n = 0.0, max_r = 0.0;
  for (const auto& e : g.edges) {
    max_n = std::max(max_n, e.value);
    max_r = std::max(max_r, e.position);
  }
  const bool normalize_n = cfg.distance != DistanceKind::Cosine && max_n > 0.0;
  for (auto& e : g.edges) {
    if (normalize_n) e.value /= max_n;
    if (max_r > 0.0) e.position /= max_r;
    e.weight = (1.0 - cfg.alpha) * e.value + cfg.alpha * e.position;
  }
  return g;
}

std::vector<std::size_t> minimum_spanning_tree(std::size_t node_count, std::span<const DualEdge> edges) {
  std::vector<std::size_t> idx(edges.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    const auto& x = edges[i];
    const auto& y = edges[j];
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  std::vector<std::uint32_t> parent(node_count);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  std::vector<std::size_t> tree;
  tree.reserve(node_count ? node_count - 1 : 0);
  for (std::size_t i : idx) {
    const auto& e = edges[i];
    if (e.a >= node_count || e.b >= node_count) throw Error(Errc::InvalidArgument, "edge references unknown node");
    const auto ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[std::max(ra, rb)] = std::min(ra, rb);
    tree.push_back(i);
    if (tree.size() + 1 == node_count) break;
  }
  if (node_count > 0 && tree.size() + 1 != node_count) throw Error(Errc::Disconnected, "dual graph is disconnected");
  return tree;
}

// --- cycle merging ----------------------------------------------------------------

const std::vector<std::vector<std::uint8_t>>& block_cycles(bool three_d) {
  static const std::vector<std::vector<std::uint8_t>> square{{0, 1, 3, 2}};
  static const std::vector<std::vector<std::uint8_t>> cube = [] {
    // Enumerate Hamiltonian cycles of the 3-cube starting at 0; keep one orientation each.
    std::vector<std::vector<std::uint8_t>> out;
    std::vector<std::uint8_t> path{0};
    unsigned used = 1;
    auto dfs = [&](auto&& self) -> void {
      if (path.size() == 8) {
        if (std::popcount(static_cast<unsigned>(path.back())) == 1 && path[1] < path.back()) out.push_back(path);
        return;
      }
      for (unsigned bit = 0; bit < 3; ++bit) {
        const auto next = static_cast<std::uint8_t>(path.back() ^ (1u << bit));
        if (used & (1u << next)) continue;
        used |= 1u << next;
        path.push_back(next);
        self(self);
        path.pop_back();
        used &= ~(1u << next);
      }
    };
    dfs(dfs);
    return out;
  }();
  return three_d ? cube : square;
}

namespace {

using LocalEdge = std::pair<std::uint8_t, std::uint8_t>;  // ordered (min, max)

LocalEdge make_edge(unsigned a, unsigned b) {
  return {static_cast<std::uint8_t>(std::min(a, b)), static_cast<std::uint8_t>(std::max(a, b))};
}

// Face f = 2 * axis + side; a local voxel lies on it when its axis bit equals side.
bool on_face(LocalEdge e, unsigned face) {
  const unsigned axis = face / 2, side = face % 2;
  return ((e.first >> axis) & 1u) == side && ((e.second >> axis) & 1u) == side;
}

std::vector<LocalEdge> cycle_edges(const std::vector<std::uint8_t>& cyc) {
  std::vector<LocalEdge> out;
  for (std::size_t i = 0; i < cyc.size(); ++i) out.push_back(make_edge(cyc[i], cyc[(i + 1) % cyc.size()]));
  return out;
}

// Assigns distinct cycle edges to the requested faces, avoiding `taken`; backtracking
// over at most six faces.
bool assign_faces(const std::vector<LocalEdge>& edges, const std::vector<unsigned>& faces, std::size_t k,
                  std::vector<LocalEdge>& chosen, std::vector<LocalEdge>& taken) {
  if (k == faces.size()) return true;
  for (const auto& e : edges) {
    if (!on_face(e, faces[k]) || std::find(taken.begin(), taken.end(), e) != taken.end()) continue;
    taken.push_back(e);
    chosen[k] = e;
    if (assign_faces(edges, faces, k + 1, chosen, taken)) return true;
    taken.pop_back();
  }
  return false;
}

}  // namespace

SfcCurve merge_cycles(const CircuitGraph& graph, std::span<const std::size_t> tree) {
  const GridDims& vd = graph.dims;
  const GridDims& cd = graph.cells;
  const std::size_t cells = graph.cell_count();
  const bool three_d = !vd.is_2d();
  const unsigned locals = three_d ? 8u : 4u;
  if (tree.size() + 1 != cells) throw Error(Errc::Disconnected, "tree does not span all cells");

  // Tree adjacency with the face of the cell through which the neighbour is reached.
  std::vector<std::vector<std::pair<std::uint32_t, unsigned>>> adj(cells);
  for (std::size_t t : tree) {
    const auto& e = graph.edges.at(t);
    const auto ca = cd.coords(e.a), cb = cd.coords(e.b);
    unsigned axis = 0;
    while (axis < 3 && ca[axis] == cb[axis]) ++axis;
    adj[e.a].push_back({e.b, 2 * axis + 1});
    adj[e.b].push_back({e.a, 2 * axis});
  }

  auto global = [&](std::uint32_t cell, unsigned l) {
    const auto c = cd.coords(cell);
    return static_cast<std::uint32_t>(vd.linear(2 * c[0] + (l & 1u), 2 * c[1] + ((l >> 1) & 1u),
                                                2 * c[2] + ((l >> 2) & 1u)));
  };

  std::vector<std::array<std::uint32_t, 2>> nb(vd.voxel_count());
  auto replace = [&](std::uint32_t v, std::uint32_t from, std::uint32_t to) {
    if (nb[v][0] == from) {
      nb[v][0] = to;
    } else if (nb[v][1] == from) {
      nb[v][1] = to;
    } else {
      throw Error(Errc::InvalidArgument, "cycle merge lost track of an edge");
    }
  };

  const auto& cycles = block_cycles(three_d);
  struct Task {
    std::uint32_t cell;
    std::uint32_t parent;
    unsigned parent_face;  // face of `cell` shared with its parent
    std::optional<LocalEdge> required;
  };
  std::vector<Task> stack{{0, 0, 0, std::nullopt}};
  std::vector<std::uint8_t> visited(cells, 0);
  visited[0] = 1;
  std::size_t processed = 0;
  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    ++processed;

    std::vector<std::pair<std::uint32_t, unsigned>> children;
    for (const auto& [other, face] : adj[task.cell]) {
      if (!visited[other]) children.push_back({other, face});
    }
    std::vector<unsigned> faces;
    for (const auto& ch : children) faces.push_back(ch.second);

    // Pick the first block cycle that contains the parent's mirrored edge and still
    // offers a distinct edge on every child face.
    const std::vector<std::uint8_t>* chosen_cycle = nullptr;
    std::vector<LocalEdge> chosen(faces.size());
    for (const auto& cyc : cycles) {
      const auto edges = cycle_edges(cyc);
      std::vector<LocalEdge> taken;
      if (task.required) {
        if (std::find(edges.begin(), edges.end(), *task.required) == edges.end()) continue;
        taken.push_back(*task.required);
      }
      if (assign_faces(edges, faces, 0, chosen, taken)) {
        chosen_cycle = &cyc;
        break;
      }
    }
    if (!chosen_cycle) throw Error(Errc::InvalidArgument, "no block cycle satisfies the merge constraints");

    for (std::size_t i = 0; i < locals; ++i) {
      const unsigned l = (*chosen_cycle)[i];
      const unsigned prev = (*chosen_cycle)[(i + locals - 1) % locals];
      const unsigned next = (*chosen_cycle)[(i + 1) % locals];
      nb[global(task.cell, l)] = {global(task.cell, prev), global(task.cell, next)};
    }

    if (task.required) {
      // Swap the two parallel face edges for the two cross edges.
      const unsigned axis_bit = 1u << (task.parent_face / 2);
      const std::uint32_t v1 = global(task.cell, task.required->first);
      const std::uint32_t v2 = global(task.cell, task.required->second);
      const std::uint32_t u1 = global(task.parent, task.required->first ^ axis_bit);
      const std::uint32_t u2 = global(task.parent, task.required->second ^ axis_bit);
      replace(u1, u2, v1);
      replace(u2, u1, v2);
      replace(v1, v2, u1);
      replace(v2, v1, u2);
    }

    for (std::size_t i = children.size(); i-- > 0;) {
      const auto [child, face] = children[i];
      visited[child] = 1;
      const unsigned axis_bit = 1u << (face / 2);
      const LocalEdge mirrored = make_edge(chosen[i].first ^ axis_bit, chosen[i].second ^ axis_bit);
      stack.push_back({child, task.cell, face ^ 1u, mirrored});
    }
  }
  if (processed != cells) throw Error(Errc::Disconnected, "tree does not reach every cell");

  SfcCurve curve;
  curve.kind = CurveKind::DataDriven;
  curve.dims = vd;
  curve.order.reserve(vd.voxel_count());
  std::uint32_t prev = 0;
  std::uint32_t cur = 0;
  for (std::size_t step = 0; step < vd.voxel_count(); ++step) {
    curve.order.push_back(cur);
    std::uint32_t next;
    if (step == 0) {
      next = std::min(nb[0][0], nb[0][1]);
    } else {
      next = nb[cur][0] == prev ? nb[cur][1] : nb[cur][0];
    }
    prev = cur;
    cur = next;
  }
  if (cur != 0) throw Error(Errc::InvalidArgument, "merged cycle does not close");
  curve.rebuild_inverse();
  return curve;
}

SfcCurve data_driven_curve(const SensitivityFieldSet& fields, const SfcConfig& cfg, Exec exec) {
  const CircuitGraph graph = build_circuit_graph(fields, cfg, exec);
  const auto tree = minimum_spanning_tree(graph.cell_count(), graph.edges);
  SfcCurve curve = merge_cycles(graph, tree);
  curve.alpha = cfg.alpha;
  curve.distance = cfg.distance;
  curve.ref_point = cfg.ref_point;
  return curve;
}

// --- fixed curves -----------------------------------------------------------------

SfcCurve hilbert_curve(const GridDims& dims) {
  dims.validate();
  const bool cube = dims.nx == dims.ny && (dims.is_2d() || dims.nz == dims.nx);
  if (!cube || !std::has_single_bit(dims.nx)) {
    throw Error(Errc::UnsupportedDims, "Hilbert curve needs a power-of-two square or cube, got " + to_string(dims));
  }
  const unsigned n = dims.is_2d() ? 2 : 3;
  const auto bits = static_cast<unsigned>(std::countr_zero(dims.nx));
  SfcCurve curve;
  curve.kind = CurveKind::Hilbert;
  curve.dims = dims;
  const std::size_t total = dims.voxel_count();
  curve.order.resize(total);
  for (std::size_t h = 0; h < total; ++h) {
    // Transposed form: bit j*n + (n-1-i) of h is bit j of X[i].
    std::array<std::uint32_t, 3> x{0, 0, 0};
    for (unsigned j = 0; j < bits; ++j) {
      for (unsigned i = 0; i < n; ++i) {
        if ((h >> (j * n + (n - 1 - i))) & 1u) x[i] |= 1u << j;
      }
    }
    // Skilling's transpose-to-axes: Gray decode, then undo the excess rotations.
    const std::uint32_t top = bits ? 2u << (bits - 1) : 1u;
    std::uint32_t t = x[n - 1] >> 1;
    for (unsigned i = n - 1; i > 0; --i) x[i] ^= x[i - 1];
    x[0] ^= t;
    for (std::uint32_t q = 2; q != top && bits > 0; q <<= 1) {
      const std::uint32_t p = q - 1;
      for (int i = static_cast<int>(n) - 1; i >= 0; --i) {
        if (x[i] & q) {
          x[0] ^= p;
        } else {
          t = (x[0] ^ x[i]) & p;
          x[0] ^= t;
          x[i] ^= t;
        }
      }
    }
    curve.order[h] = static_cast<std::uint32_t>(dims.linear(x[0], x[1], n == 3 ? x[2] : 0));
  }
  curve.rebuild_inverse();
  return curve;
}

SfcCurve scanline_curve(const GridDims& dims) {
  dims.validate();
  SfcCurve curve;
  curve.kind = CurveKind::Scanline;
  curve.dims = dims;
  curve.order.reserve(dims.voxel_count());
  std::size_t row = 0;
  for (std::uint32_t z = 0; z < dims.nz; ++z) {
    for (std::uint32_t yi = 0; yi < dims.ny; ++yi) {
      const std::uint32_t y = z % 2 == 0 ? yi : dims.ny - 1 - yi;
      for (std::uint32_t xi = 0; xi < dims.nx; ++xi) {
        const std::uint32_t x = row % 2 == 0 ? xi : dims.nx - 1 - xi;
        curve.order.push_back(static_cast<std::uint32_t>(dims.linear(x, y, z)));
      }
      ++row;
    }
  }
  curve.rebuild_inverse();
  return curve;
}

}  // namespace spatialsens
