#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ncsp/error.hpp"
#include "ncsp/instance.hpp"
#include "ncsp/io.hpp"
#include "ncsp/plane_graph.hpp"
#include "ncsp/query.hpp"
#include "ncsp/solver.hpp"

// Oracles, generators and property checks.  Everything here operates on plain
// graphs and materialized paths; nothing inspects solver state.
namespace ncsp::testkit {

// Deterministic RNG wrapper; modulo sampling keeps results stable across
// standard-library implementations.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  std::uint64_t next() { return eng(); }
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    assert(hi >= lo);
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

// ---------------------------------------------------------------------------
// Embedding helpers
// ---------------------------------------------------------------------------

// Clockwise rotations from a straight-line drawing: per vertex, incident
// edges sorted by descending direction angle.
inline std::vector<std::vector<EdgeId>> rotations_from_coordinates(
    Vertex n, const std::vector<EdgeDef>& edges, const std::vector<Coord>& xy) {
  struct Inc {
    double ang;
    EdgeId e;
  };
  std::vector<std::vector<Inc>> inc(n);
  for (const EdgeDef& e : edges) {
    inc[e.u].push_back({std::atan2(xy[e.v].y - xy[e.u].y, xy[e.v].x - xy[e.u].x), e.id});
    inc[e.v].push_back({std::atan2(xy[e.u].y - xy[e.v].y, xy[e.u].x - xy[e.v].x), e.id});
  }
  std::vector<std::vector<EdgeId>> rot(n);
  for (Vertex v = 0; v < n; ++v) {
    auto& a = inc[v];
    std::sort(a.begin(), a.end(), [](const Inc& x, const Inc& y) { return x.ang > y.ang; });
    for (std::size_t i = 1; i < a.size(); ++i)
      require(a[i - 1].ang - a[i].ang > 1e-9, ErrorCode::InternalInvariantViolation,
              "ambiguous edge directions at vertex " + std::to_string(v));
    rot[v].reserve(a.size());
    for (const Inc& x : a) rot[v].push_back(x.e);
  }
  return rot;
}

// Designate the external face by signed area: the unique clockwise (negative
// shoelace) orbit is the unbounded one.  Needs coordinates.
inline void designate_external_by_area(io::InstanceFile& f) {
  require(f.has_coordinates, ErrorCode::MissingCoordinates,
          "external-face designation by area needs coordinates");
  PlaneGraph g = PlaneGraph::build(f.vertex_count, f.edges, f.rotations, 0, {});
  const FaceTable& ft = g.trace_face_table();
  // The unbounded orbit is the one with minimal signed area: negative when
  // the graph encloses anything, zero (like every orbit) when it is a tree.
  FaceId neg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (FaceId fc = 0; fc < ft.face_count(); ++fc) {
    double area2 = 0.0;
    for (std::int32_t p = 0; p < ft.orbit_length(fc); ++p) {
      const DartId d = ft.orbit_dart(fc, p);
      const Coord& a = f.coordinates[g.tail(d)];
      const Coord& b = f.coordinates[g.head(d)];
      area2 += a.x * b.y - b.x * a.y;
    }
    if (area2 < best) {
      best = area2;
      neg = fc;
    }
  }
  require(ft.face_count() == 1 || best < 0, ErrorCode::InternalInvariantViolation,
          "no clockwise face orbit found");
  const DartId d0 = ft.orbit_storage()[ft.orbit_begin(neg)];
  f.outer_edge = edge_of(d0);
  f.outer_tail = g.tail(d0);
}

// ---------------------------------------------------------------------------
// Shortest-path oracle
// ---------------------------------------------------------------------------

inline std::vector<Weight> dijkstra(const PlaneGraph& g, Vertex src) {
  std::vector<Weight> dist(g.vertex_count(), Weight{-1});
  using Item = std::pair<Weight, Vertex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0;
  pq.push({0, src});
  while (!pq.empty()) {
    const auto [dv, v] = pq.top();
    pq.pop();
    if (dv != dist[v]) continue;
    for (const DartId* it = g.darts_begin(v); it != g.darts_end(v); ++it) {
      const Vertex u = g.head(*it);
      const Weight nd = checked_add(dv, g.dart_weight(*it));
      if (dist[u] < 0 || nd < dist[u]) {
        dist[u] = nd;
        pq.push({nd, u});
      }
    }
  }
  return dist;
}

// Walk back from t along tight darts, breaking ties with the seeded RNG.
// Returns the path as forward darts s -> t.
inline std::vector<DartId> extract_shortest_path(const PlaneGraph& g,
                                                 const std::vector<Weight>& dist, Vertex s,
                                                 Vertex t, Rng& rng) {
  require(dist[t] >= 0, ErrorCode::Unreachable,
          "vertex " + std::to_string(t) + " not reachable from " + std::to_string(s));
  std::vector<DartId> path;
  Vertex v = t;
  while (v != s) {
    std::vector<DartId> cand;
    for (const DartId* it = g.darts_begin(v); it != g.darts_end(v); ++it) {
      const Vertex u = g.head(*it);
      if (dist[u] >= 0 && dist[u] + g.dart_weight(*it) == dist[v])
        cand.push_back(ncsp::reverse(*it));
    }
    require(!cand.empty(), ErrorCode::InternalInvariantViolation, "dead end in distance field");
    const DartId pick = cand[static_cast<std::size_t>(rng.range(0, cand.size() - 1))];
    path.push_back(pick);
    v = g.tail(pick);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

inline Weight path_weight(const PlaneGraph& g, const std::vector<DartId>& darts) {
  Weight w = 0;
  for (DartId d : darts) w = checked_add(w, g.dart_weight(d));
  return w;
}

inline std::vector<Vertex> path_vertices(const PlaneGraph& g, const std::vector<DartId>& darts) {
  std::vector<Vertex> vs;
  if (darts.empty()) return vs;
  vs.reserve(darts.size() + 1);
  vs.push_back(g.tail(darts.front()));
  for (DartId d : darts) vs.push_back(g.head(d));
  return vs;
}

// ---------------------------------------------------------------------------
// Subgraph restriction
// ---------------------------------------------------------------------------

struct Restriction {
  io::InstanceFile file;              // no pairs, outer designated by area
  std::vector<EdgeId> edge_to_sub;    // old edge -> new id or -1
  std::vector<Vertex> vertex_to_sub;  // old vertex -> new id or -1
  std::vector<EdgeId> sub_to_edge;
  std::vector<Vertex> sub_to_vertex;
};

// Keep the flagged edges, then keep only the connected component containing
// `anchor`; renumber vertices/edges and restrict rotations and coordinates.
inline Restriction restrict_to_edges(const io::InstanceFile& f, std::vector<char> keep_edge,
                                     Vertex anchor) {
  const Vertex n = f.vertex_count;
  std::vector<std::vector<std::pair<Vertex, EdgeId>>> adj(n);
  for (const EdgeDef& e : f.edges)
    if (keep_edge[e.id]) {
      adj[e.u].push_back({e.v, e.id});
      adj[e.v].push_back({e.u, e.id});
    }
  std::vector<char> in_comp(n, 0);
  {
    std::vector<Vertex> stack{anchor};
    in_comp[anchor] = 1;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (const auto& [u, e] : adj[v])
        if (!in_comp[u]) {
          in_comp[u] = 1;
          stack.push_back(u);
        }
    }
  }
  for (const EdgeDef& e : f.edges)
    if (keep_edge[e.id] && !in_comp[e.u]) keep_edge[e.id] = 0;

  Restriction r;
  r.edge_to_sub.assign(f.edges.size(), -1);
  r.vertex_to_sub.assign(n, -1);
  std::vector<char> vertex_used(n, 0);
  for (const EdgeDef& e : f.edges)
    if (keep_edge[e.id]) vertex_used[e.u] = vertex_used[e.v] = 1;
  for (Vertex v = 0; v < n; ++v)
    if (vertex_used[v]) {
      r.vertex_to_sub[v] = static_cast<Vertex>(r.sub_to_vertex.size());
      r.sub_to_vertex.push_back(v);
    }
  r.file.vertex_count = static_cast<Vertex>(r.sub_to_vertex.size());
  for (const EdgeDef& e : f.edges)
    if (keep_edge[e.id]) {
      const EdgeId ne = static_cast<EdgeId>(r.sub_to_edge.size());
      r.edge_to_sub[e.id] = ne;
      r.sub_to_edge.push_back(e.id);
      r.file.edges.push_back(EdgeDef{ne, r.vertex_to_sub[e.u], r.vertex_to_sub[e.v], e.w});
    }
  r.file.rotations.resize(r.file.vertex_count);
  for (Vertex v = 0; v < n; ++v)
    if (vertex_used[v])
      for (EdgeId e : f.rotations[v])
        if (keep_edge[e]) r.file.rotations[r.vertex_to_sub[v]].push_back(r.edge_to_sub[e]);
  if (f.has_coordinates) {
    r.file.has_coordinates = true;
    r.file.coordinates.resize(r.file.vertex_count);
    for (Vertex v = 0; v < r.file.vertex_count; ++v)
      r.file.coordinates[v] = f.coordinates[r.sub_to_vertex[v]];
    designate_external_by_area(r.file);
  } else if (!r.file.edges.empty()) {
    // No geometry to pick the outermost orbit: designate deterministically so
    // the result still builds (distance checks do not depend on the choice).
    r.file.outer_edge = 0;
    r.file.outer_tail = r.file.edges[0].u;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Union of shortest paths
// ---------------------------------------------------------------------------

struct GeneratedInstance {
  io::InstanceFile file;  // the union, with pairs, coordinates, external face
  std::vector<Weight> truth_dist;                // per kept pair
  std::vector<int> source_pair;                  // index into the input pair list
  std::vector<std::vector<EdgeId>> truth_paths;  // chosen path per kept pair (union edge ids)
};

// One seeded shortest path per pair, unioned; pairs outside the component of
// the first pair's terminals are dropped (the solver wants one connected
// plane graph).
inline GeneratedInstance union_of_shortest_paths(const io::InstanceFile& gf, std::uint64_t seed) {
  require(!gf.pairs.empty(), ErrorCode::ParameterOutOfRange, "instance has no terminal pairs");
  PlaneGraph g = gf.build_graph();
  const int k = static_cast<int>(gf.pairs.size());
  std::vector<std::vector<DartId>> chosen(k);
  std::vector<Weight> pdist(k);
  for (int i = 0; i < k; ++i) {
    const auto [s, t] = gf.pairs[i];
    const std::vector<Weight> dist = dijkstra(g, s);
    Rng rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1)));
    chosen[i] = extract_shortest_path(g, dist, s, t, rng);
    pdist[i] = dist[t];
  }
  std::vector<char> keep(g.edge_count(), 0);
  for (const auto& p : chosen)
    for (DartId d : p) keep[edge_of(d)] = 1;
  // Component of the first pair (via a throwaway restriction).
  Restriction probe;
  {
    io::InstanceFile tmp = gf;
    tmp.has_coordinates = false;
    tmp.coordinates.clear();
    probe = restrict_to_edges(tmp, keep, gf.pairs[0].first);
  }
  GeneratedInstance out;
  std::vector<char> keep_main(g.edge_count(), 0);
  for (int i = 0; i < k; ++i) {
    if (probe.vertex_to_sub[gf.pairs[i].first] < 0) continue;
    out.source_pair.push_back(i);
    for (DartId d : chosen[i]) keep_main[edge_of(d)] = 1;
  }
  Restriction r = restrict_to_edges(gf, keep_main, gf.pairs[0].first);
  out.file = std::move(r.file);
  for (int i : out.source_pair) {
    out.file.pairs.push_back(
        {r.vertex_to_sub[gf.pairs[i].first], r.vertex_to_sub[gf.pairs[i].second]});
    out.truth_dist.push_back(pdist[i]);
    std::vector<EdgeId> pe;
    pe.reserve(chosen[i].size());
    for (DartId d : chosen[i]) pe.push_back(r.edge_to_sub[edge_of(d)]);
    out.truth_paths.push_back(std::move(pe));
  }
  // Self-check: distances survive the restriction.
  PlaneGraph u = out.file.build_graph();
  for (std::size_t i = 0; i < out.file.pairs.size(); ++i) {
    const std::vector<Weight> du = dijkstra(u, out.file.pairs[i].first);
    require(du[out.file.pairs[i].second] == out.truth_dist[i],
            ErrorCode::InternalInvariantViolation,
            "restriction changed a terminal-pair distance");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

// Hexagon with an inner triangle: the classic instance whose union of unique
// shortest paths contains a cycle.  Outer ring weight 10, spokes and triangle
// weight 3; terminals are the six ring vertices, which end up pendant in the
// union because ring edges are never on a shortest path.
inline io::InstanceFile gen_fig1() {
  io::InstanceFile f;
  f.vertex_count = 9;  // ring 0..5 clockwise from the top-left, triangle 6,7,8
  f.has_coordinates = true;
  f.coordinates.resize(9);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < 6; ++i) {
    const double a = (120.0 - 60.0 * i) * pi / 180.0;
    f.coordinates[i] = {2.0 * std::cos(a), 2.0 * std::sin(a)};
  }
  for (int j = 0; j < 3; ++j) {
    const double a = (90.0 - 120.0 * j) * pi / 180.0;
    f.coordinates[6 + j] = {0.9 * std::cos(a), 0.9 * std::sin(a)};
  }
  EdgeId id = 0;
  for (int i = 0; i < 6; ++i)  // ring
    f.edges.push_back(EdgeDef{id++, static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % 6), 10});
  // Spokes: ring vertex 2j -> triangle j, ring vertex 2j+1 -> triangle j+1;
  // each pair's shortest path then crosses exactly one triangle edge.
  for (int i = 0; i < 6; ++i) {
    const Vertex tv = static_cast<Vertex>(6 + ((i + 1) / 2) % 3);
    f.edges.push_back(EdgeDef{id++, static_cast<Vertex>(i), tv, 3});
  }
  for (int j = 0; j < 3; ++j)  // triangle
    f.edges.push_back(
        EdgeDef{id++, static_cast<Vertex>(6 + j), static_cast<Vertex>(6 + (j + 1) % 3), 3});
  f.rotations = rotations_from_coordinates(f.vertex_count, f.edges, f.coordinates);
  designate_external_by_area(f);
  f.pairs = {{0, 1}, {2, 3}, {4, 5}};
  return f;
}

struct GenOptions {
  bool unit_weights = false;    // all weight 1: maximal shortest-path ties
  bool cheap_band = false;      // a weight-1 corridor attracting paths
  bool crossing_pairs = false;  // deliberately interleaved pairs (rejection tests)
};

namespace detail {

// Random noncrossing perfect matching of slots [l, r] (even count), appended
// as index pairs.
inline void noncrossing_matching(int l, int r, Rng& rng, std::vector<std::pair<int, int>>& out) {
  if (l > r) return;
  const int half = (r - l - 1) / 2;
  const int m = l + 1 + 2 * static_cast<int>(rng.range(0, half));
  out.push_back({l, m});
  noncrossing_matching(l + 1, m - 1, rng, out);
  noncrossing_matching(m + 1, r, rng, out);
}

inline void attach_terminals(io::InstanceFile& f, const std::vector<Vertex>& slots,
                             const std::vector<Coord>& outward, int k, Rng& rng,
                             const GenOptions& opt) {
  const int b = static_cast<int>(slots.size());
  require(2 * k <= b, ErrorCode::ParameterOutOfRange,
          "not enough boundary slots for " + std::to_string(k) + " pairs");
  std::vector<int> pick(b);
  for (int i = 0; i < b; ++i) pick[i] = i;
  for (int i = b - 1; i > 0; --i)
    std::swap(pick[i], pick[rng.range(0, i)]);
  pick.resize(2 * k);
  std::sort(pick.begin(), pick.end());

  std::vector<Vertex> tip(2 * k);
  for (int j = 0; j < 2 * k; ++j) {
    const Vertex at = slots[pick[j]];
    const Vertex t = f.vertex_count++;
    tip[j] = t;
    f.coordinates.push_back(
        {f.coordinates[at].x + outward[pick[j]].x, f.coordinates[at].y + outward[pick[j]].y});
    f.edges.push_back(EdgeDef{static_cast<EdgeId>(f.edges.size()), at, t, 1});
  }
  std::vector<std::pair<int, int>> match;
  if (opt.crossing_pairs) {
    require(k >= 2, ErrorCode::ParameterOutOfRange, "crossing layout needs at least two pairs");
    for (int j = 0; j < k; ++j) match.push_back({j, j + k});
  } else {
    noncrossing_matching(0, 2 * k - 1, rng, match);
  }
  for (auto [a, c] : match) {
    if (rng.range(0, 1)) std::swap(a, c);
    f.pairs.push_back({tip[a], tip[c]});
  }
}

}  // namespace detail

inline io::InstanceFile gen_grid(int rows, int cols, int k, std::uint64_t seed,
                                 const GenOptions& opt = {}) {
  require(rows >= 2 && cols >= 2, ErrorCode::ParameterOutOfRange, "grid needs rows, cols >= 2");
  require(k >= 1, ErrorCode::ParameterOutOfRange, "need at least one pair");
  Rng rng(seed);
  io::InstanceFile f;
  f.vertex_count = rows * cols;
  f.has_coordinates = true;
  f.coordinates.resize(f.vertex_count);
  const auto vid = [cols](int r, int c) { return static_cast<Vertex>(r * cols + c); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      f.coordinates[vid(r, c)] = {static_cast<double>(c), static_cast<double>(rows - 1 - r)};
  EdgeId id = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) {
      Weight w = opt.unit_weights ? 1 : rng.range(1, 100);
      if (opt.cheap_band && r == rows / 2) w = 1;
      f.edges.push_back(EdgeDef{id++, vid(r, c), vid(r, c + 1), w});
    }
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Weight w = opt.unit_weights ? 1 : rng.range(1, 100);
      f.edges.push_back(EdgeDef{id++, vid(r, c), vid(r + 1, c), w});
    }
  // Boundary in clockwise order from the top-left corner, with outward
  // directions for stub placement.
  std::vector<Vertex> slots;
  std::vector<Coord> outward;
  for (int c = 0; c < cols; ++c) {
    slots.push_back(vid(0, c));
    outward.push_back({c == 0 ? -0.7 : (c == cols - 1 ? 0.7 : 0.0), c == 0 || c == cols - 1 ? 0.7 : 1.0});
  }
  for (int r = 1; r < rows; ++r) {
    slots.push_back(vid(r, cols - 1));
    outward.push_back({r == rows - 1 ? 0.7 : 1.0, r == rows - 1 ? -0.7 : 0.0});
  }
  for (int c = cols - 2; c >= 0; --c) {
    slots.push_back(vid(rows - 1, c));
    outward.push_back({c == 0 ? -0.7 : 0.0, c == 0 ? -0.7 : -1.0});
  }
  for (int r = rows - 2; r >= 1; --r) {
    slots.push_back(vid(r, 0));
    outward.push_back({-1.0, 0.0});
  }
  detail::attach_terminals(f, slots, outward, k, rng, opt);
  f.rotations = rotations_from_coordinates(f.vertex_count, f.edges, f.coordinates);
  designate_external_by_area(f);
  return f;
}

inline io::InstanceFile gen_random_triangulation(int n, int k, std::uint64_t seed,
                                                 const GenOptions& opt = {}) {
  require(n >= 3, ErrorCode::ParameterOutOfRange, "triangulation needs at least 3 vertices");
  require(k >= 1, ErrorCode::ParameterOutOfRange, "need at least one pair");
  Rng rng(seed);
  io::InstanceFile f;
  f.vertex_count = n;
  f.has_coordinates = true;
  f.coordinates.resize(n);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < n; ++i) {
    const double a = (90.0 - 360.0 * i / n) * pi / 180.0;  // clockwise from the top
    f.coordinates[i] = {10.0 * std::cos(a), 10.0 * std::sin(a)};
  }
  EdgeId id = 0;
  const auto w = [&]() -> Weight { return opt.unit_weights ? 1 : rng.range(1, 100); };
  for (int i = 0; i < n; ++i)
    f.edges.push_back(EdgeDef{id++, static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % n), w()});
  // Recursive fan triangulation of the polygon interior.
  struct Frame {
    int a, b;
  };
  std::vector<Frame> stack{{0, n - 1}};
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    if (b - a < 2) continue;
    const int m = static_cast<int>(rng.range(a + 1, b - 1));
    if (m - a > 1) f.edges.push_back(EdgeDef{id++, static_cast<Vertex>(a), static_cast<Vertex>(m), w()});
    if (b - m > 1) f.edges.push_back(EdgeDef{id++, static_cast<Vertex>(m), static_cast<Vertex>(b), w()});
    stack.push_back({a, m});
    stack.push_back({m, b});
  }
  std::vector<Vertex> slots(n);
  std::vector<Coord> outward(n);
  for (int i = 0; i < n; ++i) {
    slots[i] = static_cast<Vertex>(i);
    const Coord& c = f.coordinates[i];
    outward[i] = {c.x * 0.12, c.y * 0.12};  // radial
  }
  detail::attach_terminals(f, slots, outward, k, rng, opt);
  f.rotations = rotations_from_coordinates(f.vertex_count, f.edges, f.coordinates);
  designate_external_by_area(f);
  return f;
}

// ---------------------------------------------------------------------------
// Brute-force path enumeration and left/right selection
// ---------------------------------------------------------------------------

struct PathSet {
  std::vector<std::vector<DartId>> paths;
  std::vector<Weight> weights;
};

inline PathSet all_simple_paths(const PlaneGraph& g, Vertex s, Vertex t) {
  require(g.edge_count() <= 64, ErrorCode::TooLarge,
          "exhaustive path enumeration is limited to 64 edges");
  PathSet ps;
  std::vector<char> used(g.vertex_count(), 0);
  std::vector<DartId> cur;
  // Iterative DFS over outgoing-dart cursors.
  struct Frame {
    Vertex v;
    const DartId* it;
  };
  std::vector<Frame> st;
  used[s] = 1;
  st.push_back({s, g.darts_begin(s)});
  while (!st.empty()) {
    Frame& fr = st.back();
    if (fr.v == t) {
      ps.paths.push_back(cur);
      ps.weights.push_back(path_weight(g, cur));
      used[fr.v] = 0;
      st.pop_back();
      if (!cur.empty()) cur.pop_back();
      continue;
    }
    if (fr.it == g.darts_end(fr.v)) {
      used[fr.v] = 0;
      st.pop_back();
      if (!cur.empty()) cur.pop_back();
      continue;
    }
    const DartId d = *fr.it++;
    const Vertex u = g.head(d);
    if (used[u]) continue;
    used[u] = 1;
    cur.push_back(d);
    st.push_back({u, g.darts_begin(u)});
  }
  return ps;
}

inline PathSet shortest_only(PathSet ps) {
  if (ps.paths.empty()) return ps;
  const Weight best = *std::min_element(ps.weights.begin(), ps.weights.end());
  PathSet out;
  for (std::size_t i = 0; i < ps.paths.size(); ++i)
    if (ps.weights[i] == best) {
      out.paths.push_back(std::move(ps.paths[i]));
      out.weights.push_back(best);
    }
  return out;
}

// All minimum-weight s-t paths by exhaustive enumeration.
inline PathSet brute_force_paths(const PlaneGraph& g, Vertex s, Vertex t) {
  return shortest_only(all_simple_paths(g, s, t));
}

// Faces strictly between the (s->t oriented) path and the external boundary
// on the path's left: flood from the left side of each path dart, never
// crossing path edges, external-orbit edges, or into the external face.
inline std::vector<char> left_faces_of_path(const PlaneGraph& g,
                                            const std::vector<DartId>& path) {
  const FaceTable& ft = g.faces();
  const FaceId fext = ft.external_face();
  std::vector<char> blocked(g.edge_count(), 0);
  for (DartId d : path) blocked[edge_of(d)] = 1;
  for (std::int32_t p = 0; p < ft.orbit_length(fext); ++p)
    blocked[edge_of(ft.orbit_dart(fext, p))] = 1;
  std::vector<char> in_left(ft.face_count(), 0);
  std::vector<FaceId> stack;
  for (DartId d : path) {
    const FaceId fl = ft.face_of(d);
    if (fl != fext && !in_left[fl]) {
      in_left[fl] = 1;
      stack.push_back(fl);
    }
  }
  while (!stack.empty()) {
    const FaceId fc = stack.back();
    stack.pop_back();
    for (std::int32_t p = 0; p < ft.orbit_length(fc); ++p) {
      const DartId d = ft.orbit_dart(fc, p);
      if (blocked[edge_of(d)]) continue;
      const FaceId f2 = ft.face_of(ncsp::reverse(d));
      if (f2 != fext && !in_left[f2]) {
        in_left[f2] = 1;
        stack.push_back(f2);
      }
    }
  }
  return in_left;
}

namespace detail {

inline bool subset(const std::vector<char>& a, const std::vector<char>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

}  // namespace detail

// Index of the path whose left region is contained in every other's.
inline std::size_t leftmost_index(const PlaneGraph& g, const PathSet& ps) {
  require(!ps.paths.empty(), ErrorCode::ParameterOutOfRange, "empty candidate set");
  std::vector<std::vector<char>> masks;
  masks.reserve(ps.paths.size());
  for (const auto& p : ps.paths) masks.push_back(left_faces_of_path(g, p));
  for (std::size_t i = 0; i < masks.size(); ++i) {
    bool min = true;
    for (std::size_t j = 0; j < masks.size() && min; ++j)
      if (!detail::subset(masks[i], masks[j])) min = false;
    if (min) return i;
  }
  fail(ErrorCode::InternalInvariantViolation, "left regions of candidates form no minimum");
}

// Index of the path whose left region contains every other's.
inline std::size_t rightmost_index(const PlaneGraph& g, const PathSet& ps) {
  require(!ps.paths.empty(), ErrorCode::ParameterOutOfRange, "empty candidate set");
  std::vector<std::vector<char>> masks;
  masks.reserve(ps.paths.size());
  for (const auto& p : ps.paths) masks.push_back(left_faces_of_path(g, p));
  for (std::size_t i = 0; i < masks.size(); ++i) {
    bool max = true;
    for (std::size_t j = 0; j < masks.size() && max; ++j)
      if (!detail::subset(masks[j], masks[i])) max = false;
    if (max) return i;
  }
  fail(ErrorCode::InternalInvariantViolation, "left regions of candidates form no maximum");
}

// Edges strictly left of the given path: not on it, and touching a left face.
inline std::vector<char> strict_left_edges(const PlaneGraph& g, const std::vector<DartId>& path) {
  const std::vector<char> left = left_faces_of_path(g, path);
  std::vector<char> on_path(g.edge_count(), 0);
  for (DartId d : path) on_path[edge_of(d)] = 1;
  const FaceTable& ft = g.faces();
  std::vector<char> out(g.edge_count(), 0);
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (!on_path[e] &&
        (left[ft.face_of(dart_forward(e))] || left[ft.face_of(dart_backward(e))]))
      out[e] = 1;
  return out;
}

// ---------------------------------------------------------------------------
// Property checks
// ---------------------------------------------------------------------------

struct Verdict {
  bool ok = true;
  std::string reason;
};

namespace detail {

struct SharedBlock {
  // Ranges over the paths' vertex sequences (inclusive).
  int p_first, p_last;
  int q_first, q_last;
  bool reversed;  // block runs backwards along q
};

// Maximal common subpaths (and isolated shared vertices) of two simple paths.
inline std::vector<SharedBlock> shared_blocks(const PlaneGraph& g, const std::vector<DartId>& p,
                                              const std::vector<DartId>& q) {
  const std::vector<Vertex> pv = path_vertices(g, p);
  const std::vector<Vertex> qv = path_vertices(g, q);
  std::unordered_map<Vertex, int> qpos;
  for (int j = 0; j < static_cast<int>(qv.size()); ++j) qpos[qv[j]] = j;
  std::vector<SharedBlock> blocks;
  int i = 0;
  const int np = static_cast<int>(pv.size());
  while (i < np) {
    const auto it = qpos.find(pv[i]);
    if (it == qpos.end()) {
      ++i;
      continue;
    }
    SharedBlock b{i, i, it->second, it->second, false};
    int dir = 0;
    int j = it->second;
    while (b.p_last + 1 < np) {
      const auto nx = qpos.find(pv[b.p_last + 1]);
      if (nx == qpos.end()) break;
      const int nj = nx->second;
      if (nj != j + dir && !(dir == 0 && std::abs(nj - j) == 1)) break;
      if (dir == 0) dir = nj - j;
      ++b.p_last;
      j = nj;
    }
    b.reversed = dir < 0;
    b.q_first = std::min(it->second, j);
    b.q_last = std::max(it->second, j);
    blocks.push_back(b);
    i = b.p_last + 1;
  }
  return blocks;
}

}  // namespace detail

// Two paths touch singly if their shared vertices form one common subpath
// (or a single vertex, or nothing) in both.
inline Verdict check_single_touch(const PlaneGraph& g, const std::vector<DartId>& p,
                                  const std::vector<DartId>& q) {
  const auto blocks = detail::shared_blocks(g, p, q);
  if (blocks.size() > 1)
    return {false, "paths meet in " + std::to_string(blocks.size()) + " separate places"};
  if (blocks.empty()) return {};
  // One block along p; the shared vertices must also be contiguous along q.
  const auto& b = blocks.front();
  const std::vector<Vertex> pv = path_vertices(g, p);
  const std::vector<Vertex> qv = path_vertices(g, q);
  std::vector<char> in_block(g.vertex_count(), 0);
  for (int i = b.p_first; i <= b.p_last; ++i) in_block[pv[i]] = 1;
  int shared_on_q = 0;
  for (Vertex v : qv) shared_on_q += in_block[v];
  std::vector<char> on_p(g.vertex_count(), 0);
  for (Vertex v : pv) on_p[v] = 1;
  int total_shared = 0;
  for (Vertex v : qv) total_shared += on_p[v];
  if (shared_on_q != b.p_last - b.p_first + 1 || total_shared != shared_on_q)
    return {false, "shared vertices do not form one common subpath"};
  return {};
}

// Rotation-interleaving test around every shared block: the two paths cross
// if one's attachment darts separate the other's in the cyclic order around
// the block.
inline Verdict check_noncrossing(const PlaneGraph& g, const std::vector<DartId>& p,
                                 const std::vector<DartId>& q) {
  const std::vector<Vertex> pv = path_vertices(g, p);
  const std::vector<Vertex> qv = path_vertices(g, q);
  for (const auto& b : detail::shared_blocks(g, p, q)) {
    // Attachment darts (outgoing at the block's two end vertices).
    std::vector<DartId> p_att, q_att;
    if (b.p_first > 0) p_att.push_back(ncsp::reverse(p[b.p_first - 1]));
    if (b.p_last + 1 < static_cast<int>(pv.size())) p_att.push_back(p[b.p_last]);
    if (b.q_first > 0) q_att.push_back(ncsp::reverse(q[b.q_first - 1]));
    if (b.q_last + 1 < static_cast<int>(qv.size())) q_att.push_back(q[b.q_last]);
    if (p_att.size() < 2 || q_att.size() < 2) continue;  // an end lies inside the block
    // Cyclic order around the block boundary.
    std::vector<DartId> cyc;
    const Vertex u = pv[b.p_first];
    const Vertex v = pv[b.p_last];
    if (u == v) {
      for (const DartId* it = g.darts_begin(u); it != g.darts_end(u); ++it) cyc.push_back(*it);
    } else {
      const DartId into_block_u = p[b.p_first];                  // u -> next block vertex
      const DartId block_at_v = ncsp::reverse(p[b.p_last - 1]);  // v -> previous block vertex
      for (DartId d = g.rotation_next(into_block_u); d != into_block_u; d = g.rotation_next(d))
        cyc.push_back(d);
      for (DartId d = g.rotation_next(block_at_v); d != block_at_v; d = g.rotation_next(d))
        cyc.push_back(d);
    }
    const auto pos_of = [&cyc](DartId d) {
      for (std::size_t i = 0; i < cyc.size(); ++i)
        if (cyc[i] == d) return static_cast<int>(i);
      return -1;
    };
    const int p0 = pos_of(p_att[0]), p1 = pos_of(p_att[1]);
    const int q0 = pos_of(q_att[0]), q1 = pos_of(q_att[1]);
    require(p0 >= 0 && p1 >= 0 && q0 >= 0 && q1 >= 0, ErrorCode::InternalInvariantViolation,
            "attachment dart missing from block boundary cycle");
    const int n = static_cast<int>(cyc.size());
    const auto between = [n](int a, int b, int x) {
      return ((x - a + n) % n) > 0 && ((x - a + n) % n) < ((b - a + n) % n);
    };
    if (between(p0, p1, q0) != between(p0, p1, q1))
      return {false, "paths interleave around a shared subpath"};
  }
  return {};
}

// Every edge may be used by at most two of the materialized paths.
inline Verdict check_multiplicity(const std::vector<std::vector<DartId>>& paths,
                                  EdgeId edge_count) {
  std::vector<int> cnt(edge_count, 0);
  for (const auto& p : paths) {
    std::vector<char> seen(edge_count, 0);
    for (DartId d : p) {
      const EdgeId e = edge_of(d);
      require(!seen[e], ErrorCode::InternalInvariantViolation, "path repeats an edge");
      seen[e] = 1;
      ++cnt[e];
    }
  }
  for (EdgeId e = 0; e < edge_count; ++e)
    if (cnt[e] > 2)
      return {false, "edge " + std::to_string(e) + " used by " + std::to_string(cnt[e]) + " paths"};
  return {};
}

// Orient a path given as edge ids into a dart walk starting at `s`.
inline std::vector<DartId> darts_from_edges(const PlaneGraph& g, Vertex s,
                                            const std::vector<EdgeId>& edges) {
  std::vector<DartId> out;
  out.reserve(edges.size());
  Vertex at = s;
  for (const EdgeId e : edges) {
    const DartId d = g.tail(dart_forward(e)) == at ? dart_forward(e) : dart_backward(e);
    require(g.tail(d) == at, ErrorCode::ParameterOutOfRange, "edge list is not a walk");
    out.push_back(d);
    at = g.head(d);
  }
  return out;
}

// Exhaustive saturation scan: no boundary subpath on or right of the path may
// replace the subpath between its endpoints at equal or smaller weight.
inline Verdict check_no_right_shortcut(const PlaneGraph& g, const std::vector<DartId>& lambda) {
  const FaceTable& ft = g.faces();
  const std::vector<char> left = left_faces_of_path(g, lambda);
  std::vector<char> on_lambda(g.edge_count(), 0);
  for (DartId d : lambda) on_lambda[edge_of(d)] = 1;
  std::vector<char> edge_left(g.edge_count(), 0);
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    if (!on_lambda[e] &&
        (left[ft.face_of(dart_forward(e))] || left[ft.face_of(dart_backward(e))]))
      edge_left[e] = 1;
  const std::vector<Vertex> lv = path_vertices(g, lambda);
  std::vector<std::int32_t> lambda_pos(g.vertex_count(), -1);
  for (std::size_t i = 0; i < lv.size(); ++i) lambda_pos[lv[i]] = static_cast<std::int32_t>(i);
  std::vector<Weight> pfx(lv.size(), 0);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    pfx[i + 1] = pfx[i] + g.dart_weight(lambda[i]);

  for (FaceId fc = 0; fc < ft.face_count(); ++fc) {
    const std::int32_t len = ft.orbit_length(fc);
    std::vector<std::int32_t> hits;  // orbit positions whose tail is on lambda
    for (std::int32_t p = 0; p < len; ++p)
      if (lambda_pos[g.tail(ft.orbit_dart(fc, p))] >= 0) hits.push_back(p);
    for (std::int32_t a : hits)
      for (std::int32_t b : hits) {
        if (a == b) continue;
        const Vertex xa = g.tail(ft.orbit_dart(fc, a));
        const Vertex xb = g.tail(ft.orbit_dart(fc, b));
        if (xa == xb) continue;
        const std::int32_t la = lambda_pos[xa];
        const std::int32_t lb = lambda_pos[xb];
        const std::int32_t u = std::min(la, lb), w = std::max(la, lb);
        const Weight replaced = pfx[w] - pfx[u];
        const Weight arc = ft.segment_weight(fc, a, b);
        if (arc > replaced) continue;
        // Candidate must be a genuine alternative lying weakly right.
        bool valid = true;
        bool all_on_lambda = true;
        std::vector<Vertex> interior;
        for (std::int32_t p = a; p != b && valid; p = (p + 1) % len) {
          const DartId d = ft.orbit_dart(fc, p);
          if (edge_left[edge_of(d)]) valid = false;
          if (!on_lambda[edge_of(d)]) all_on_lambda = false;
          if (p != a) {
            if (lambda_pos[g.tail(d)] >= 0) valid = false;  // interior touches lambda
            interior.push_back(g.tail(d));
          }
        }
        if (valid) {  // replacement must itself be a simple path
          std::sort(interior.begin(), interior.end());
          if (std::adjacent_find(interior.begin(), interior.end()) != interior.end())
            valid = false;
        }
        if (valid && !all_on_lambda)
          return {false, "face " + std::to_string(fc) + " offers a right replacement of weight " +
                             std::to_string(arc) + " for a subpath of weight " +
                             std::to_string(replaced)};
      }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Aggregated oracle
// ---------------------------------------------------------------------------

struct OracleOptions {
  std::int64_t max_saturation_edges = 5000;  // skip the face scan above this
  std::int64_t max_rightmost_edges = 64;     // skip path enumeration above this
  int check_level = 0;                       // solver-internal assertion level
};

// Everything checkable about one solved instance, computed from materialized
// outputs and the raw union graph only.
struct OracleReport {
  std::vector<Weight> reference_dist;  // per input pair: Dijkstra in the union
  std::vector<Weight> reported_dist;   // per input pair: solver output
  Verdict distances_match, single_touch, noncrossing, multiplicity_ok, skeleton_bounds,
      saturated, rightmost, listing_ok;
  bool saturation_checked = false;  // false when the union was over the size gate
  bool rightmost_checked = false;
  std::int64_t union_edges = 0;
  SolveStats stats;

  bool all_pass() const {
    return distances_match.ok && single_touch.ok && noncrossing.ok && multiplicity_ok.ok &&
           skeleton_bounds.ok && saturated.ok && rightmost.ok && listing_ok.ok;
  }
  std::vector<std::pair<const char*, const Verdict*>> named() const {
    return {{"distances_match", &distances_match}, {"single_touch", &single_touch},
            {"noncrossing", &noncrossing},         {"multiplicity", &multiplicity_ok},
            {"skeleton_bounds", &skeleton_bounds}, {"saturated", &saturated},
            {"rightmost", &rightmost},             {"listing", &listing_ok}};
  }
};

// Probe allowance for listing one path of l darts among k pairs.
inline double listing_probe_budget(std::size_t l, int k) {
  const double ld = static_cast<double>(l);
  const double ratio = std::max(2.0, 2.0 * static_cast<double>(k) / ld);
  return 4.0 * (ld + ld * std::log2(ratio));
}

// Solve the instance and check every property the solver promises against
// independent recomputation.  The terminal-edge availability region of pair i
// is rebuilt as the union minus everything strictly left of the already
// processed paths; saturation and rightmost selection are validated inside it.
inline OracleReport oracle_report(const io::InstanceFile& file, const OracleOptions& opt = {}) {
  OracleReport rep;
  const PlaneGraph g = file.build_graph();
  const PreparedInstance prep = prepare(g, file.pairs);
  SolverOptions sopt;
  sopt.check_level = opt.check_level;
  const ImplicitPathSet r = solve_noncrossing(g, prep, sopt);
  rep.stats = r.stats;
  rep.union_edges = g.edge_count();
  const int kin = static_cast<int>(file.pairs.size());

  const DistanceReport dr = all_distances(r);
  rep.reported_dist = dr.dist;
  rep.reference_dist.resize(static_cast<std::size_t>(kin));
  for (int j = 0; j < kin; ++j) {
    const std::vector<Weight> du = dijkstra(g, file.pairs[static_cast<std::size_t>(j)].first);
    rep.reference_dist[static_cast<std::size_t>(j)] =
        du[file.pairs[static_cast<std::size_t>(j)].second];
    if (rep.distances_match.ok &&
        rep.reference_dist[static_cast<std::size_t>(j)] != dr.dist[static_cast<std::size_t>(j)])
      rep.distances_match = {false, "pair " + std::to_string(j) + ": reported " +
                                        std::to_string(dr.dist[static_cast<std::size_t>(j)]) +
                                        ", reference " +
                                        std::to_string(rep.reference_dist[static_cast<std::size_t>(j)])};
  }

  std::vector<std::vector<DartId>> mat(static_cast<std::size_t>(r.k));
  for (int i = 0; i < r.k; ++i) mat[static_cast<std::size_t>(i)] = r.materialize(i);

  for (int i = 0; i < r.k && rep.single_touch.ok; ++i)
    for (int j = i + 1; j < r.k && rep.single_touch.ok; ++j) {
      const Verdict v = check_single_touch(g, mat[static_cast<std::size_t>(i)],
                                           mat[static_cast<std::size_t>(j)]);
      if (!v.ok)
        rep.single_touch = {false, "pairs " + std::to_string(i) + "," + std::to_string(j) + ": " +
                                       v.reason};
    }
  for (int i = 0; i < r.k && rep.noncrossing.ok; ++i)
    for (int j = i + 1; j < r.k && rep.noncrossing.ok; ++j) {
      const Verdict v = check_noncrossing(g, mat[static_cast<std::size_t>(i)],
                                          mat[static_cast<std::size_t>(j)]);
      if (!v.ok)
        rep.noncrossing = {false, "pairs " + std::to_string(i) + "," + std::to_string(j) + ": " +
                                      v.reason};
    }

  std::vector<std::vector<DartId>> explicit_sets(static_cast<std::size_t>(r.k));
  std::int64_t explicit_total = 0;
  for (int i = 0; i < r.k; ++i) {
    for (const PathSegment& sg : r.paths[static_cast<std::size_t>(i)].segments)
      if (sg.child < 0)
        explicit_sets[static_cast<std::size_t>(i)].insert(
            explicit_sets[static_cast<std::size_t>(i)].end(), sg.darts.begin(), sg.darts.end());
    explicit_total += static_cast<std::int64_t>(explicit_sets[static_cast<std::size_t>(i)].size());
  }
  rep.multiplicity_ok = check_multiplicity(explicit_sets, g.edge_count());
  if (explicit_total > 2 * static_cast<std::int64_t>(g.edge_count()))
    rep.skeleton_bounds = {false, "explicit darts total " + std::to_string(explicit_total) +
                                      " exceeds twice the union's edge count"};

  // Availability regions, built incrementally left to right.
  const bool do_sat = rep.union_edges <= opt.max_saturation_edges;
  const bool do_right = rep.union_edges <= opt.max_rightmost_edges;
  rep.saturation_checked = do_sat;
  rep.rightmost_checked = do_right;
  if (do_sat || do_right) {
    std::vector<char> available(static_cast<std::size_t>(g.edge_count()), 1);
    for (int i = 0; i < r.k; ++i) {
      const std::vector<DartId>& lam = mat[static_cast<std::size_t>(i)];
      io::InstanceFile uf = file;
      uf.pairs.clear();
      const Restriction sub = restrict_to_edges(uf, available, g.tail(lam.front()));
      bool mappable = true;
      std::vector<DartId> slam;
      slam.reserve(lam.size());
      for (const DartId d : lam) {
        const EdgeId se = sub.edge_to_sub[static_cast<std::size_t>(edge_of(d))];
        if (se < 0) {
          mappable = false;
          break;
        }
        slam.push_back(2 * se + (d & 1));
      }
      if (!mappable) {
        const std::string why =
            "path of pair " + std::to_string(i) + " leaves its availability region";
        if (rep.saturated.ok) rep.saturated = {false, why};
        if (rep.rightmost.ok) rep.rightmost = {false, why};
        break;
      }
      const PlaneGraph su = sub.file.build_graph();
      if (do_sat && rep.saturated.ok) {
        const Verdict v = check_no_right_shortcut(su, slam);
        if (!v.ok) rep.saturated = {false, "pair " + std::to_string(i) + ": " + v.reason};
      }
      if (do_right && rep.rightmost.ok) {
        const Vertex ss = su.tail(slam.front());
        const Vertex st = su.head(slam.back());
        const PathSet cands = brute_force_paths(su, ss, st);
        if (cands.paths.empty()) {
          rep.rightmost = {false, "pair " + std::to_string(i) + ": no candidate paths"};
        } else {
          const std::size_t want = rightmost_index(su, cands);
          if (cands.paths[want] != slam)
            rep.rightmost = {false, "pair " + std::to_string(i) +
                                        " is not the rightmost shortest path available to it"};
        }
      }
      const std::vector<char> gone = strict_left_edges(g, lam);
      for (EdgeId e = 0; e < g.edge_count(); ++e)
        if (gone[static_cast<std::size_t>(e)]) available[static_cast<std::size_t>(e)] = 0;
    }
  }

  // Listing round-trip: right darts, simple, budgeted.
  const QueryIndex qi(r);
  for (int j = 0; j < kin && rep.listing_ok.ok; ++j) {
    const int i = dr.prepared[static_cast<std::size_t>(j)];
    ListStats st;
    const std::vector<DartId> seq = qi.list_path(i, &st);
    const auto bad = [&](const std::string& why) {
      rep.listing_ok = {false, "pair " + std::to_string(j) + ": " + why};
    };
    if (seq != mat[static_cast<std::size_t>(i)]) {
      bad("listed darts differ from the materialized path");
      break;
    }
    Weight w = 0;
    for (const DartId d : seq) w += g.dart_weight(d);
    if (w != dr.dist[static_cast<std::size_t>(j)]) bad("listed weight differs from the report");
    if (static_cast<double>(st.probes) > listing_probe_budget(seq.size(), kin))
      bad("listing used " + std::to_string(st.probes) + " probes on " +
          std::to_string(seq.size()) + " darts");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Size-calibrated unions for benchmarking
// ---------------------------------------------------------------------------

// A union of shortest paths with roughly `target_edges` edges: k pairs over a
// wide grid, the width rescaled until the union lands near the target.
inline GeneratedInstance calibrated_union(std::int64_t target_edges, int k, std::uint64_t seed) {
  require(target_edges >= 64, ErrorCode::ParameterOutOfRange, "target too small to calibrate");
  require(k >= 1, ErrorCode::ParameterOutOfRange, "need at least one pair");
  const int rows = std::max(8, 2 * k + 4);
  std::int64_t cols = std::max<std::int64_t>(8, target_edges / std::max(1, k));
  GeneratedInstance best;
  std::int64_t best_err = -1;
  for (int round = 0; round < 3; ++round) {
    GeneratedInstance gi = union_of_shortest_paths(
        gen_grid(rows, static_cast<int>(cols), k, seed), seed + static_cast<std::uint64_t>(round));
    const std::int64_t got = static_cast<std::int64_t>(gi.file.edges.size());
    const std::int64_t err = std::abs(got - target_edges);
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best = std::move(gi);
    }
    if (err * 10 <= target_edges) break;  // within 10%
    cols = std::max<std::int64_t>(8, cols * target_edges / std::max<std::int64_t>(1, got));
  }
  return best;
}

}  // namespace ncsp::testkit
