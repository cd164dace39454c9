#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncsp/error.hpp"

namespace ncsp {

using Vertex = std::int32_t;
using EdgeId = std::int32_t;
using DartId = std::int32_t;
using FaceId = std::int32_t;

// A dart is a directed view of an undirected edge: dart 2e points from the
// edge's first endpoint to its second, dart 2e+1 the other way.
inline constexpr DartId dart_forward(EdgeId e) { return 2 * e; }
inline constexpr DartId dart_backward(EdgeId e) { return 2 * e + 1; }
inline constexpr EdgeId edge_of(DartId d) { return d >> 1; }
inline constexpr DartId reverse(DartId d) { return d ^ 1; }

struct EdgeDef {
  EdgeId id;
  Vertex u;
  Vertex v;
  Weight w;
};

struct Coord {
  double x;
  double y;
};

// Direction of travel along a face orbit for boundary weight queries.
enum class OrbitSide { Forward, Backward };

// Per-face dart orbits with O(1) boundary-subpath weight queries via
// cumulative weights from each orbit's anchor position.
class FaceTable {
 public:
  FaceId face_count() const { return static_cast<FaceId>(orbit_start_.size()) - 1; }
  FaceId face_of(DartId d) const { return face_of_[d]; }
  std::int32_t position_of(DartId d) const { return position_of_[d]; }
  FaceId external_face() const { return external_face_; }

  std::int32_t orbit_length(FaceId f) const { return orbit_start_[f + 1] - orbit_start_[f]; }

  // Dart at a given position of the face orbit (position taken modulo length).
  DartId orbit_dart(FaceId f, std::int64_t pos) const {
    const std::int32_t len = orbit_length(f);
    std::int64_t p = pos % len;
    if (p < 0) p += len;
    return orbit_darts_[orbit_start_[f] + p];
  }

  Weight boundary_weight(FaceId f) const { return boundary_weight_[f]; }

  // Cumulative weight of orbit darts [0, pos) of face f from its anchor.
  // The prefix array is face-major with len+1 slots per face, hence the +f.
  Weight prefix_weight(FaceId f, std::int32_t pos) const {
    assert(pos >= 0 && pos <= orbit_length(f) && "orbit position out of range");
    return prefix_[orbit_start_[f] + f + pos];
  }

  // Weight of the orbit segment covering positions [from, to) walking forward
  // (wrapping around the anchor if needed).  from == to yields 0.
  Weight segment_weight(FaceId f, std::int32_t from, std::int32_t to) const {
    const std::int32_t len = orbit_length(f);
    assert(from >= 0 && from < len && to >= 0 && to <= len && "positions outside orbit");
    if (from <= to) return prefix_weight(f, to) - prefix_weight(f, from);
    return boundary_weight_[f] - (prefix_weight(f, from) - prefix_weight(f, to));
  }

  const std::vector<DartId>& orbit_storage() const { return orbit_darts_; }
  std::int32_t orbit_begin(FaceId f) const { return orbit_start_[f]; }

 private:
  friend class PlaneGraph;
  std::vector<FaceId> face_of_;          // per dart
  std::vector<std::int32_t> position_of_;  // per dart, index inside its orbit
  std::vector<std::int32_t> orbit_start_;  // face -> offset into orbit_darts_
  std::vector<DartId> orbit_darts_;        // concatenated orbits
  std::vector<Weight> boundary_weight_;    // per face
  std::vector<Weight> prefix_;             // aligned with orbit_darts_, one extra per face
  FaceId external_face_ = -1;
};

// Immutable plane graph: weighted edges plus a clockwise rotation system.
// Faces are traced at construction; the orbit containing outer_dart is the
// external face.  Face successor rule: face_next(d) is the clockwise rotation
// successor of reverse(d) at head(d), which keeps each orbit's face on the
// walk's left-hand side.
class PlaneGraph {
 public:
  static PlaneGraph build(Vertex vertex_count, std::vector<EdgeDef> edges,
                          const std::vector<std::vector<EdgeId>>& rotations, DartId outer_dart,
                          std::vector<Coord> coordinates = {}) {
    PlaneGraph g;
    require(vertex_count >= 1, ErrorCode::ParameterOutOfRange, "vertex count must be positive");
    g.n_ = vertex_count;
    const std::int64_t m = static_cast<std::int64_t>(edges.size());
    require(m >= 1, ErrorCode::ParameterOutOfRange, "graph needs at least one edge");
    require(static_cast<std::int64_t>(rotations.size()) == vertex_count, ErrorCode::BadRotation,
            "need one rotation per vertex");

    g.eu_.assign(m, -1);
    g.ev_.assign(m, -1);
    g.ew_.assign(m, 0);
    std::vector<char> seen(m, 0);
    for (const EdgeDef& e : edges) {
      require(e.id >= 0 && e.id < m, ErrorCode::ParseError,
              "edge id " + std::to_string(e.id) + " not dense");
      require(!seen[e.id], ErrorCode::ParseError, "duplicate edge id " + std::to_string(e.id));
      seen[e.id] = 1;
      require(e.u >= 0 && e.u < vertex_count && e.v >= 0 && e.v < vertex_count,
              ErrorCode::ParseError, "edge endpoint out of range");
      require(e.u != e.v, ErrorCode::BadRotation, "self-loops are not supported");
      require(e.w > 0, ErrorCode::NonPositiveWeight,
              "edge " + std::to_string(e.id) + " has non-positive weight");
      require(e.w <= kMaxEdgeWeight, ErrorCode::WeightOverflow,
              "edge " + std::to_string(e.id) + " weight exceeds 2^60");
      g.eu_[e.id] = e.u;
      g.ev_[e.id] = e.v;
      g.ew_[e.id] = e.w;
    }

    // Rotations: CSR of outgoing darts per vertex, clockwise.
    g.rot_start_.assign(vertex_count + 1, 0);
    for (Vertex v = 0; v < vertex_count; ++v)
      g.rot_start_[v + 1] = g.rot_start_[v] + static_cast<std::int32_t>(rotations[v].size());
    require(g.rot_start_[vertex_count] == 2 * m, ErrorCode::BadRotation,
            "rotation entries must total twice the edge count");
    g.rot_darts_.assign(2 * m, -1);
    std::vector<std::int8_t> at_vertex_count(m, 0);
    for (Vertex v = 0; v < vertex_count; ++v) {
      require(!rotations[v].empty(), ErrorCode::BadRotation,
              "vertex " + std::to_string(v) + " has empty rotation");
      std::int32_t idx = g.rot_start_[v];
      for (EdgeId e : rotations[v]) {
        require(e >= 0 && e < m, ErrorCode::BadRotation, "rotation references unknown edge");
        DartId d;
        if (g.eu_[e] == v) {
          d = dart_forward(e);
        } else if (g.ev_[e] == v) {
          d = dart_backward(e);
        } else {
          fail(ErrorCode::BadRotation, "edge " + std::to_string(e) + " listed at non-endpoint " +
                                           std::to_string(v));
        }
        require(at_vertex_count[e] < 2, ErrorCode::BadRotation,
                "edge " + std::to_string(e) + " appears more than twice across rotations");
        ++at_vertex_count[e];
        g.rot_darts_[idx++] = d;
      }
    }
    for (EdgeId e = 0; e < m; ++e)
      require(at_vertex_count[e] == 2, ErrorCode::BadRotation,
              "edge " + std::to_string(e) + " missing from a rotation");
    // Each dart must appear exactly once; catch an edge listed twice at one
    // endpoint and never at the other.
    {
      std::vector<char> dart_seen(2 * m, 0);
      for (DartId d : g.rot_darts_) {
        require(!dart_seen[d], ErrorCode::BadRotation, "edge listed twice at the same endpoint");
        dart_seen[d] = 1;
      }
    }

    g.rot_pos_.assign(2 * m, -1);
    for (std::int32_t i = 0; i < 2 * m; ++i) g.rot_pos_[g.rot_darts_[i]] = i;
    g.rot_next_.assign(2 * m, -1);
    g.rot_prev_.assign(2 * m, -1);
    for (Vertex v = 0; v < vertex_count; ++v) {
      const std::int32_t b = g.rot_start_[v], e = g.rot_start_[v + 1];
      for (std::int32_t i = b; i < e; ++i) {
        const std::int32_t j = (i + 1 == e) ? b : i + 1;
        g.rot_next_[g.rot_darts_[i]] = g.rot_darts_[j];
        g.rot_prev_[g.rot_darts_[j]] = g.rot_darts_[i];
      }
    }

    require(outer_dart >= 0 && outer_dart < 2 * m, ErrorCode::BadRotation,
            "outer dart out of range");
    g.outer_dart_ = outer_dart;

    // Connectivity over the rotation structure.
    {
      std::vector<char> vis(vertex_count, 0);
      std::vector<Vertex> stack{0};
      vis[0] = 1;
      std::int64_t cnt = 1;
      while (!stack.empty()) {
        Vertex v = stack.back();
        stack.pop_back();
        for (std::int32_t i = g.rot_start_[v]; i < g.rot_start_[v + 1]; ++i) {
          Vertex h = g.head(g.rot_darts_[i]);
          if (!vis[h]) {
            vis[h] = 1;
            ++cnt;
            stack.push_back(h);
          }
        }
      }
      require(cnt == vertex_count, ErrorCode::Disconnected, "graph is not connected");
    }

    g.faces_ = g.trace_face_table();
    // Euler relation |V| - |E| + |F| = 2 certifies a consistent planar embedding.
    require(static_cast<std::int64_t>(g.n_) - m + g.faces_.face_count() == 2,
            ErrorCode::EulerViolation,
            "rotation system does not describe a planar embedding (Euler check failed)");

    if (!coordinates.empty()) {
      require(static_cast<Vertex>(coordinates.size()) == vertex_count,
              ErrorCode::ParameterOutOfRange, "need one coordinate per vertex when provided");
      g.coords_ = std::move(coordinates);
    }
    return g;
  }

  Vertex vertex_count() const { return n_; }
  EdgeId edge_count() const { return static_cast<EdgeId>(ew_.size()); }
  DartId dart_count() const { return 2 * edge_count(); }

  Vertex edge_u(EdgeId e) const { return eu_[e]; }
  Vertex edge_v(EdgeId e) const { return ev_[e]; }
  Weight edge_weight(EdgeId e) const { return ew_[e]; }
  Weight dart_weight(DartId d) const { return ew_[edge_of(d)]; }

  Vertex tail(DartId d) const { return (d & 1) ? ev_[edge_of(d)] : eu_[edge_of(d)]; }
  Vertex head(DartId d) const { return (d & 1) ? eu_[edge_of(d)] : ev_[edge_of(d)]; }

  // Dart of edge e leaving vertex v.
  DartId dart_from(EdgeId e, Vertex v) const {
    if (eu_[e] == v) return dart_forward(e);
    require(ev_[e] == v, ErrorCode::BadRotation, "vertex is not an endpoint of edge");
    return dart_backward(e);
  }

  std::int32_t degree(Vertex v) const { return rot_start_[v + 1] - rot_start_[v]; }

  // Outgoing darts of v in clockwise order (CSR slice).
  const DartId* darts_begin(Vertex v) const { return rot_darts_.data() + rot_start_[v]; }
  const DartId* darts_end(Vertex v) const { return rot_darts_.data() + rot_start_[v + 1]; }

  // Next/previous outgoing dart at tail(d) in clockwise rotation order.
  DartId rotation_next(DartId d) const { return rot_next_[d]; }
  DartId rotation_prev(DartId d) const { return rot_prev_[d]; }

  // Successor along the face orbit: the face lying left of d stays left.
  DartId face_next(DartId d) const { return rot_next_[ncsp::reverse(d)]; }

  DartId outer_dart() const { return outer_dart_; }
  const FaceTable& faces() const { return faces_; }

  FaceId face_left_of(DartId d) const { return faces_.face_of(d); }
  FaceId face_right_of(DartId d) const { return faces_.face_of(ncsp::reverse(d)); }
  FaceId external_face() const { return faces_.external_face(); }

  bool has_coordinates() const { return !coords_.empty(); }
  const std::vector<Coord>& coordinates() const { return coords_; }

  // Weight of the boundary walk between two orbit positions of face f.
  // Positions index the face orbit; position p names the tail vertex of the
  // orbit dart at p.  Forward walks along the orbit, Backward against it.
  Weight boundary_subpath_weight(FaceId f, std::int32_t from_pos, std::int32_t to_pos,
                                 OrbitSide side) const {
    require(f >= 0 && f < faces_.face_count(), ErrorCode::PositionNotOnFace, "unknown face");
    const std::int32_t len = faces_.orbit_length(f);
    require(from_pos >= 0 && from_pos < len && to_pos >= 0 && to_pos < len,
            ErrorCode::PositionNotOnFace, "position outside face orbit");
    if (from_pos == to_pos) return 0;
    const Weight forward = faces_.segment_weight(f, from_pos, to_pos);
    if (side == OrbitSide::Forward) return forward;
    return faces_.boundary_weight(f) - forward;
  }

  // Re-trace the orbits from scratch (exposed so tests can check determinism
  // and the permutation laws independently of the cached table).
  FaceTable trace_face_table() const {
    FaceTable t;
    const std::int32_t nd = dart_count();
    t.face_of_.assign(nd, -1);
    t.position_of_.assign(nd, -1);
    t.orbit_start_.push_back(0);
    t.orbit_darts_.reserve(nd);
    t.prefix_.reserve(nd + 16);
    for (DartId d0 = 0; d0 < nd; ++d0) {
      if (t.face_of_[d0] != -1) continue;
      const FaceId f = static_cast<FaceId>(t.orbit_start_.size()) - 1;
      Weight acc = 0;
      std::int32_t pos = 0;
      DartId d = d0;
      do {
        t.face_of_[d] = f;
        t.position_of_[d] = pos++;
        t.orbit_darts_.push_back(d);
        t.prefix_.push_back(acc);
        acc = checked_add(acc, dart_weight(d));
        d = face_next(d);
      } while (d != d0);
      t.prefix_.push_back(acc);  // full boundary weight sits at position len
      t.boundary_weight_.push_back(acc);
      t.orbit_start_.push_back(static_cast<std::int32_t>(t.orbit_darts_.size()));
    }
    t.external_face_ = t.face_of_[outer_dart_];
    return t;
  }

 private:
  Vertex n_ = 0;
  std::vector<Vertex> eu_, ev_;
  std::vector<Weight> ew_;
  std::vector<std::int32_t> rot_start_;
  std::vector<DartId> rot_darts_;
  std::vector<std::int32_t> rot_pos_;
  std::vector<DartId> rot_next_, rot_prev_;
  DartId outer_dart_ = -1;
  FaceTable faces_;
  std::vector<Coord> coords_;
};

}  // namespace ncsp
