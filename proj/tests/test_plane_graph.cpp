#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <vector>

#include "ncsp/plane_graph.hpp"

using namespace ncsp;

namespace {

template <typename Fn>
ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InternalInvariantViolation;
}

// Exhaustive permutation-law and Euler checks, run on every fixture.
void check_laws(const PlaneGraph& g) {
  // rotation_next cycles exactly over the outgoing darts of each vertex.
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const DartId first = *g.darts_begin(v);
    DartId d = first;
    std::int32_t steps = 0;
    do {
      REQUIRE(g.tail(d) == v);
      d = g.rotation_next(d);
      ++steps;
      REQUIRE(steps <= g.degree(v));
    } while (d != first);
    REQUIRE(steps == g.degree(v));
  }
  // rotation_prev inverts rotation_next.
  for (DartId d = 0; d < g.dart_count(); ++d) {
    REQUIRE(g.rotation_prev(g.rotation_next(d)) == d);
    REQUIRE(reverse(reverse(d)) == d);
    REQUIRE(g.face_right_of(d) == g.face_left_of(reverse(d)));
  }
  // Face orbits partition the darts.
  const FaceTable& ft = g.faces();
  std::vector<int> seen(g.dart_count(), 0);
  std::int64_t total = 0;
  for (FaceId f = 0; f < ft.face_count(); ++f) {
    total += ft.orbit_length(f);
    Weight w = 0;
    for (std::int32_t p = 0; p < ft.orbit_length(f); ++p) {
      const DartId d = ft.orbit_dart(f, p);
      ++seen[d];
      REQUIRE(ft.face_of(d) == f);
      REQUIRE(ft.position_of(d) == p);
      REQUIRE(g.face_next(d) == ft.orbit_dart(f, p + 1));
      w += g.dart_weight(d);
    }
    REQUIRE(w == ft.boundary_weight(f));
  }
  REQUIRE(total == g.dart_count());
  for (DartId d = 0; d < g.dart_count(); ++d) REQUIRE(seen[d] == 1);
  // Euler's formula.
  REQUIRE(g.vertex_count() - g.edge_count() + ft.face_count() == 2);
}

PlaneGraph build_cycle(const std::vector<Weight>& w) {
  const Vertex n = static_cast<Vertex>(w.size());
  std::vector<EdgeDef> edges;
  std::vector<std::vector<EdgeId>> rot(n);
  for (Vertex v = 0; v < n; ++v) {
    edges.push_back(EdgeDef{v, v, static_cast<Vertex>((v + 1) % n), w[v]});
    rot[v] = {v, static_cast<EdgeId>((v + n - 1) % n)};
  }
  return PlaneGraph::build(n, edges, rot, 0);
}

}  // namespace

TEST_CASE("single edge: one face of two darts, boundary counts both directions") {
  PlaneGraph g = PlaneGraph::build(2, {{0, 0, 1, 5}}, {{0}, {0}}, 0);
  check_laws(g);
  const FaceTable& ft = g.faces();
  REQUIRE(ft.face_count() == 1);
  REQUIRE(ft.orbit_length(0) == 2);
  REQUIRE(ft.boundary_weight(0) == 10);
  REQUIRE(g.tail(dart_forward(0)) == 0);
  REQUIRE(g.head(dart_forward(0)) == 1);
  REQUIRE(reverse(dart_forward(0)) == dart_backward(0));
}

TEST_CASE("triangle: two faces of three darts each") {
  PlaneGraph g = build_cycle({1, 1, 1});
  check_laws(g);
  REQUIRE(g.faces().face_count() == 2);
  REQUIRE(g.faces().orbit_length(0) == 3);
  REQUIRE(g.faces().orbit_length(1) == 3);
  // Orbit closure: three face_next steps return to the start.
  for (DartId d = 0; d < g.dart_count(); ++d)
    REQUIRE(g.face_next(g.face_next(g.face_next(d))) == d);
}

TEST_CASE("square cycle: two orbits of length four") {
  PlaneGraph g = build_cycle({1, 1, 1, 1});
  check_laws(g);
  REQUIRE(g.faces().face_count() == 2);
  REQUIRE(g.faces().orbit_length(0) == 4);
  REQUIRE(g.faces().orbit_length(1) == 4);
}

TEST_CASE("path graph: a tree has a single face walking each edge twice") {
  PlaneGraph g = PlaneGraph::build(3, {{0, 0, 1, 2}, {1, 1, 2, 3}}, {{0}, {0, 1}, {1}}, 0);
  check_laws(g);
  REQUIRE(g.faces().face_count() == 1);
  REQUIRE(g.faces().orbit_length(0) == 4);
  REQUIRE(g.faces().boundary_weight(0) == 10);
}

TEST_CASE("boundary subpath weights by prefix difference") {
  PlaneGraph g = build_cycle({1, 2, 3, 4});
  const FaceTable& ft = g.faces();
  for (FaceId f = 0; f < ft.face_count(); ++f) {
    const std::int32_t len = ft.orbit_length(f);
    for (std::int32_t a = 0; a < len; ++a) {
      REQUIRE(g.boundary_subpath_weight(f, a, a, OrbitSide::Forward) == 0);
      REQUIRE(g.boundary_subpath_weight(f, a, a, OrbitSide::Backward) == 0);
      for (std::int32_t b = 0; b < len; ++b) {
        if (a == b) continue;
        // Oracle: walk the orbit dart by dart.
        Weight fwd = 0;
        for (std::int32_t p = a; p != b; p = (p + 1) % len) fwd += g.dart_weight(ft.orbit_dart(f, p));
        REQUIRE(g.boundary_subpath_weight(f, a, b, OrbitSide::Forward) == fwd);
        REQUIRE(g.boundary_subpath_weight(f, a, b, OrbitSide::Backward) ==
                ft.boundary_weight(f) - fwd);
        REQUIRE(g.boundary_subpath_weight(f, a, b, OrbitSide::Forward) +
                    g.boundary_subpath_weight(f, a, b, OrbitSide::Backward) ==
                ft.boundary_weight(f));
      }
    }
  }
  // The spec'd concrete case: weights 1,2,3,4 in orbit order, positions 0 -> 2.
  const FaceId f = g.faces().face_of(dart_forward(0));
  const std::int32_t p0 = g.faces().position_of(dart_forward(0));
  const std::int32_t p2 = (p0 + 2) % 4;
  REQUIRE(g.boundary_subpath_weight(f, p0, p2, OrbitSide::Forward) == 3);
  REQUIRE(g.boundary_subpath_weight(f, p0, p2, OrbitSide::Backward) == 7);
}

TEST_CASE("larger fixture obeys all permutation laws") {
  // 3x3 grid, hand-rolled rotations (clockwise: up, right, down, left).
  // Vertices r*3+c; horizontal edges id 0..5 (r*2+c), vertical id 6..11.
  std::vector<EdgeDef> edges;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c)
      edges.push_back(
          {static_cast<EdgeId>(r * 2 + c), static_cast<Vertex>(r * 3 + c), static_cast<Vertex>(r * 3 + c + 1), 1});
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c)
      edges.push_back(
          {static_cast<EdgeId>(6 + r * 3 + c), static_cast<Vertex>(r * 3 + c), static_cast<Vertex>((r + 1) * 3 + c), 1});
  std::vector<std::vector<EdgeId>> rot(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      std::vector<EdgeId> cw;
      if (r > 0) cw.push_back(6 + (r - 1) * 3 + c);  // up
      if (c < 2) cw.push_back(r * 2 + c);            // right
      if (r < 2) cw.push_back(6 + r * 3 + c);        // down
      if (c > 0) cw.push_back(r * 2 + c - 1);        // left
      rot[r * 3 + c] = cw;
    }
  PlaneGraph g = PlaneGraph::build(9, edges, rot, 0);
  check_laws(g);
  REQUIRE(g.faces().face_count() == 5);  // four grid cells plus the external face
}

TEST_CASE("determinism: identical input gives identical face tables") {
  PlaneGraph a = build_cycle({2, 7, 1, 9, 4});
  PlaneGraph b = build_cycle({2, 7, 1, 9, 4});
  REQUIRE(a.faces().face_count() == b.faces().face_count());
  for (DartId d = 0; d < a.dart_count(); ++d) {
    REQUIRE(a.faces().face_of(d) == b.faces().face_of(d));
    REQUIRE(a.faces().position_of(d) == b.faces().position_of(d));
  }
  const FaceTable re = a.trace_face_table();
  for (DartId d = 0; d < a.dart_count(); ++d) {
    REQUIRE(re.face_of(d) == a.faces().face_of(d));
    REQUIRE(re.position_of(d) == a.faces().position_of(d));
  }
}

TEST_CASE("external face designation follows the outer dart") {
  PlaneGraph g = build_cycle({1, 1, 1});
  REQUIRE(g.faces().external_face() == g.faces().face_of(g.outer_dart()));
  const DartId other = reverse(g.outer_dart());
  PlaneGraph h = PlaneGraph::build(
      3, {{0, 0, 1, 1}, {1, 1, 2, 1}, {2, 2, 0, 1}}, {{0, 2}, {0, 1}, {1, 2}}, other);
  REQUIRE(h.faces().external_face() == h.faces().face_of(other));
}

TEST_CASE("rejections: weights") {
  REQUIRE(error_code_of([] {
            PlaneGraph::build(2, {{0, 0, 1, 0}}, {{0}, {0}}, 0);
          }) == ErrorCode::NonPositiveWeight);
  REQUIRE(error_code_of([] {
            PlaneGraph::build(2, {{0, 0, 1, -3}}, {{0}, {0}}, 0);
          }) == ErrorCode::NonPositiveWeight);
  REQUIRE(error_code_of([] {
            PlaneGraph::build(2, {{0, 0, 1, (Weight{1} << 60) + 1}}, {{0}, {0}}, 0);
          }) == ErrorCode::WeightOverflow);
}

TEST_CASE("rejections: malformed rotations") {
  // Edge listed twice at one vertex, missing at the other.
  REQUIRE(error_code_of([] {
            PlaneGraph::build(2, {{0, 0, 1, 1}}, {{0, 0}, {}}, 0);
          }) == ErrorCode::BadRotation);
  // Edge absent from one endpoint's rotation.
  REQUIRE(error_code_of([] {
            PlaneGraph::build(3, {{0, 0, 1, 1}, {1, 1, 2, 1}}, {{0}, {0}, {1}}, 0);
          }) == ErrorCode::BadRotation);
  // Rotation mentions an edge not incident to the vertex.
  REQUIRE(error_code_of([] {
            PlaneGraph::build(3, {{0, 0, 1, 1}, {1, 1, 2, 1}}, {{0, 1}, {0}, {1}}, 0);
          }) == ErrorCode::BadRotation);
  // Self-loop.
  REQUIRE(error_code_of([] {
            PlaneGraph::build(1, {{0, 0, 0, 1}}, {{0, 0}}, 0);
          }) == ErrorCode::BadRotation);
}

TEST_CASE("rejections: disconnected input") {
  REQUIRE(error_code_of([] {
            PlaneGraph::build(4, {{0, 0, 1, 1}, {1, 2, 3, 1}}, {{0}, {0}, {1}, {1}}, 0);
          }) == ErrorCode::Disconnected);
}

TEST_CASE("rejections: embedding violating Euler's formula") {
  // Planar K4 (four faces) with one vertex's rotation reversed: the traced
  // embedding has the wrong genus.
  const std::vector<EdgeDef> edges = {{0, 0, 1, 1}, {1, 1, 2, 1}, {2, 2, 0, 1},
                                      {3, 0, 3, 1}, {4, 1, 3, 1}, {5, 2, 3, 1}};
  const std::vector<std::vector<EdgeId>> good = {{2, 3, 0}, {0, 4, 1}, {1, 5, 2}, {5, 4, 3}};
  PlaneGraph g = PlaneGraph::build(4, edges, good, 0);
  check_laws(g);
  REQUIRE(g.faces().face_count() == 4);
  std::vector<std::vector<EdgeId>> twisted = good;
  twisted[3] = {3, 4, 5};
  REQUIRE(error_code_of([&] {
            PlaneGraph::build(4, edges, twisted, 0);
          }) == ErrorCode::EulerViolation);
}
