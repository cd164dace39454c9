#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <sstream>
#include <string>

#include "ncsp/io.hpp"

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

io::InstanceFile triangle_file() {
  io::InstanceFile f;
  f.vertex_count = 3;
  f.edges = {{0, 0, 1, 2}, {1, 1, 2, 3}, {2, 2, 0, 4}};
  f.rotations = {{0, 2}, {0, 1}, {1, 2}};
  f.outer_edge = 0;
  f.outer_tail = 1;  // dart 1->0, external orbit walks clockwise around the graph
  f.has_coordinates = true;
  f.coordinates = {{0, 0}, {2, 0}, {1, 2}};
  f.pairs = {{0, 2}};
  return f;
}

io::InstanceFile parse(const std::string& text) {
  std::istringstream in(text);
  return io::read_instance(in);
}

}  // namespace

TEST_CASE("write/read round trip preserves every field") {
  const io::InstanceFile f = triangle_file();
  std::ostringstream out;
  io::write_instance(out, f);
  const io::InstanceFile g = parse(out.str());
  REQUIRE(g.vertex_count == f.vertex_count);
  REQUIRE(g.edges.size() == f.edges.size());
  for (std::size_t i = 0; i < f.edges.size(); ++i) {
    REQUIRE(g.edges[i].id == f.edges[i].id);
    REQUIRE(g.edges[i].u == f.edges[i].u);
    REQUIRE(g.edges[i].v == f.edges[i].v);
    REQUIRE(g.edges[i].w == f.edges[i].w);
  }
  REQUIRE(g.rotations == f.rotations);
  REQUIRE(g.outer_edge == f.outer_edge);
  REQUIRE(g.outer_tail == f.outer_tail);
  REQUIRE(g.has_coordinates);
  for (Vertex v = 0; v < 3; ++v) {
    REQUIRE(g.coordinates[v].x == Catch::Approx(f.coordinates[v].x));
    REQUIRE(g.coordinates[v].y == Catch::Approx(f.coordinates[v].y));
  }
  REQUIRE(g.pairs == f.pairs);
  const PlaneGraph pg = g.build_graph();
  REQUIRE(pg.vertex_count() == 3);
  REQUIRE(pg.edge_count() == 3);
  REQUIRE(pg.tail(pg.outer_dart()) == 1);
}

TEST_CASE("serialization is byte-deterministic") {
  std::ostringstream a, b;
  io::write_instance(a, triangle_file());
  io::write_instance(b, triangle_file());
  REQUIRE(a.str() == b.str());
  REQUIRE_FALSE(a.str().empty());
}

TEST_CASE("comments and blank lines are ignored") {
  const io::InstanceFile f = parse(
      "# a full-line comment\n"
      "\n"
      "V 2   # trailing comment\n"
      "e 0 0 1 5\n"
      "R 0 0\n"
      "R 1 0\n"
      "O 0 0\n");
  REQUIRE(f.vertex_count == 2);
  REQUIRE(f.edges.size() == 1);
  REQUIRE(f.edges[0].w == 5);
  REQUIRE_FALSE(f.has_coordinates);
  REQUIRE(f.build_graph().faces().face_count() == 1);
}

TEST_CASE("parse rejections") {
  REQUIRE(error_code_of([] { parse(""); }) == ErrorCode::ParseError);  // missing V
  REQUIRE(error_code_of([] { parse("V 1\nV 1\n"); }) == ErrorCode::ParseError);
  REQUIRE(error_code_of([] { parse("V 2\nQ 1\n"); }) == ErrorCode::ParseError);  // unknown tag
  REQUIRE(error_code_of([] { parse("e 0 0 1 5\n"); }) == ErrorCode::ParseError);  // e before V
  REQUIRE(error_code_of([] { parse("V 2\ne 0 0 1\n"); }) == ErrorCode::ParseError);  // arity
  REQUIRE(error_code_of([] { parse("V 2\ne 0 0 1 nope\n"); }) == ErrorCode::ParseError);
  REQUIRE(error_code_of([] { parse("V 2\nR 0 0\nR 0 0\n"); }) == ErrorCode::ParseError);
  REQUIRE(error_code_of([] { parse("V 2\nR 5 0\n"); }) == ErrorCode::ParseError);
  REQUIRE(error_code_of([] { parse("V 1\nK 2\np 0 0\n"); }) == ErrorCode::ParseError);
  REQUIRE(error_code_of([] { parse("V 0\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("weight validation happens at parse time") {
  REQUIRE(error_code_of([] { parse("V 2\ne 0 0 1 0\n"); }) == ErrorCode::NonPositiveWeight);
  REQUIRE(error_code_of([] { parse("V 2\ne 0 0 1 -7\n"); }) == ErrorCode::NonPositiveWeight);
  REQUIRE(error_code_of([] {
            parse("V 2\ne 0 0 1 1152921504606846977\n");  // 2^60 + 1
          }) == ErrorCode::WeightOverflow);
}

TEST_CASE("external-dart record validation") {
  // Missing O record: detected when the graph is built, not at parse time.
  const io::InstanceFile no_o = parse("V 2\ne 0 0 1 5\nR 0 0\nR 1 0\n");
  REQUIRE(error_code_of([&] { no_o.build_graph(); }) == ErrorCode::ParseError);
  const io::InstanceFile bad_edge = parse("V 2\ne 0 0 1 5\nR 0 0\nR 1 0\nO 3 0\n");
  REQUIRE(error_code_of([&] { bad_edge.build_graph(); }) == ErrorCode::ParseError);
  const io::InstanceFile bad_tail = parse("V 3\ne 0 0 1 5\ne 1 1 2 5\nR 0 0\nR 1 0 1\nR 2 1\nO 0 2\n");
  REQUIRE(error_code_of([&] { bad_tail.build_graph(); }) == ErrorCode::ParseError);
}

TEST_CASE("file round trip through the filesystem") {
  const std::string path = "io_roundtrip_tmp.pg";
  io::write_instance_file(path, triangle_file());
  const io::InstanceFile g = io::read_instance_file(path);
  REQUIRE(g.vertex_count == 3);
  REQUIRE(g.pairs.size() == 1);
  std::remove(path.c_str());
  REQUIRE(error_code_of([] { io::read_instance_file("definitely_missing.pg"); }) ==
          ErrorCode::ParseError);
}
