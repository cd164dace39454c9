#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ncsp/error.hpp"
#include "ncsp/plane_graph.hpp"

namespace ncsp::io {

// On-disk description of a plane graph plus terminal pairs ("ncsp-pg v1").
// One record per line, '#' starts a comment:
//   V n                     vertex count
//   e id u v w              edge with weight
//   R v e1 e2 ... ek        clockwise rotation at v
//   O edge_id tail_vertex   dart designating the external face orbit
//   c v x y                 optional coordinates (rendering only)
//   K k                     number of terminal pairs
//   p s t                   one terminal pair
struct InstanceFile {
  Vertex vertex_count = 0;
  std::vector<EdgeDef> edges;
  std::vector<std::vector<EdgeId>> rotations;
  EdgeId outer_edge = -1;
  Vertex outer_tail = -1;
  std::vector<Coord> coordinates;  // empty if absent
  bool has_coordinates = false;
  std::vector<std::pair<Vertex, Vertex>> pairs;

  PlaneGraph build_graph() const {
    require(outer_edge >= 0, ErrorCode::ParseError, "missing O record (external face dart)");
    require(outer_edge < static_cast<EdgeId>(edges.size()), ErrorCode::ParseError,
            "O record references unknown edge");
    // Resolve the outer dart from (edge, tail) once endpoints are known.
    const EdgeDef* def = nullptr;
    for (const EdgeDef& e : edges)
      if (e.id == outer_edge) def = &e;
    require(def != nullptr, ErrorCode::ParseError, "O record references unknown edge");
    DartId outer;
    if (def->u == outer_tail) {
      outer = dart_forward(outer_edge);
    } else if (def->v == outer_tail) {
      outer = dart_backward(outer_edge);
    } else {
      fail(ErrorCode::ParseError, "O record tail vertex is not an endpoint of the edge");
    }
    return PlaneGraph::build(vertex_count, edges, rotations, outer,
                             has_coordinates ? coordinates : std::vector<Coord>{});
  }
};

namespace detail {

inline std::int64_t parse_int(const std::string& tok, const char* what, int line_no) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError,
         std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
  }
}

inline double parse_double(const std::string& tok, const char* what, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError,
         std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
  }
}

}  // namespace detail

inline InstanceFile read_instance(std::istream& in) {
  InstanceFile f;
  bool have_v = false;
  std::int64_t declared_pairs = -1;
  std::string line;
  int line_no = 0;
  std::vector<bool> rotation_seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    auto want = [&](std::size_t n) {
      require(toks.size() == n, ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": record '" + tag + "' expects " +
                  std::to_string(n) + " fields");
    };
    if (tag == "V") {
      want(1);
      require(!have_v, ErrorCode::ParseError, "duplicate V record");
      const std::int64_t n = detail::parse_int(toks[0], "vertex count", line_no);
      require(n >= 1 && n <= (std::int64_t{1} << 31) - 1, ErrorCode::ParseError,
              "vertex count out of range");
      f.vertex_count = static_cast<Vertex>(n);
      f.rotations.assign(f.vertex_count, {});
      rotation_seen.assign(f.vertex_count, false);
      f.coordinates.assign(f.vertex_count, Coord{0, 0});
      have_v = true;
    } else if (tag == "e") {
      want(4);
      require(have_v, ErrorCode::ParseError, "e record before V");
      EdgeDef e;
      e.id = static_cast<EdgeId>(detail::parse_int(toks[0], "edge id", line_no));
      e.u = static_cast<Vertex>(detail::parse_int(toks[1], "endpoint", line_no));
      e.v = static_cast<Vertex>(detail::parse_int(toks[2], "endpoint", line_no));
      e.w = detail::parse_int(toks[3], "weight", line_no);
      require(e.w > 0, ErrorCode::NonPositiveWeight,
              "line " + std::to_string(line_no) + ": edge weight must be positive");
      require(e.w <= kMaxEdgeWeight, ErrorCode::WeightOverflow,
              "line " + std::to_string(line_no) + ": edge weight exceeds 2^60");
      f.edges.push_back(e);
    } else if (tag == "R") {
      require(have_v, ErrorCode::ParseError, "R record before V");
      require(!toks.empty(), ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": empty rotation");
      const Vertex v = static_cast<Vertex>(detail::parse_int(toks[0], "vertex", line_no));
      require(v >= 0 && v < f.vertex_count, ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": rotation vertex out of range");
      require(!rotation_seen[v], ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": duplicate rotation for vertex");
      rotation_seen[v] = true;
      for (std::size_t i = 1; i < toks.size(); ++i)
        f.rotations[v].push_back(
            static_cast<EdgeId>(detail::parse_int(toks[i], "edge id", line_no)));
    } else if (tag == "O") {
      want(2);
      f.outer_edge = static_cast<EdgeId>(detail::parse_int(toks[0], "edge id", line_no));
      f.outer_tail = static_cast<Vertex>(detail::parse_int(toks[1], "vertex", line_no));
    } else if (tag == "c") {
      want(3);
      require(have_v, ErrorCode::ParseError, "c record before V");
      const Vertex v = static_cast<Vertex>(detail::parse_int(toks[0], "vertex", line_no));
      require(v >= 0 && v < f.vertex_count, ErrorCode::ParseError,
              "line " + std::to_string(line_no) + ": coordinate vertex out of range");
      f.coordinates[v] = Coord{detail::parse_double(toks[1], "coordinate", line_no),
                               detail::parse_double(toks[2], "coordinate", line_no)};
      f.has_coordinates = true;
    } else if (tag == "K") {
      want(1);
      declared_pairs = detail::parse_int(toks[0], "pair count", line_no);
      require(declared_pairs >= 0, ErrorCode::ParseError, "negative pair count");
    } else if (tag == "p") {
      want(2);
      f.pairs.emplace_back(static_cast<Vertex>(detail::parse_int(toks[0], "terminal", line_no)),
                           static_cast<Vertex>(detail::parse_int(toks[1], "terminal", line_no)));
    } else {
      fail(ErrorCode::ParseError,
           "line " + std::to_string(line_no) + ": unknown record '" + tag + "'");
    }
  }
  require(have_v, ErrorCode::ParseError, "missing V record");
  if (declared_pairs >= 0)
    require(declared_pairs == static_cast<std::int64_t>(f.pairs.size()), ErrorCode::ParseError,
            "K record disagrees with number of p records");
  return f;
}

inline InstanceFile read_instance_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ParseError, "cannot open '" + path + "'");
  return read_instance(in);
}

inline void write_instance(std::ostream& out, const InstanceFile& f) {
  out << "# ncsp-pg v1\n";
  out << "V " << f.vertex_count << "\n";
  for (const EdgeDef& e : f.edges)
    out << "e " << e.id << " " << e.u << " " << e.v << " " << e.w << "\n";
  for (Vertex v = 0; v < f.vertex_count; ++v) {
    out << "R " << v;
    for (EdgeId e : f.rotations[v]) out << " " << e;
    out << "\n";
  }
  out << "O " << f.outer_edge << " " << f.outer_tail << "\n";
  if (f.has_coordinates)
    for (Vertex v = 0; v < f.vertex_count; ++v)
      out << "c " << v << " " << f.coordinates[v].x << " " << f.coordinates[v].y << "\n";
  out << "K " << f.pairs.size() << "\n";
  for (const auto& [s, t] : f.pairs) out << "p " << s << " " << t << "\n";
}

inline void write_instance_file(const std::string& path, const InstanceFile& f) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::ParseError, "cannot open '" + path + "' for writing");
  write_instance(out, f);
  require(out.good(), ErrorCode::ParseError, "write to '" + path + "' failed");
}

}  // namespace ncsp::io
