#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "ncsp/instance.hpp"
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

// A clockwise ring of m vertices with pendant stubs attached outward at the
// given ring positions.  Stub j (in list order) gets vertex id m + j.  The
// external orbit visits stubs in increasing ring position, starting just
// after ring vertex 0.
PlaneGraph make_ring(Vertex m, const std::vector<Vertex>& stub_at) {
  std::vector<EdgeDef> edges;
  for (Vertex i = 0; i < m; ++i)
    edges.push_back({i, i, static_cast<Vertex>((i + 1) % m), 1});
  std::vector<EdgeId> stub_edge(m, -1);
  for (std::size_t j = 0; j < stub_at.size(); ++j) {
    const EdgeId id = static_cast<EdgeId>(m + j);
    edges.push_back({id, stub_at[j], static_cast<Vertex>(m + j), 1});
    stub_edge[stub_at[j]] = id;
  }
  std::vector<std::vector<EdgeId>> rot(m + stub_at.size());
  for (Vertex i = 0; i < m; ++i) {
    rot[i].push_back((i + m - 1) % m);                       // toward previous ring vertex
    if (stub_edge[i] >= 0) rot[i].push_back(stub_edge[i]);   // outward stub
    rot[i].push_back(i);                                     // toward next ring vertex
  }
  for (std::size_t j = 0; j < stub_at.size(); ++j) rot[m + j] = {static_cast<EdgeId>(m + j)};
  return PlaneGraph::build(static_cast<Vertex>(m + stub_at.size()), edges, rot,
                           dart_forward(0));
}

// Independent interleaving oracle: walk ring slots from a toward b and count
// which of {c, d} are passed.
bool interleaves(std::int32_t a, std::int32_t b, std::int32_t c, std::int32_t d, std::int32_t L) {
  int inside = 0;
  for (std::int32_t p = (a + 1) % L; p != b; p = (p + 1) % L)
    if (p == c || p == d) ++inside;
  return inside == 1;
}

// Structural invariants every prepared instance must satisfy.
void validate_prepared(const PreparedInstance& p) {
  if (p.k == 0) return;
  REQUIRE(p.parent[p.k - 1] == -1);
  std::vector<int> expected_first(p.k);
  for (int i = 0; i < p.k; ++i) {
    REQUIRE(p.s[i] != p.t[i]);
    REQUIRE(p.s_linear[i] < p.t_linear[i]);
    expected_first[i] = i;
    const int c0 = p.child[i][0], c1 = p.child[i][1];
    if (c1 >= 0) REQUIRE(c0 >= 0);  // single child sits in slot 0
    for (int c : p.child[i]) {
      if (c < 0) continue;
      REQUIRE(c < i);  // postorder
      REQUIRE(p.parent[c] == i);
      REQUIRE(p.s_linear[i] <= p.s_linear[c]);
      REQUIRE(p.t_linear[c] <= p.t_linear[i]);
      expected_first[i] = std::min(expected_first[i], expected_first[c]);
    }
    if (c0 >= 0 && c1 >= 0) REQUIRE(p.t_linear[c0] < p.s_linear[c1]);
    REQUIRE(p.first_desc[i] == expected_first[i]);
    if (p.is_aux[i]) {
      REQUIRE(p.input_index[i] == -1);
      REQUIRE(c0 >= 0);
      REQUIRE(c1 >= 0);
      REQUIRE(p.s[i] == p.s[c0]);
      REQUIRE(p.t[i] == p.t[c1]);
    } else {
      REQUIRE(p.input_index[i] >= 0);
    }
  }
  // Contiguous descendant ranges partition correctly.
  for (int i = 0; i < p.k; ++i)
    for (int z = 0; z < p.k; ++z) {
      bool anc = false;
      for (int w = z; w != -1; w = p.parent[w]) anc = anc || (w == i);
      REQUIRE(p.is_descendant(z, i) == anc);
    }
}

}  // namespace

TEST_CASE("terminals are located on the external orbit in clockwise order") {
  PlaneGraph g = make_ring(8, {0, 1, 2, 3});
  // Pairs reference stub vertices 8..11 at ring positions 0..3.
  TerminalPairs tp = locate_terminals(g, {{8, 9}, {10, 11}});
  REQUIRE(tp.orbit_len == 8 + 2 * 4);
  // Orbit starts just after ring vertex 0, so stub order is 1,2,3,0.
  REQUIRE(tp.boundary_sequence == std::vector<std::int32_t>{1, 2, 3, 0});
  for (int i = 0; i < 2; ++i)
    for (int s = 0; s < 2; ++s) {
      const TerminalInfo& ti = tp.pairs[i][s];
      REQUIRE(g.degree(ti.v) == 1);
      REQUIRE(g.faces().face_of(g.faces().orbit_dart(g.faces().external_face(), ti.exit_pos)) ==
              g.faces().external_face());
      REQUIRE(g.tail(g.faces().orbit_dart(g.faces().external_face(), ti.exit_pos)) == ti.v);
    }
  REQUIRE(check_wellformed(tp).ok);
  PreparedInstance p = prepare(g, {{8, 9}, {10, 11}});
  validate_prepared(p);
  REQUIRE(p.k == 2);
  REQUIRE(p.input_index == std::vector<int>{0, 1});
  REQUIRE(p.parent == std::vector<int>{1, -1});
}

TEST_CASE("nested pairs produce a chain genealogy with canonical orientation") {
  PlaneGraph g = make_ring(8, {0, 1, 2, 3, 4, 5});
  // stub vertices 8..13 at ring 0..5; pairs nest: (0,5), (1,4), (2,3).
  const std::vector<std::pair<Vertex, Vertex>> pairs = {{8, 13}, {9, 12}, {10, 11}};
  PreparedInstance p = prepare(g, pairs);
  validate_prepared(p);
  REQUIRE(p.k == 3);
  REQUIRE(p.k_input == 3);
  REQUIRE(p.input_index == std::vector<int>{0, 1, 2});
  REQUIRE(p.parent == std::vector<int>{1, 2, -1});
  REQUIRE(p.child[1] == std::array<int, 2>{0, -1});
  REQUIRE(p.first_desc == std::vector<int>{0, 0, 0});
  // The cut sits just past the innermost pair's first boundary terminal, so
  // every pair is oriented with its second input terminal as s.
  for (int i = 0; i < 3; ++i) {
    REQUIRE(p.swapped[i]);
    REQUIRE(p.s[i] == pairs[p.input_index[i]].second);
    REQUIRE(p.t[i] == pairs[p.input_index[i]].first);
  }
  REQUIRE(p.is_descendant(0, 2));
  REQUIRE(p.is_descendant(1, 2));
  REQUIRE_FALSE(p.is_descendant(2, 1));
}

TEST_CASE("four siblings are binarized with auxiliary pairs sharing terminals") {
  PlaneGraph g = make_ring(12, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  // stub vertex 12+j at ring position j.
  const auto sv = [](int ring_pos) { return static_cast<Vertex>(12 + ring_pos); };
  const std::vector<std::pair<Vertex, Vertex>> pairs = {
      {sv(0), sv(9)}, {sv(1), sv(2)}, {sv(3), sv(4)}, {sv(5), sv(6)}, {sv(7), sv(8)}};
  PreparedInstance p = prepare(g, pairs);
  validate_prepared(p);
  REQUIRE(p.k_input == 5);
  REQUIRE(p.k == 7);  // two auxiliary pairs fold four siblings into two
  REQUIRE(std::count(p.is_aux.begin(), p.is_aux.end(), 1) == 2);
  REQUIRE(p.input_index == std::vector<int>{2, 3, 4, 0, -1, -1, 1});
  REQUIRE(p.parent == std::vector<int>{6, 5, 4, 4, 5, 6, -1});
  REQUIRE(p.child[6] == std::array<int, 2>{0, 5});
  REQUIRE(p.child[5] == std::array<int, 2>{1, 4});
  REQUIRE(p.child[4] == std::array<int, 2>{2, 3});
  REQUIRE(p.first_desc == std::vector<int>{0, 1, 2, 3, 2, 1, 0});
  // Auxiliary terminals are shared vertices, not new ones.
  REQUIRE(p.s[5] == sv(5));
  REQUIRE(p.t[5] == sv(0));
  REQUIRE(p.s[4] == sv(7));
  REQUIRE(p.t[4] == sv(0));
  // Root is the reference pair: the first boundary-adjacent pair.
  REQUIRE(p.input_index[6] == 1);
  REQUIRE(p.s[6] == sv(2));
  REQUIRE(p.t[6] == sv(1));
}

TEST_CASE("interleaved pairs are rejected and named") {
  PlaneGraph g = make_ring(8, {0, 2, 4, 6});
  // stubs 8,9,10,11 at ring 0,2,4,6; pairs (8,10) and (9,11) cross.
  TerminalPairs tp = locate_terminals(g, {{8, 10}, {9, 11}});
  const WellformedVerdict v = check_wellformed(tp);
  REQUIRE_FALSE(v.ok);
  REQUIRE(v.pair_a == 0);
  REQUIRE(v.pair_b == 1);
  REQUIRE_FALSE(v.reason.empty());
  REQUIRE(error_code_of([&] { prepare(g, {{8, 10}, {9, 11}}); }) == ErrorCode::CrossingPairs);
}

TEST_CASE("terminal validation failures") {
  PlaneGraph g = make_ring(8, {0, 1});
  REQUIRE(error_code_of([&] { locate_terminals(g, {{8, 99}}); }) ==
          ErrorCode::ParameterOutOfRange);
  REQUIRE(error_code_of([&] { locate_terminals(g, {{8, 8}}); }) == ErrorCode::DuplicateTerminal);
  REQUIRE(error_code_of([&] {
            locate_terminals(g, {{8, 9}, {9, 8}});
          }) == ErrorCode::DuplicateTerminal);
  REQUIRE(error_code_of([&] { locate_terminals(g, {{8, 3}}); }) == ErrorCode::TerminalNotPendant);
}

TEST_CASE("a pendant vertex inside an inner face is not a terminal") {
  // Square ring with one stub pointing inward (vertex 4) and one outward (5).
  const std::vector<EdgeDef> edges = {{0, 0, 1, 1}, {1, 1, 2, 1}, {2, 2, 3, 1},
                                      {3, 3, 0, 1}, {4, 0, 4, 1}, {5, 2, 5, 1}};
  const std::vector<std::vector<EdgeId>> rot = {
      {3, 0, 4}, {0, 1}, {1, 5, 2}, {2, 3}, {4}, {5}};
  PlaneGraph g = PlaneGraph::build(6, edges, rot, dart_forward(0));
  REQUIRE(g.faces().face_count() == 2);
  REQUIRE(error_code_of([&] { locate_terminals(g, {{4, 5}}); }) ==
          ErrorCode::TerminalNotOnOuterFace);
  REQUIRE(error_code_of([&] { locate_terminals(g, {{5, 4}}); }) ==
          ErrorCode::TerminalNotOnOuterFace);
}

TEST_CASE("empty and single-pair instances") {
  PlaneGraph g = make_ring(6, {0, 3});
  PreparedInstance empty = prepare(g, {});
  REQUIRE(empty.k == 0);
  PreparedInstance one = prepare(g, {{6, 7}});
  validate_prepared(one);
  REQUIRE(one.k == 1);
  REQUIRE(one.parent[0] == -1);
  REQUIRE(one.child[0] == std::array<int, 2>{-1, -1});
  REQUIRE(check_wellformed(locate_terminals(g, {{6, 7}})).ok);
}

TEST_CASE("input orientation and order do not change the prepared structure") {
  PlaneGraph g = make_ring(8, {0, 1, 2, 3, 4, 5});
  const std::vector<std::pair<Vertex, Vertex>> base = {{8, 13}, {9, 12}, {10, 11}};
  std::vector<std::pair<Vertex, Vertex>> flipped = {{13, 8}, {12, 9}, {11, 10}};
  std::vector<std::pair<Vertex, Vertex>> reordered = {{10, 11}, {8, 13}, {9, 12}};
  const PreparedInstance a = prepare(g, base);
  const PreparedInstance b = prepare(g, flipped);
  const PreparedInstance c = prepare(g, reordered);
  validate_prepared(b);
  validate_prepared(c);
  REQUIRE(a.s == b.s);
  REQUIRE(a.t == b.t);
  REQUIRE(a.parent == b.parent);
  for (int i = 0; i < a.k; ++i) REQUIRE(a.swapped[i] != b.swapped[i]);
  REQUIRE(a.s == c.s);
  REQUIRE(a.t == c.t);
  REQUIRE(a.parent == c.parent);
  REQUIRE(c.input_index == std::vector<int>{1, 2, 0});
}

TEST_CASE("well-formedness agrees with a brute-force interleaving scan") {
  std::mt19937_64 rng(20260822);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 5);
    const Vertex m = static_cast<Vertex>(2 * k + 1 + static_cast<int>(rng() % 4));
    std::vector<Vertex> slots(m);
    for (Vertex i = 0; i < m; ++i) slots[i] = i;
    std::shuffle(slots.begin(), slots.end(), rng);
    std::vector<Vertex> stub_at(slots.begin(), slots.begin() + 2 * k);
    std::sort(stub_at.begin(), stub_at.end());
    PlaneGraph g = make_ring(m, stub_at);
    // Random pairing of the 2k stubs.
    std::vector<int> order(2 * k);
    for (int i = 0; i < 2 * k; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<Vertex, Vertex>> pairs;
    for (int i = 0; i < k; ++i)
      pairs.emplace_back(static_cast<Vertex>(m + order[2 * i]),
                         static_cast<Vertex>(m + order[2 * i + 1]));
    // Independent oracle on ring slot positions.
    bool any_cross = false;
    const auto slot_of = [&](Vertex terminal) {
      return static_cast<std::int32_t>(stub_at[terminal - m]);
    };
    for (int i = 0; i < k && !any_cross; ++i)
      for (int j = i + 1; j < k && !any_cross; ++j)
        any_cross = interleaves(slot_of(pairs[i].first), slot_of(pairs[i].second),
                                slot_of(pairs[j].first), slot_of(pairs[j].second), m);
    TerminalPairs tp = locate_terminals(g, pairs);
    const WellformedVerdict v = check_wellformed(tp);
    REQUIRE(v.ok == !any_cross);
    if (!v.ok) {
      REQUIRE(interleaves(slot_of(pairs[v.pair_a].first), slot_of(pairs[v.pair_a].second),
                          slot_of(pairs[v.pair_b].first), slot_of(pairs[v.pair_b].second), m));
      REQUIRE(error_code_of([&] { prepare(g, pairs); }) == ErrorCode::CrossingPairs);
    } else {
      validate_prepared(prepare(g, pairs));
    }
  }
}
