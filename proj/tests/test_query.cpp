#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ncsp/instance.hpp"
#include "ncsp/plane_graph.hpp"
#include "ncsp/query.hpp"
#include "ncsp/solver.hpp"
#include "ncsp/testkit.hpp"

using namespace ncsp;

namespace {

// Probe allowance for listing one path of l darts among k pairs.
double probe_budget(std::size_t l, int k) {
  const double ld = static_cast<double>(l);
  const double ratio = std::max(2.0, 2.0 * static_cast<double>(k) / ld);
  return 4.0 * std::max(ld, ld * std::log2(ratio) + ld);
}

// Distances, listings and instrumentation bounds every instance must satisfy.
void check_queries(const PlaneGraph& g, const PreparedInstance& prep, const ImplicitPathSet& r,
                   const std::vector<Weight>& truth) {
  PrefixMemo memo;
  const DistanceReport rep = all_distances(r, &memo);
  REQUIRE(rep.dist.size() == truth.size());
  for (std::size_t j = 0; j < truth.size(); ++j) {
    CHECK(rep.dist[j] == truth[j]);
    const int i = rep.prepared[j];
    CHECK(rep.s[j] == prep.s[i]);
    CHECK(rep.t[j] == prep.t[i]);
  }
  CHECK(rep.max_edge_touches <= 4);
  // Memo frontiers re-walk consistently from both endpoints.
  for (int z = 0; z < r.k; ++z) {
    const std::vector<DartId> darts = r.materialize(z);
    {
      Weight w = 0;
      Vertex at = prep.s[z];
      std::size_t p = 0;
      while (at != memo.from_s[z].at) {
        REQUIRE(p < darts.size());
        w += g.dart_weight(darts[p]);
        at = g.head(darts[p]);
        ++p;
      }
      CHECK(memo.from_s[z].w == w);
    }
    {
      Weight w = 0;
      Vertex at = prep.t[z];
      std::size_t p = darts.size();
      while (at != memo.from_t[z].at) {
        REQUIRE(p > 0);
        --p;
        w += g.dart_weight(darts[p]);
        at = g.tail(darts[p]);
      }
      CHECK(memo.from_t[z].w == w);
    }
  }
  // Listing reproduces every pair (auxiliary ones included) exactly.
  const QueryIndex qi(r);
  for (int i = 0; i < r.k; ++i) {
    ListStats st;
    const std::vector<DartId> listed = qi.list_path(i, &st);
    CHECK(listed == r.materialize(i));
    CHECK(st.darts == static_cast<std::int64_t>(listed.size()));
    CHECK(static_cast<double>(st.probes) <= probe_budget(listed.size(), r.k));
  }
  // Batched listing returns input order.
  ListStats all;
  const std::vector<std::vector<DartId>> seqs = qi.list_all(&all);
  REQUIRE(seqs.size() == truth.size());
  for (std::size_t j = 0; j < truth.size(); ++j) {
    CHECK(seqs[j] == r.materialize(rep.prepared[j]));
    CHECK(testkit::path_weight(g, seqs[j]) == truth[j]);
  }
}

ImplicitPathSet solve_checked(const PlaneGraph& g, const PreparedInstance& prep) {
  SolverOptions opt;
  opt.check_level = 1;
  return solve_noncrossing(g, prep, opt);
}

}  // namespace

TEST_CASE("distances and listing on a two-edge chain") {
  std::vector<EdgeDef> edges{{0, 0, 1, 2}, {1, 1, 2, 3}};
  std::vector<std::vector<EdgeId>> rot{{0}, {0, 1}, {1}};
  const PlaneGraph g = PlaneGraph::build(3, edges, rot, dart_forward(0));
  const PreparedInstance prep = prepare(g, {{0, 2}});
  const ImplicitPathSet r = solve_checked(g, prep);

  check_queries(g, prep, r, {5});

  const DistanceReport rep = all_distances(r);
  CHECK(rep.dist == std::vector<Weight>{5});
  // One explicit segment, no references: each edge is touched exactly once.
  CHECK(rep.edge_touches == 2);
  CHECK(rep.max_edge_touches == 1);

  // The single interior vertex needs exactly one probe (one candidate).
  ListStats st;
  const std::vector<DartId> listed = list_path(r, 0, &st);
  CHECK(listed == r.materialize(0));
  CHECK(st.probes == 1);
}

TEST_CASE("listing follows the settled side of a tied square") {
  std::vector<EdgeDef> edges{
      {0, 0, 1, 1}, {1, 1, 2, 1}, {2, 2, 3, 1}, {3, 3, 0, 1}, {4, 4, 0, 1}, {5, 2, 5, 1},
  };
  std::vector<std::vector<EdgeId>> rot{{4, 0, 3}, {0, 1}, {1, 5, 2}, {2, 3}, {4}, {5}};
  const PlaneGraph g = PlaneGraph::build(6, edges, rot, dart_forward(4));
  const PreparedInstance prep = prepare(g, {{4, 5}});
  const ImplicitPathSet r = solve_checked(g, prep);

  check_queries(g, prep, r, {4});
  // Marks from the abandoned u-side stay behind; the mark boundary still
  // steers the listing onto the settled v-side.
  const std::vector<DartId> listed = list_path(r, 0);
  CHECK(testkit::path_vertices(g, listed) == std::vector<Vertex>{4, 0, 3, 2, 5});
}

TEST_CASE("hexagon-triangle union distances and listings") {
  const testkit::GeneratedInstance gi =
      testkit::union_of_shortest_paths(testkit::gen_fig1(), 7);
  const PlaneGraph g = gi.file.build_graph();
  const PreparedInstance prep = prepare(g, gi.file.pairs);
  const ImplicitPathSet r = solve_checked(g, prep);

  check_queries(g, prep, r, gi.truth_dist);
  const std::vector<std::vector<DartId>> seqs = list_all(r);
  REQUIRE(seqs.size() == 3);
  for (const auto& sq : seqs) CHECK(sq.size() == 3);
}

TEST_CASE("reference spanning a whole child collapses to its total weight") {
  // Two nested pairs over one corridor: the outer pair rides the entire inner
  // path, so the outer skeleton's reference spans the child end to end and the
  // frontier walks never move.
  //
  //   s1-a-b-c-t1 in a row, s0 pendant at a, t0 pendant at c; outer terminals
  //   s1,t1 attach outside, and a cheap row a-b-c is the only middle route.
  std::vector<EdgeDef> edges{
      {0, 0, 1, 1},  // s0-a
      {1, 1, 2, 1},  // a-b
      {2, 2, 3, 1},  // b-c
      {3, 3, 4, 1},  // c-t0
      {4, 5, 1, 1},  // s1-a
      {5, 3, 6, 1},  // c-t1
  };
  std::vector<std::vector<EdgeId>> rot{
      {0},           // s0
      {0, 4, 1},     // a: s0, s1, b (clockwise)
      {1, 2},        // b
      {2, 5, 3},     // c: b, t1, t0
      {3},           // t0
      {4},           // s1
      {5},           // t1
  };
  const PlaneGraph g = PlaneGraph::build(7, edges, rot, dart_forward(0));
  const PreparedInstance prep = prepare(g, {{0, 4}, {5, 6}});
  const ImplicitPathSet r = solve_checked(g, prep);

  PrefixMemo memo;
  const DistanceReport rep = all_distances(r, &memo);
  CHECK(rep.dist == std::vector<Weight>{4, 4});
  CHECK(rep.max_edge_touches <= 4);
  // The parent references the child's interior; whichever pair is the child,
  // its two frontier walks stand where the parent's reference endpoints are.
  const int outer = prep.parent[0] == 1 ? 1 : 0;
  const int inner = 1 - outer;
  bool has_ref = false;
  for (const PathSegment& sg : r.paths[outer].segments) has_ref = has_ref || sg.child == inner;
  CHECK(has_ref);
  check_queries(g, prep, r, {4, 4});
}

TEST_CASE("unknown pair indices are rejected") {
  std::vector<EdgeDef> edges{{0, 0, 1, 2}, {1, 1, 2, 3}};
  std::vector<std::vector<EdgeId>> rot{{0}, {0, 1}, {1}};
  const PlaneGraph g = PlaneGraph::build(3, edges, rot, dart_forward(0));
  const PreparedInstance prep = prepare(g, {{0, 2}});
  const ImplicitPathSet r = solve_checked(g, prep);

  const QueryIndex qi(r);
  for (int bad : {-1, r.k, r.k + 5}) {
    try {
      qi.list_path(bad);
      FAIL("out-of-range pair index was accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownPair);
    }
  }
}

TEST_CASE("generated grids: queries agree with construction") {
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
    for (int k = 1; k <= 4; ++k) {
      DYNAMIC_SECTION("seed " << seed << " k " << k) {
        const testkit::GeneratedInstance gi =
            testkit::union_of_shortest_paths(testkit::gen_grid(4, 5, k, seed), seed);
        const PlaneGraph g = gi.file.build_graph();
        const PreparedInstance prep = prepare(g, gi.file.pairs);
        const ImplicitPathSet r = solve_checked(g, prep);
        check_queries(g, prep, r, gi.truth_dist);
      }
    }
  }
}

TEST_CASE("deep genealogies: queries resolve nested references") {
  for (std::uint64_t seed : {41ULL, 42ULL, 43ULL, 44ULL, 45ULL}) {
    DYNAMIC_SECTION("seed " << seed) {
      const testkit::GeneratedInstance gi =
          testkit::union_of_shortest_paths(testkit::gen_grid(6, 8, 8, seed), seed);
      const PlaneGraph g = gi.file.build_graph();
      const PreparedInstance prep = prepare(g, gi.file.pairs);
      const ImplicitPathSet r = solve_checked(g, prep);
      check_queries(g, prep, r, gi.truth_dist);
    }
  }
}

TEST_CASE("cheap corridors: queries under heavy path sharing") {
  testkit::GenOptions gopt;
  gopt.cheap_band = true;
  for (std::uint64_t seed : {51ULL, 52ULL, 53ULL, 54ULL}) {
    for (int k : {3, 6}) {
      DYNAMIC_SECTION("seed " << seed << " k " << k) {
        const testkit::GeneratedInstance gi =
            testkit::union_of_shortest_paths(testkit::gen_grid(5, 9, k, seed, gopt), seed);
        const PlaneGraph g = gi.file.build_graph();
        const PreparedInstance prep = prepare(g, gi.file.pairs);
        const ImplicitPathSet r = solve_checked(g, prep);
        check_queries(g, prep, r, gi.truth_dist);
      }
    }
  }
}

TEST_CASE("unit triangulations: queries across many tied pairs") {
  testkit::GenOptions gopt;
  gopt.unit_weights = true;
  for (std::uint64_t seed : {61ULL, 62ULL, 63ULL}) {
    DYNAMIC_SECTION("seed " << seed) {
      const testkit::GeneratedInstance gi = testkit::union_of_shortest_paths(
          testkit::gen_random_triangulation(18, 6, seed, gopt), seed);
      const PlaneGraph g = gi.file.build_graph();
      const PreparedInstance prep = prepare(g, gi.file.pairs);
      const ImplicitPathSet r = solve_checked(g, prep);
      check_queries(g, prep, r, gi.truth_dist);
    }
  }
}
