#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ncsp/error.hpp"
#include "ncsp/plane_graph.hpp"

namespace ncsp {

// One terminal located on the external face orbit.  exit_pos is the orbit
// position of the dart leaving the pendant terminal (the second half of the
// boundary walk's U-turn at it).
struct TerminalInfo {
  Vertex v = -1;
  std::int32_t exit_pos = -1;
};

// Terminal pairs with their external-orbit positions, still in input order
// and input orientation.
struct TerminalPairs {
  const PlaneGraph* graph = nullptr;
  std::vector<std::array<TerminalInfo, 2>> pairs;  // [0]=first input terminal, [1]=second
  std::int32_t orbit_len = 0;
  // Terminal occurrences in orbit order starting at outer_dart: encoded as
  // pair_index * 2 + side (side 0/1 = input order slot).
  std::vector<std::int32_t> boundary_sequence;
};

struct WellformedVerdict {
  bool ok = true;
  int pair_a = -1;  // crossing pair indices (input numbering) when !ok
  int pair_b = -1;
  std::string reason;
};

// Orientation of the instance around the chosen reference cut on the
// external orbit.  Linear positions count forward from the cut, so every
// pair satisfies s_linear < t_linear and no walk interval wraps the cut.
struct Orientation {
  int istar = -1;                 // input index of the reference pair
  std::int32_t cut_pos = -1;      // orbit position right after istar's terminal U-turn
  EdgeId e_star = -1;             // edge at the cut position (diagnostic)
  std::vector<char> swapped;      // per input pair: true if (s,t) were exchanged
  std::vector<Vertex> s, t;       // oriented terminals per input pair
  std::vector<std::int32_t> s_linear, t_linear;  // linear positions of exit darts
};

// Nesting tree of the oriented walk intervals, one node per pair (auxiliary
// pairs included after binarization).  Node order is input order until
// postorder_renumber produces the final processing order.
struct GenealogyTree {
  int k_input = 0;                     // original pair count
  std::vector<int> parent;             // -1 at the root
  std::vector<std::vector<int>> children;  // ordered: nearest the pair's s first
  std::vector<char> is_aux;            // added by binarization
  std::vector<Vertex> s, t;            // terminal vertices per node
  std::vector<std::int32_t> s_linear, t_linear;
  std::vector<int> input_index;        // -1 for auxiliary nodes
  int root = -1;
};

// Fully prepared, binarized, postorder-renumbered instance for the solver.
struct PreparedInstance {
  const PlaneGraph* graph = nullptr;
  int k_input = 0;
  int k = 0;  // nodes after binarization; processing order = index order
  std::vector<Vertex> s, t;
  std::vector<int> parent;                    // -1 at root (= k-1)
  std::vector<std::array<int, 2>> child;      // [near-s, near-t]; -1 absent; single child in [0]
  std::vector<int> first_desc;                // descendants of i = [first_desc[i] .. i]
  std::vector<char> is_aux;
  std::vector<int> input_index;               // -1 for auxiliary pairs
  std::vector<char> swapped;                  // vs. input orientation (originals only)
  std::vector<std::int32_t> s_linear, t_linear;
  std::int32_t cut_pos = -1;
  EdgeId e_star = -1;

  bool is_descendant(int z, int i) const { return z >= first_desc[i] && z <= i; }
};

inline TerminalPairs locate_terminals(const PlaneGraph& g,
                                      const std::vector<std::pair<Vertex, Vertex>>& pairs) {
  TerminalPairs tp;
  tp.graph = &g;
  const FaceTable& ft = g.faces();
  const FaceId fext = ft.external_face();
  tp.orbit_len = ft.orbit_length(fext);

  std::unordered_map<Vertex, std::int32_t> owner;  // vertex -> pair*2+side
  owner.reserve(pairs.size() * 2);
  tp.pairs.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vertex vs[2] = {pairs[i].first, pairs[i].second};
    for (int side = 0; side < 2; ++side) {
      const Vertex v = vs[side];
      require(v >= 0 && v < g.vertex_count(), ErrorCode::ParameterOutOfRange,
              "terminal vertex " + std::to_string(v) + " does not exist");
      require(owner.emplace(v, static_cast<std::int32_t>(i) * 2 + side).second,
              ErrorCode::DuplicateTerminal,
              "vertex " + std::to_string(v) + " used as terminal more than once");
      require(g.degree(v) == 1, ErrorCode::TerminalNotPendant,
              "terminal " + std::to_string(v) + " must be pendant (degree 1)");
      const DartId exit = *g.darts_begin(v);
      require(ft.face_of(exit) == fext, ErrorCode::TerminalNotOnOuterFace,
              "terminal " + std::to_string(v) + " is not on the external face");
      tp.pairs[i][side] = TerminalInfo{v, ft.position_of(exit)};
    }
  }
  // Orbit-order occurrence list: walk the external orbit once.
  const std::int32_t base = ft.orbit_begin(fext);
  for (std::int32_t p = 0; p < tp.orbit_len; ++p) {
    const DartId d = ft.orbit_storage()[base + p];
    const auto it = owner.find(g.tail(d));
    if (it != owner.end()) tp.boundary_sequence.push_back(it->second);
  }
  return tp;
}

namespace detail {

// Does the cyclic forward arc (a -> b) on a cycle of length L contain x?
inline bool arc_contains(std::int32_t a, std::int32_t b, std::int32_t x, std::int32_t L) {
  const std::int32_t fb = (b - a + L) % L;
  const std::int32_t fx = (x - a + L) % L;
  return fx > 0 && fx < fb;
}

// Cyclic interleaving test of two terminal pairs by orbit positions.
inline bool pairs_interleave(std::int32_t a1, std::int32_t a2, std::int32_t b1, std::int32_t b2,
                             std::int32_t L) {
  return arc_contains(a1, a2, b1, L) != arc_contains(a1, a2, b2, L);
}

// Index (into boundary_sequence) of the first cyclically-adjacent occurrence
// of two terminals of the same pair, or -1.
inline int find_adjacent_same_pair(const TerminalPairs& tp) {
  const auto& seq = tp.boundary_sequence;
  const int n = static_cast<int>(seq.size());
  for (int i = 0; i < n; ++i)
    if (seq[i] / 2 == seq[(i + 1) % n] / 2) return i;
  return -1;
}

inline WellformedVerdict crossing_by_scan(const TerminalPairs& tp) {
  WellformedVerdict v;
  const int k = static_cast<int>(tp.pairs.size());
  for (int i = 0; i < k && v.ok; ++i)
    for (int j = i + 1; j < k && v.ok; ++j)
      if (pairs_interleave(tp.pairs[i][0].exit_pos, tp.pairs[i][1].exit_pos,
                           tp.pairs[j][0].exit_pos, tp.pairs[j][1].exit_pos, tp.orbit_len)) {
        v.ok = false;
        v.pair_a = i;
        v.pair_b = j;
        v.reason = "terminal pairs " + std::to_string(i) + " and " + std::to_string(j) +
                   " interleave on the external face";
      }
  return v;
}

}  // namespace detail

// Deterministically choose the reference pair (first pair with two adjacent
// terminals scanning the orbit from outer_dart), place the cut just past its
// terminal U-turn, and orient every pair so its walk interval avoids the cut.
inline Orientation choose_istar_and_orient(const TerminalPairs& tp) {
  Orientation o;
  const int k = static_cast<int>(tp.pairs.size());
  if (k == 0) return o;
  const int adj = detail::find_adjacent_same_pair(tp);
  if (adj < 0) {
    const WellformedVerdict v = detail::crossing_by_scan(tp);
    require(!v.ok, ErrorCode::InternalInvariantViolation,
            "no reference pair found yet no crossing detected");
    fail(ErrorCode::CrossingPairs, v.reason);
  }
  const auto& seq = tp.boundary_sequence;
  const std::int32_t code = seq[adj];
  o.istar = code / 2;
  const TerminalInfo& before_cut = tp.pairs[o.istar][code % 2];
  const std::int32_t L = tp.orbit_len;
  o.cut_pos = (before_cut.exit_pos + 1) % L;
  const FaceTable& ft = tp.graph->faces();
  o.e_star = edge_of(ft.orbit_dart(ft.external_face(), o.cut_pos));

  o.swapped.assign(k, 0);
  o.s.resize(k);
  o.t.resize(k);
  o.s_linear.resize(k);
  o.t_linear.resize(k);
  for (int i = 0; i < k; ++i) {
    const std::int32_t l0 = (tp.pairs[i][0].exit_pos - o.cut_pos + L) % L;
    const std::int32_t l1 = (tp.pairs[i][1].exit_pos - o.cut_pos + L) % L;
    const bool swap = l1 < l0;
    o.swapped[i] = swap;
    const TerminalInfo& si = tp.pairs[i][swap ? 1 : 0];
    const TerminalInfo& ti = tp.pairs[i][swap ? 0 : 1];
    o.s[i] = si.v;
    o.t[i] = ti.v;
    o.s_linear[i] = swap ? l1 : l0;
    o.t_linear[i] = swap ? l0 : l1;
  }
  return o;
}

// Laminar-family check: walk intervals must nest or be disjoint, never
// interleave.  Returns a verdict naming a crossing pair instead of throwing.
inline WellformedVerdict check_wellformed(const TerminalPairs& tp) {
  WellformedVerdict v;
  const int k = static_cast<int>(tp.pairs.size());
  if (k <= 1) return v;
  if (detail::find_adjacent_same_pair(tp) < 0) return detail::crossing_by_scan(tp);
  const Orientation o = choose_istar_and_orient(tp);
  // Sweep terminals in linear order with a parenthesis stack.
  std::vector<std::pair<std::int32_t, std::int32_t>> events;  // (linear pos, ±(pair+1))
  events.reserve(2 * k);
  for (int i = 0; i < k; ++i) {
    events.emplace_back(o.s_linear[i], i + 1);
    events.emplace_back(o.t_linear[i], -(i + 1));
  }
  std::sort(events.begin(), events.end());
  std::vector<int> stack;
  for (const auto& [pos, signed_id] : events) {
    if (signed_id > 0) {
      stack.push_back(signed_id - 1);
    } else {
      const int i = -signed_id - 1;
      require(!stack.empty(), ErrorCode::InternalInvariantViolation, "unbalanced terminal sweep");
      if (stack.back() != i) {
        v.ok = false;
        v.pair_a = std::min(stack.back(), i);
        v.pair_b = std::max(stack.back(), i);
        v.reason = "terminal pairs " + std::to_string(v.pair_a) + " and " +
                   std::to_string(v.pair_b) + " interleave on the external face";
        return v;
      }
      stack.pop_back();
    }
  }
  return v;
}

// Build the nesting tree from the oriented intervals (parenthesis matching).
// Throws CrossingPairs on ill-formed input.
inline GenealogyTree build_genealogy(const TerminalPairs& tp, const Orientation& o) {
  GenealogyTree g;
  const int k = static_cast<int>(tp.pairs.size());
  g.k_input = k;
  g.parent.assign(k, -1);
  g.children.assign(k, {});
  g.is_aux.assign(k, 0);
  g.s = o.s;
  g.t = o.t;
  g.s_linear = o.s_linear;
  g.t_linear = o.t_linear;
  g.input_index.resize(k);
  for (int i = 0; i < k; ++i) g.input_index[i] = i;
  if (k == 0) return g;

  std::vector<std::pair<std::int32_t, std::int32_t>> events;
  events.reserve(2 * k);
  for (int i = 0; i < k; ++i) {
    events.emplace_back(o.s_linear[i], i + 1);
    events.emplace_back(o.t_linear[i], -(i + 1));
  }
  std::sort(events.begin(), events.end());
  std::vector<int> stack;
  for (const auto& [pos, signed_id] : events) {
    if (signed_id > 0) {
      const int i = signed_id - 1;
      if (!stack.empty()) {
        g.parent[i] = stack.back();
        g.children[stack.back()].push_back(i);
      } else {
        require(g.root == -1, ErrorCode::CrossingPairs,
                "terminal pairs do not nest under a single outermost pair");
        g.root = i;
      }
      stack.push_back(i);
    } else {
      const int i = -signed_id - 1;
      require(!stack.empty() && stack.back() == i, ErrorCode::CrossingPairs,
              "terminal pairs " + std::to_string(stack.empty() ? -1 : stack.back()) + " and " +
                  std::to_string(i) + " interleave on the external face");
      stack.pop_back();
    }
  }
  require(g.root == o.istar, ErrorCode::InternalInvariantViolation,
          "reference pair is not the nesting root");
  return g;
}

// Give every node at most two children by folding children 2..r under fresh
// auxiliary pairs.  An auxiliary pair shares its s with its first child's s
// and its t with its last child's t.
inline GenealogyTree binarize(GenealogyTree g) {
  for (int i = 0; i < static_cast<int>(g.children.size()); ++i) {
    // (children vectors may grow as we append aux nodes; index loop is safe.)
    while (g.children[i].size() > 2) {
      std::vector<int> kids = std::move(g.children[i]);
      const int aux = static_cast<int>(g.parent.size());
      g.parent.push_back(i);
      g.children.push_back(std::vector<int>(kids.begin() + 1, kids.end()));
      g.is_aux.push_back(1);
      g.s.push_back(g.s[kids[1]]);
      g.t.push_back(g.t[kids.back()]);
      g.s_linear.push_back(g.s_linear[kids[1]]);
      g.t_linear.push_back(g.t_linear[kids.back()]);
      g.input_index.push_back(-1);
      for (std::size_t c = 1; c < kids.size(); ++c) g.parent[kids[c]] = aux;
      g.children[i] = {kids[0], aux};
      // The aux node may itself have >2 children; the outer loop reaches it
      // later because aux > i.
    }
  }
  return g;
}

// Renumber nodes so processing order (index order) is a postorder traversal,
// children before parents, siblings in stored (near-s first) order.
inline PreparedInstance postorder_renumber(const GenealogyTree& g, const PlaneGraph& graph,
                                           const Orientation& o) {
  PreparedInstance p;
  p.graph = &graph;
  p.k_input = g.k_input;
  p.k = static_cast<int>(g.parent.size());
  p.cut_pos = o.cut_pos;
  p.e_star = o.e_star;
  if (p.k == 0) return p;

  std::vector<int> order;  // old indices in postorder
  order.reserve(p.k);
  std::vector<int> new_of(p.k, -1);
  {
    // Iterative postorder: push (node, child-cursor).
    std::vector<std::pair<int, std::size_t>> st;
    st.emplace_back(g.root, 0);
    while (!st.empty()) {
      auto& [node, cur] = st.back();
      if (cur < g.children[node].size()) {
        const int c = g.children[node][cur++];
        st.emplace_back(c, 0);
      } else {
        order.push_back(node);
        st.pop_back();
      }
    }
  }
  require(static_cast<int>(order.size()) == p.k, ErrorCode::InternalInvariantViolation,
          "postorder traversal missed nodes");
  for (int r = 0; r < p.k; ++r) new_of[order[r]] = r;

  p.s.resize(p.k);
  p.t.resize(p.k);
  p.parent.assign(p.k, -1);
  p.child.assign(p.k, {-1, -1});
  p.first_desc.assign(p.k, 0);
  p.is_aux.resize(p.k);
  p.input_index.resize(p.k);
  p.swapped.assign(p.k, 0);
  p.s_linear.resize(p.k);
  p.t_linear.resize(p.k);
  for (int old = 0; old < p.k; ++old) {
    const int ni = new_of[old];
    p.s[ni] = g.s[old];
    p.t[ni] = g.t[old];
    p.parent[ni] = g.parent[old] < 0 ? -1 : new_of[g.parent[old]];
    p.is_aux[ni] = g.is_aux[old];
    p.input_index[ni] = g.input_index[old];
    if (g.input_index[old] >= 0) p.swapped[ni] = o.swapped[g.input_index[old]];
    p.s_linear[ni] = g.s_linear[old];
    p.t_linear[ni] = g.t_linear[old];
    require(g.children[old].size() <= 2, ErrorCode::InternalInvariantViolation,
            "binarization left a node with more than two children");
    for (std::size_t c = 0; c < g.children[old].size(); ++c)
      p.child[ni][c] = new_of[g.children[old][c]];
  }
  for (int i = 0; i < p.k; ++i) {
    p.first_desc[i] = i;
    for (int c : p.child[i])
      if (c >= 0) p.first_desc[i] = std::min(p.first_desc[i], p.first_desc[c]);
    for (int c : p.child[i])
      require(c < 0 || c < i, ErrorCode::InternalInvariantViolation,
              "postorder property violated");
  }
  return p;
}

// Whole pipeline: locate, validate, orient, build, binarize, renumber.
inline PreparedInstance prepare(const PlaneGraph& g,
                                const std::vector<std::pair<Vertex, Vertex>>& pairs) {
  TerminalPairs tp = locate_terminals(g, pairs);
  if (pairs.empty()) {
    PreparedInstance p;
    p.graph = &g;
    return p;
  }
  const WellformedVerdict v = check_wellformed(tp);
  require(v.ok, ErrorCode::CrossingPairs, v.reason);
  const Orientation o = choose_istar_and_orient(tp);
  GenealogyTree tree = binarize(build_genealogy(tp, o));
  return postorder_renumber(tree, g, o);
}

}  // namespace ncsp
