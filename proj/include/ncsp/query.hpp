#pragma once
// Distance extraction and lazy path listing over an ImplicitPathSet.
//
// Distances: pairs are processed in index order (children before parents).  A
// pair's weight is the sum of its explicit segments plus, for every reference
// [c, d] into a child z, the difference w(λ_z) − w(λ_z[s_z, c]) − w(λ_z[d, t_z]).
// The two subtracted prefixes come from per-pair frontier walks that only ever
// move forward (from s_z) or backward (from t_z) across the whole pass, so
// each edge is stepped over at most once per direction on top of the one
// explicit-segment summation — at most three touches per edge in total.
//
// Listing: the dart sequence of one pair is rebuilt from the dart marks alone.
// At each vertex the successor is found among the marked outgoing darts,
// ordered clockwise starting after the reverse of the incoming dart, by binary
// search for the boundary between marks ≤ i (the path itself and everything
// settled no later, all lying weakly left) and marks > i.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "ncsp/error.hpp"
#include "ncsp/instance.hpp"
#include "ncsp/plane_graph.hpp"
#include "ncsp/solver.hpp"

namespace ncsp {

// All terminal-pair distances, reported per original input pair (auxiliary
// binarization pairs are internal and excluded).
struct DistanceReport {
  std::vector<Vertex> s, t;      // terminals in prepared orientation
  std::vector<Weight> dist;      // full path weight, terminal edges included
  std::vector<int> prepared;     // prepared pair index per input pair
  std::int64_t edge_touches = 0;       // total dart touches of the pass
  std::int32_t max_edge_touches = 0;   // worst single edge
};

// Furthest-visited frontier per pair and direction, with cumulative weights.
// Reused (never rewound) across a whole distance pass.
struct PrefixMemo {
  struct Side {
    int seg = 0;     // segments fully or partly consumed so far
    int pos = 0;     // darts consumed inside the current explicit segment
    Vertex at = -1;  // frontier vertex
    Weight w = 0;    // cumulative weight from the endpoint to `at`
  };
  std::vector<Side> from_s;  // forward walks, anchored at each pair's s
  std::vector<Side> from_t;  // backward walks, anchored at each pair's t
};

namespace detail {

class DistancePass {
 public:
  DistancePass(const ImplicitPathSet& ips, PrefixMemo& memo)
      : ips_(ips), g_(*ips.graph), memo_(memo) {
    const int k = ips.k;
    memo_.from_s.assign(static_cast<std::size_t>(k), PrefixMemo::Side{});
    memo_.from_t.assign(static_cast<std::size_t>(k), PrefixMemo::Side{});
    for (int i = 0; i < k; ++i) {
      memo_.from_s[static_cast<std::size_t>(i)].at = ips.paths[static_cast<std::size_t>(i)].s;
      memo_.from_t[static_cast<std::size_t>(i)].at = ips.paths[static_cast<std::size_t>(i)].t;
    }
    visits_.assign(static_cast<std::size_t>(g_.edge_count()), 0);
    dist_.assign(static_cast<std::size_t>(k), 0);
  }

  void run() {
    for (int i = 0; i < ips_.k; ++i) {
      Weight w = 0;
      for (const PathSegment& sg : ips_.paths[static_cast<std::size_t>(i)].segments) {
        if (sg.child < 0) {
          for (DartId d : sg.darts) {
            touch(edge_of(d));
            w = checked_add(w, g_.dart_weight(d));
          }
          continue;
        }
        if (sg.from == sg.to) continue;
        const Weight pre = advance_forward(sg.child, sg.from);
        const Weight suf = advance_backward(sg.child, sg.to);
        const Weight span = dist_[static_cast<std::size_t>(sg.child)] - pre - suf;
        require(span >= 0, ErrorCode::InternalInvariantViolation,
                "path reference span has negative weight");
        w = checked_add(w, span);
      }
      require(w == ips_.paths[static_cast<std::size_t>(i)].weight,
              ErrorCode::InternalInvariantViolation,
              "subtraction identity disagrees with the recorded path weight");
      dist_[static_cast<std::size_t>(i)] = w;
    }
  }

  Weight dist(int i) const { return dist_[static_cast<std::size_t>(i)]; }
  std::int64_t total_touches() const { return total_; }
  std::int32_t max_touches() const {
    std::int32_t mx = 0;
    for (std::int32_t c : visits_) mx = std::max(mx, c);
    return mx;
  }

 private:
  void touch(EdgeId e) {
    ++visits_[static_cast<std::size_t>(e)];
    ++total_;
  }

  // Move pair z's forward frontier to vertex v (which lies on z's path at or
  // after the frontier) and return the cumulative prefix weight w(λ_z[s_z, v]).
  Weight advance_forward(int z, Vertex v) {
    PrefixMemo::Side& S = memo_.from_s[static_cast<std::size_t>(z)];
    while (S.at != v) step_forward(z);
    return S.w;
  }

  Weight advance_backward(int z, Vertex v) {
    PrefixMemo::Side& S = memo_.from_t[static_cast<std::size_t>(z)];
    while (S.at != v) step_backward(z);
    return S.w;
  }

  // Advance pair z's forward frontier by one dart, descending through nested
  // references; returns the dart for the callers' own bookkeeping.
  DartId step_forward(int z) {
    PrefixMemo::Side& S = memo_.from_s[static_cast<std::size_t>(z)];
    const auto& segs = ips_.paths[static_cast<std::size_t>(z)].segments;
    while (true) {
      require(S.seg < static_cast<int>(segs.size()), ErrorCode::InternalInvariantViolation,
              "forward walk ran past the end of a path");
      const PathSegment& sg = segs[static_cast<std::size_t>(S.seg)];
      if (sg.child < 0) {
        if (S.pos >= static_cast<int>(sg.darts.size())) {
          ++S.seg;
          S.pos = 0;
          continue;
        }
        const DartId d = sg.darts[static_cast<std::size_t>(S.pos++)];
        touch(edge_of(d));
        S.w = checked_add(S.w, g_.dart_weight(d));
        S.at = g_.head(d);
        return d;
      }
      if (sg.from == sg.to || memo_.from_s[static_cast<std::size_t>(sg.child)].at == sg.to) {
        ++S.seg;
        S.pos = 0;
        continue;
      }
      const DartId d = step_forward(sg.child);
      S.w = checked_add(S.w, g_.dart_weight(d));
      S.at = g_.head(d);
      return d;
    }
  }

  DartId step_backward(int z) {
    PrefixMemo::Side& S = memo_.from_t[static_cast<std::size_t>(z)];
    const auto& segs = ips_.paths[static_cast<std::size_t>(z)].segments;
    while (true) {
      require(S.seg < static_cast<int>(segs.size()), ErrorCode::InternalInvariantViolation,
              "backward walk ran past the start of a path");
      const PathSegment& sg = segs[segs.size() - 1 - static_cast<std::size_t>(S.seg)];
      if (sg.child < 0) {
        if (S.pos >= static_cast<int>(sg.darts.size())) {
          ++S.seg;
          S.pos = 0;
          continue;
        }
        const DartId d = sg.darts[sg.darts.size() - 1 - static_cast<std::size_t>(S.pos++)];
        touch(edge_of(d));
        S.w = checked_add(S.w, g_.dart_weight(d));
        S.at = g_.tail(d);
        return d;
      }
      if (sg.from == sg.to || memo_.from_t[static_cast<std::size_t>(sg.child)].at == sg.from) {
        ++S.seg;
        S.pos = 0;
        continue;
      }
      const DartId d = step_backward(sg.child);
      S.w = checked_add(S.w, g_.dart_weight(d));
      S.at = g_.tail(d);
      return d;
    }
  }

  const ImplicitPathSet& ips_;
  const PlaneGraph& g_;
  PrefixMemo& memo_;
  std::vector<std::int32_t> visits_;  // per edge
  std::vector<Weight> dist_;          // per prepared pair
  std::int64_t total_ = 0;
};

}  // namespace detail

// Compute every original pair's distance from the implicit representation.
// Pass a PrefixMemo to inspect the frontier state the pass left behind.
inline DistanceReport all_distances(const ImplicitPathSet& ips, PrefixMemo* memo_out = nullptr) {
  require(ips.graph != nullptr && ips.prepared != nullptr, ErrorCode::ParameterOutOfRange,
          "distance query needs a solver result bound to its graph and instance");
  PrefixMemo local;
  PrefixMemo& memo = memo_out ? *memo_out : local;
  detail::DistancePass pass(ips, memo);
  pass.run();
  DistanceReport rep;
  const int ki = ips.k_input;
  rep.s.assign(static_cast<std::size_t>(ki), -1);
  rep.t.assign(static_cast<std::size_t>(ki), -1);
  rep.dist.assign(static_cast<std::size_t>(ki), 0);
  rep.prepared.assign(static_cast<std::size_t>(ki), -1);
  for (int i = 0; i < ips.k; ++i) {
    const int j = ips.prepared->input_index[static_cast<std::size_t>(i)];
    if (j < 0) continue;
    require(j < ki && rep.prepared[static_cast<std::size_t>(j)] == -1,
            ErrorCode::InternalInvariantViolation, "input pair mapping is not a bijection");
    rep.prepared[static_cast<std::size_t>(j)] = i;
    rep.s[static_cast<std::size_t>(j)] = ips.paths[static_cast<std::size_t>(i)].s;
    rep.t[static_cast<std::size_t>(j)] = ips.paths[static_cast<std::size_t>(i)].t;
    rep.dist[static_cast<std::size_t>(j)] = pass.dist(i);
  }
  for (int j = 0; j < ki; ++j)
    require(rep.prepared[static_cast<std::size_t>(j)] != -1, ErrorCode::InternalInvariantViolation,
            "input pair missing from the prepared instance");
  rep.edge_touches = pass.total_touches();
  rep.max_edge_touches = pass.max_touches();
  return rep;
}

struct ListStats {
  std::int64_t probes = 0;    // mark comparisons inside binary searches
  std::int64_t darts = 0;     // darts emitted
};

// Mark-based successor search structure.  Building it costs one sweep over the
// rotation system; each list_path call then runs in O(max{ℓ, ℓ·log(k/ℓ)}).
class QueryIndex {
 public:
  explicit QueryIndex(const ImplicitPathSet& ips) : ips_(ips), g_(*ips.graph) {
    require(ips.graph != nullptr, ErrorCode::ParameterOutOfRange,
            "path listing needs a solver result bound to its graph");
    const Vertex n = g_.vertex_count();
    rotpos_.assign(static_cast<std::size_t>(g_.dart_count()), -1);
    vstart_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (Vertex v = 0; v < n; ++v) {
      std::int32_t p = 0;
      for (const DartId* it = g_.darts_begin(v); it != g_.darts_end(v); ++it, ++p) {
        rotpos_[static_cast<std::size_t>(*it)] = p;
        if (ips_.mark[static_cast<std::size_t>(*it)] != kNoMark)
          ++vstart_[static_cast<std::size_t>(v) + 1];
      }
    }
    for (Vertex v = 0; v < n; ++v)
      vstart_[static_cast<std::size_t>(v) + 1] += vstart_[static_cast<std::size_t>(v)];
    const std::int32_t total = vstart_[static_cast<std::size_t>(n)];
    mdart_.resize(static_cast<std::size_t>(total));
    mrp_.resize(static_cast<std::size_t>(total));
    mmark_.resize(static_cast<std::size_t>(total));
    std::vector<std::int32_t> fill(vstart_.begin(), vstart_.end() - 1);
    for (Vertex v = 0; v < n; ++v) {
      for (const DartId* it = g_.darts_begin(v); it != g_.darts_end(v); ++it) {
        if (ips_.mark[static_cast<std::size_t>(*it)] == kNoMark) continue;
        const std::int32_t at = fill[static_cast<std::size_t>(v)]++;
        mdart_[static_cast<std::size_t>(at)] = *it;
        mrp_[static_cast<std::size_t>(at)] = rotpos_[static_cast<std::size_t>(*it)];
        mmark_[static_cast<std::size_t>(at)] = ips_.mark[static_cast<std::size_t>(*it)];
      }
    }
  }

  // Darts of pair i in order, reconstructed from marks alone.
  std::vector<DartId> list_path(int i, ListStats* stats = nullptr) const {
    require(i >= 0 && i < ips_.k, ErrorCode::UnknownPair, "pair index out of range");
    require(ips_.prepared != nullptr, ErrorCode::ParameterOutOfRange,
            "path listing needs the prepared instance for the pair genealogy");
    ListStats local;
    ListStats& st = stats ? *stats : local;
    const Vertex s = ips_.paths[static_cast<std::size_t>(i)].s;
    const Vertex t = ips_.paths[static_cast<std::size_t>(i)].t;
    require(g_.degree(s) == 1, ErrorCode::InternalInvariantViolation,
            "source terminal is not pendant");
    DartId d = *g_.darts_begin(s);  // the terminal edge fixes the first dart
    std::vector<DartId> out{d};
    std::int64_t budget = g_.vertex_count();
    while (g_.head(d) != t) {
      require(--budget >= 0, ErrorCode::InternalInvariantViolation,
              "listing walked more darts than any simple path can hold");
      d = successor(i, g_.head(d), d, st);
      out.push_back(d);
    }
    st.darts += static_cast<std::int64_t>(out.size());
    return out;
  }

  // Every original pair's darts, in input order.
  std::vector<std::vector<DartId>> list_all(ListStats* stats = nullptr) const {
    require(ips_.prepared != nullptr, ErrorCode::ParameterOutOfRange,
            "input-order listing needs the prepared instance");
    std::vector<std::vector<DartId>> out(static_cast<std::size_t>(ips_.k_input));
    for (int i = 0; i < ips_.k; ++i) {
      const int j = ips_.prepared->input_index[static_cast<std::size_t>(i)];
      if (j >= 0) out[static_cast<std::size_t>(j)] = list_path(i, stats);
    }
    return out;
  }

 private:
  // Successor of the path of pair i at vertex v, arriving along din: among the
  // marked outgoing darts ordered clockwise after reverse(din), the last one
  // owned by pair i or one of its descendants.  Ownership indices of the pairs
  // below i form the contiguous block [first_desc(i), i], and every dart those
  // pairs ever stepped lies weakly left of the final path of i, so the owned
  // candidates form a prefix of the clockwise order ending exactly at the
  // outgoing path dart; everything after it belongs to pairs outside the block.
  DartId successor(int i, Vertex v, DartId din, ListStats& st) const {
    const int fd = ips_.prepared->first_desc[static_cast<std::size_t>(i)];
    const std::int32_t b = vstart_[static_cast<std::size_t>(v)];
    const std::int32_t e = vstart_[static_cast<std::size_t>(v) + 1];
    const std::int32_t r = e - b;
    require(r > 0, ErrorCode::InternalInvariantViolation,
            "no marked darts at vertex " + std::to_string(v) + " while listing pair " +
                std::to_string(i));
    const std::int32_t ap = rotpos_[static_cast<std::size_t>(reverse(din))];
    const auto first = mrp_.begin() + b;
    const auto last = mrp_.begin() + e;
    // Cyclic domain starts at the first rotation position after the anchor and
    // excludes the anchor dart itself (an immediate U-turn is never simple).
    const std::int32_t base = static_cast<std::int32_t>(std::upper_bound(first, last, ap) - first);
    const bool anchor_in = std::binary_search(first, last, ap);
    const std::int32_t len = r - (anchor_in ? 1 : 0);
    require(len > 0, ErrorCode::InternalInvariantViolation,
            "no marked continuation at vertex " + std::to_string(v) + " while listing pair " +
                std::to_string(i));
    const auto owned_at = [&](std::int32_t pos) {
      const std::int32_t m = mmark_[static_cast<std::size_t>(b + (base + pos) % r)];
      return m >= fd && m <= i;
    };
    ++st.probes;
    require(owned_at(0), ErrorCode::InternalInvariantViolation,
            "ownership boundary lies before every candidate at vertex " + std::to_string(v) +
                " while listing pair " + std::to_string(i));
    std::int32_t lo = 0, hi = len - 1;
    while (lo < hi) {
      const std::int32_t mid = lo + (hi - lo + 1) / 2;
      ++st.probes;
      if (owned_at(mid))
        lo = mid;
      else
        hi = mid - 1;
    }
    return mdart_[static_cast<std::size_t>(b + (base + lo) % r)];
  }

  const ImplicitPathSet& ips_;
  const PlaneGraph& g_;
  std::vector<std::int32_t> rotpos_;  // per dart: index within its tail's rotation
  std::vector<std::int32_t> vstart_;  // per vertex: slice of the marked arrays
  std::vector<DartId> mdart_;         // marked outgoing darts, rotation order
  std::vector<std::int32_t> mrp_;     // their rotation positions (ascending per vertex)
  std::vector<std::int32_t> mmark_;   // their marks
};

inline std::vector<DartId> list_path(const ImplicitPathSet& ips, int i,
                                     ListStats* stats = nullptr) {
  return QueryIndex(ips).list_path(i, stats);
}

inline std::vector<std::vector<DartId>> list_all(const ImplicitPathSet& ips,
                                                 ListStats* stats = nullptr) {
  return QueryIndex(ips).list_all(stats);
}

}  // namespace ncsp
