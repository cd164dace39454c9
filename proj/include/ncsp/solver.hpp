#pragma once
// Core engine: given a plane graph U that is the union of shortest paths for a
// prepared (laminar) family of terminal pairs, build an implicit
// representation of the rightmost system of pairwise non-crossing,
// single-touch shortest paths.
//
// Processing runs in postorder over the pair-genealogy.  Each pair's path is
// built in three phases:
//   1. a left-hugging walk from s to t that adopts already-built descendant
//      paths by reference ("chunks") instead of re-walking them,
//   2. a commit step that splices adopted ranges (path nodes and frontier-list
//      ranges) into the pair's own structures and prices the chunks,
//   3. a saturation loop that repeatedly applies weight-decreasing (or tying)
//      replacements along face boundaries until no face to the right of the
//      path admits one, which makes the path the rightmost shortest path.
//
// The output is a set of skeletons (at most a handful of segments per pair,
// each segment either explicit darts or a reference into a child's path),
// plus the dart marks that the query layer uses to list any path lazily.

#include <array>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ncsp/error.hpp"
#include "ncsp/instance.hpp"
#include "ncsp/plane_graph.hpp"

namespace ncsp {

inline constexpr std::int32_t kNoMark = std::numeric_limits<std::int32_t>::max();

struct SolveStats {
  std::int64_t darts_visited = 0;    // dart touches across walk/frontier/saturation
  std::int64_t faces_tested = 0;     // boundary weight tests
  std::int64_t shortcuts_applied = 0;
  std::int64_t fresh_darts = 0;      // darts settled outside adopted ranges
  std::int64_t adoptions = 0;
  std::int64_t excised_darts = 0;
  std::int64_t events_processed = 0;
};

// One element of a finished pair's skeleton.
struct PathSegment {
  int child = -1;             // -1: explicit darts; else a prepared pair index
  std::vector<DartId> darts;  // explicit segments only
  Weight weight = 0;
  Vertex from = -1, to = -1;  // segment endpoints (from == to for empty refs)
};

struct PairPath {
  std::vector<PathSegment> segments;  // ordered s -> t in prepared orientation
  Weight weight = 0;
  Vertex s = -1, t = -1;              // terminal tips
};

struct SolverOptions {
  bool record_initial_paths = false;  // keep each pair's pre-saturation path
  bool record_frontiers = false;      // keep each pair's surviving frontier darts
  int check_level = -1;               // -1: read NCSP_CHECK; 0: fast; 1: full
};

class ImplicitPathSet {
 public:
  int k = 0;        // prepared pair count (auxiliary included)
  int k_input = 0;  // original input pair count
  std::vector<PairPath> paths;       // by prepared index
  std::vector<std::int32_t> mark;    // per dart: first-using pair, or kNoMark
  SolveStats stats;
  const PlaneGraph* graph = nullptr;
  const PreparedInstance* prepared = nullptr;

  // Optional debug captures (see SolverOptions).  `frontiers[i]` holds pair
  // i's surviving left-candidate darts; each vertex's fan stays clockwise but
  // the order between fans of different vertices is unspecified.
  std::vector<std::vector<DartId>> initial_paths;
  std::vector<std::vector<DartId>> frontiers;
  std::vector<char> sealed_edges;

  // Expand pair i into its full dart sequence (test/render helper; listing
  // queries use the marks instead).
  std::vector<DartId> materialize(int i) const {
    require(i >= 0 && i < k, ErrorCode::UnknownPair, "pair index out of range");
    std::vector<DartId> out;
    emit_pair(i, [&](DartId d) { out.push_back(d); });
    return out;
  }

  template <class Sink>
  void emit_pair(int i, Sink&& sink) const {
    // Type-erase once so the recursive slice expansion is a single function.
    const std::function<void(DartId)> fn = [&sink](DartId d) { sink(d); };
    for (const PathSegment& sg : paths[i].segments) {
      if (sg.child < 0) {
        for (DartId d : sg.darts) fn(d);
      } else {
        emit_slice(sg.child, sg.from, sg.to, fn);
      }
    }
  }

 private:
  // Emit the darts of pair z's portion between vertices a and b (a path
  // subrange; empty when a == b).
  void emit_slice(int z, Vertex a, Vertex b, const std::function<void(DartId)>& sink) const {
    if (a == b) return;
    bool emitting = false;
    bool done = false;
    slice_walk(z, a, b, emitting, done, sink);
    require(done, ErrorCode::InternalInvariantViolation,
            "path reference does not match the referenced path");
  }

  void slice_walk(int z, Vertex a, Vertex b, bool& emitting, bool& done,
                  const std::function<void(DartId)>& sink) const {
    auto feed = [&](DartId d) {
      if (done) return;
      const Vertex t = graph->tail(d);
      if (!emitting && t == a) emitting = true;
      if (emitting && t == b) {
        done = true;
        return;
      }
      if (emitting) sink(d);
    };
    for (const PathSegment& sg : paths[z].segments) {
      if (done) return;
      if (sg.child < 0) {
        for (DartId d : sg.darts) {
          feed(d);
          if (done) return;
        }
      } else {
        bool em2 = false;
        bool dn2 = false;
        if (sg.from != sg.to) slice_walk(sg.child, sg.from, sg.to, em2, dn2, feed);
      }
    }
    // The slice may close exactly at the end of the walk (b == final head).
    if (!done && emitting && !paths[z].segments.empty()) {
      if (end_vertex(z) == b) done = true;
    }
  }

  Vertex end_vertex(int z) const { return paths[z].t; }
};

class Solver {
 public:
  Solver(const PlaneGraph& g, const PreparedInstance& inst, SolverOptions opt = {})
      : g_(g), ft_(g.faces()), inst_(inst), opt_(opt), k_(inst.k) {
    if (opt_.check_level < 0) {
      const char* lv = std::getenv("NCSP_CHECK");
      full_check_ = (lv != nullptr && std::string(lv) == "full");
    } else {
      full_check_ = opt_.check_level >= 1;
    }
    const std::int32_t nd = g_.dart_count();
    rot_pos_.assign(nd, 0);
    for (Vertex v = 0; v < g_.vertex_count(); ++v) {
      std::int32_t idx = 0;
      for (const DartId* p = g_.darts_begin(v); p != g_.darts_end(v); ++p) rot_pos_[*p] = idx++;
    }
    dart_node_.assign(nd, {-1, -1});
    mark_.assign(nd, kNoMark);
    sealed_.assign(g_.edge_count(), 0);
    tip_pair_of_edge_.assign(g_.edge_count(), -1);
    for (int i = 0; i < k_; ++i) {
      for (Vertex tip : {inst_.s[i], inst_.t[i]}) {
        require(g_.degree(tip) == 1, ErrorCode::TerminalNotPendant,
                "terminal is not a pendant vertex");
        tip_pair_of_edge_[edge_of(*g_.darts_begin(tip))] = i;
      }
    }
    stamp_.assign(g_.vertex_count(), Stamp{});
    wseen_.assign(g_.vertex_count(), 0);
    fstate_.assign(ft_.face_count(), FaceState{});
    ps_.assign(k_, PairState{});
  }

  ImplicitPathSet solve() {
    ImplicitPathSet out;
    out.k = k_;
    out.k_input = inst_.k_input;
    out.graph = &g_;
    out.prepared = &inst_;
    out.paths.resize(k_);
    if (opt_.record_initial_paths) out.initial_paths.resize(k_);
    if (opt_.record_frontiers) out.frontiers.resize(k_);
    for (int i = 0; i < k_; ++i) {
      run_walk(i);
      commit(i);
      if (opt_.record_initial_paths) out.initial_paths[i] = collect_live_darts(i);
      saturate(i);
      finalize_pair(i, out.paths[i]);
      if (opt_.record_frontiers) out.frontiers[i] = collect_frontier(i);
      if (full_check_) full_check_pair(i, out);
    }
    // Dart ownership must respect the genealogy: every dart a pair's final
    // path spells out explicitly belongs to that pair or one of its
    // descendants.  A transient probe from an unrelated earlier pair can have
    // claimed such a dart first, so restamp those; referenced spans already
    // carry their owners' stamps from the earlier rounds of this loop.
    for (int i = 0; i < k_; ++i) {
      for (const PathSegment& sg : out.paths[i].segments) {
        if (sg.child >= 0) continue;
        for (const DartId d : sg.darts) {
          std::int32_t& m = mark_[static_cast<std::size_t>(d)];
          if (m < inst_.first_desc[i] || m > i) m = i;
        }
      }
    }
    out.mark = mark_;
    if (opt_.record_frontiers) out.sealed_edges = sealed_;
    out.stats = stats_;
    return out;
  }

 private:
  // ---------------------------------------------------------------- storage
  enum NodeKind : std::int8_t { kDartNode = 0, kRefBegin = 1, kRefEnd = 2 };

  struct PathNode {
    DartId dart = -1;  // kDartNode
    int prev = -1, next = -1;
    int gen = 0;
    std::int8_t kind = kDartNode;
    bool alive = false;
    int owner = -1;       // pair that created the node (never rewritten)
    int twin = -1;        // marker partner
    int child = -1;       // referenced pair (markers)
    Weight ref_w = 0;     // weight of the referenced portion (begin markers)
    Vertex ref_from = -1, ref_to = -1;
    int lgb = -1, lge = -1;  // frontier group of this node's head vertex
  };

  struct FNode {
    DartId dart = -1;
    int prev = -1, next = -1;
    bool alive = false;
  };

  struct FrontierList {
    int head = -1, tail = -1;
  };
  struct NodeList {
    int head = -1, tail = -1;
  };

  struct PairState {
    NodeList P;       // live path
    FrontierList L;   // live frontier
    Weight weight = 0;
    bool built = false;
    bool adopted = false;
  };

  struct Stamp {
    int pair = -1;
    int node = -1;  // node whose dart enters the vertex; -1 for a start tip
    int gen = 0;
  };

  struct Run {
    std::int32_t start = 0;  // orbit position (cyclic)
    std::int32_t len = 0;
    Weight w = 0;
  };
  struct FaceState {
    int active_for = -1;
    int retired_for = -1;
    std::vector<Run> runs;
  };

  // Pending boundary test: dart `dart` of the current path borders face `face`
  // on its right; `node`/`gen` pin the path occurrence that caused it.
  struct Shortcut {
    FaceId face = -1;
    DartId dart = -1;
    int node = -1;
    int gen = 0;
  };

  // Adoption recorded during a walk; made physical at commit.
  struct RefRec {
    int child = -1;
    Vertex c = -1, d = -1;
    int c_entry = -1;     // child's node entering c (-1: from the child's start)
    int d_node = -1;      // child's node entering d (-1: empty chunk)
    DartId din_mine = -1; // my arrival dart at c (-1 when my path starts here)
    int enter_node = -1;  // node on MY path entering c (group owner; -1 at start)
    int my_prev = -1;     // my path node after which the chunk is spliced
    int l_after = -1;     // my frontier node after which the kept range goes
  };

  struct WalkElem {
    bool is_ref = false;
    int pnode = -1;    // fresh node (is_ref == false)
    DartId din_before = -1;
    Stamp old_stamp;   // stamp of the head vertex before this step
  };

  const PlaneGraph& g_;
  const FaceTable& ft_;
  const PreparedInstance& inst_;
  SolverOptions opt_;
  int k_ = 0;
  bool full_check_ = false;

  std::vector<std::int32_t> rot_pos_;
  std::vector<std::array<int, 2>> dart_node_;
  std::vector<std::int32_t> mark_;
  std::vector<char> sealed_;
  std::vector<int> tip_pair_of_edge_;
  std::vector<Stamp> stamp_;
  std::vector<int> wseen_;
  int wepoch_ = 0;
  std::vector<FaceState> fstate_;
  std::vector<PairState> ps_;

  std::vector<PathNode> pn_;
  std::vector<int> pn_free_;
  std::vector<FNode> fn_;
  std::vector<int> fn_free_;

  std::deque<Shortcut> queue_;
  SolveStats stats_;

  // Walk frame (valid while building one pair).
  int cur_pair_ = -1;
  Vertex cur_ = -1;
  DartId din_ = -1;
  DartId resume_after_ = -1;
  std::vector<RefRec> refs_;
  std::vector<WalkElem> wstack_;

  // ------------------------------------------------------------- primitives
  [[noreturn]] void violate(const std::string& what) const {
    fail(ErrorCode::InternalInvariantViolation, what);
  }

  int pnode_alloc() {
    int id;
    if (!pn_free_.empty()) {
      id = pn_free_.back();
      pn_free_.pop_back();
      const int gen = pn_[id].gen;
      pn_[id] = PathNode{};
      pn_[id].gen = gen;
    } else {
      id = static_cast<int>(pn_.size());
      pn_.emplace_back();
    }
    pn_[id].alive = true;
    return id;
  }

  void pnode_free(int id) {
    PathNode& n = pn_[id];
    if (n.kind == kDartNode && n.dart >= 0) unregister_dart(n.dart, id);
    n.alive = false;
    n.gen++;
    n.prev = n.next = -1;
    pn_free_.push_back(id);
  }

  void register_dart(DartId d, int node) {
    auto& slots = dart_node_[d];
    for (int& s : slots) {
      if (s == -1 || !pn_[s].alive || pn_[s].dart != d) {
        s = node;
        return;
      }
    }
    violate("more than two live paths traverse one dart");
  }

  void unregister_dart(DartId d, int node) {
    for (int& s : dart_node_[d])
      if (s == node) s = -1;
  }

  // Live node for dart d created by a pair in desc-range [lo, hi].
  int path_node_of(DartId d, int lo, int hi) const {
    for (int s : dart_node_[d]) {
      if (s != -1 && pn_[s].alive && pn_[s].dart == d && pn_[s].owner >= lo && pn_[s].owner <= hi)
        return s;
    }
    return -1;
  }

  int fnode_alloc(DartId d) {
    int id;
    if (!fn_free_.empty()) {
      id = fn_free_.back();
      fn_free_.pop_back();
    } else {
      id = static_cast<int>(fn_.size());
      fn_.emplace_back();
    }
    fn_[id] = FNode{};
    fn_[id].dart = d;
    fn_[id].alive = true;
    return id;
  }

  void list_append(NodeList& ls, int id) {
    pn_[id].prev = ls.tail;
    pn_[id].next = -1;
    if (ls.tail != -1)
      pn_[ls.tail].next = id;
    else
      ls.head = id;
    ls.tail = id;
  }

  // Unlink [a..b] from ls without freeing.
  void list_cut(NodeList& ls, int a, int b) {
    const int p = pn_[a].prev;
    const int q = pn_[b].next;
    if (p != -1)
      pn_[p].next = q;
    else
      ls.head = q;
    if (q != -1)
      pn_[q].prev = p;
    else
      ls.tail = p;
    pn_[a].prev = -1;
    pn_[b].next = -1;
  }

  // Insert chain [a..b] (already linked) after `pos` (-1: at head).
  void list_insert_after(NodeList& ls, int pos, int a, int b) {
    const int q = (pos == -1) ? ls.head : pn_[pos].next;
    pn_[a].prev = pos;
    pn_[b].next = q;
    if (pos != -1)
      pn_[pos].next = a;
    else
      ls.head = a;
    if (q != -1)
      pn_[q].prev = b;
    else
      ls.tail = b;
  }

  void flist_insert_after(FrontierList& ls, int pos, int a, int b) {
    const int q = (pos == -1) ? ls.head : fn_[pos].next;
    fn_[a].prev = pos;
    fn_[b].next = q;
    if (pos != -1)
      fn_[pos].next = a;
    else
      ls.head = a;
    if (q != -1)
      fn_[q].prev = b;
    else
      ls.tail = b;
  }

  void flist_cut(FrontierList& ls, int a, int b) {
    const int p = fn_[a].prev;
    const int q = fn_[b].next;
    if (p != -1)
      fn_[p].next = q;
    else
      ls.head = q;
    if (q != -1)
      fn_[q].prev = p;
    else
      ls.tail = p;
    fn_[a].prev = -1;
    fn_[b].next = -1;
  }

  void fnode_erase(FrontierList& ls, int id) {
    flist_cut(ls, id, id);
    fn_[id].alive = false;
    fn_free_.push_back(id);
  }

  int next_normal(int id) const {
    int n = (id == -1) ? -1 : pn_[id].next;
    while (n != -1 && pn_[n].kind != kDartNode) n = pn_[n].next;
    return n;
  }
  int prev_normal(int id) const {
    int n = (id == -1) ? -1 : pn_[id].prev;
    while (n != -1 && pn_[n].kind != kDartNode) n = pn_[n].prev;
    return n;
  }
  int first_normal(const NodeList& ls) const {
    int n = ls.head;
    while (n != -1 && pn_[n].kind != kDartNode) n = pn_[n].next;
    return n;
  }
  int last_normal(const NodeList& ls) const {
    int n = ls.tail;
    while (n != -1 && pn_[n].kind != kDartNode) n = pn_[n].prev;
    return n;
  }

  bool sealed(DartId d) const { return sealed_[edge_of(d)] != 0; }

  void seal_unless_protected(DartId d) {
    const EdgeId e = edge_of(d);
    const int tp = tip_pair_of_edge_[e];
    if (tp != -1 && !ps_[tp].built) return;  // keep an unbuilt pair's stub walkable
    sealed_[e] = 1;
  }

  // Clockwise distance (in rotation steps) from dart a to dart x around their
  // shared tail vertex.
  std::int32_t cw_dist(Vertex v, DartId a, DartId x) const {
    const std::int32_t deg = g_.degree(v);
    std::int32_t dlt = rot_pos_[x] - rot_pos_[a];
    if (dlt < 0) dlt += deg;
    return dlt;
  }

  int lineage_child(int i, int p) const {
    for (int j : inst_.child[i]) {
      if (j != -1 && p >= inst_.first_desc[j] && p <= j) return j;
    }
    return -1;
  }

  bool stamp_valid(const Stamp& st) const {
    if (st.pair < 0) return false;
    if (st.node == -1) return ps_[st.pair].built && !ps_[st.pair].adopted;
    return pn_[st.node].alive && pn_[st.node].gen == st.gen;
  }

  void enqueue_event(DartId d, int node) {
    if (d < 0) violate("face event without a dart");
    const FaceId f = g_.face_right_of(d);
    if (f == ft_.external_face()) return;
    queue_.push_back(Shortcut{f, d, node, pn_[node].gen});
  }

  // -------------------------------------------------------- frontier groups
  // The frontier entries of vertex u hang off the path node entering u.  A
  // group lists the darts leaving u strictly clockwise-between the path's
  // outgoing dart and the reverse of its incoming dart, nearest the incoming
  // side first.
  void emit_group(int i, int owner_node, [[maybe_unused]] Vertex u, DartId din_u, DartId dout_u) {
    PathNode& on = pn_[owner_node];
    on.lgb = on.lge = -1;
    DartId r = g_.rotation_prev(reverse(din_u));
    int first = -1, last = -1;
    while (r != dout_u) {
      stats_.darts_visited++;
      if (!sealed(r)) {
        const int id = fnode_alloc(r);
        if (first == -1)
          first = last = id;
        else {
          fn_[last].next = id;
          fn_[id].prev = last;
          last = id;
        }
      }
      r = g_.rotation_prev(r);
      if (r == reverse(din_u)) violate("frontier fan never reached the outgoing dart");
    }
    if (first == -1) return;
    FrontierList& L = ps_[i].L;
    flist_insert_after(L, L.tail, first, last);
    on.lgb = first;
    on.lge = last;
  }

  // Erase the whole frontier group owned by path node `n` from list L.
  void erase_group(FrontierList& L, int n) {
    PathNode& on = pn_[n];
    if (on.lgb == -1) return;
    int id = on.lgb;
    while (true) {
      const int nx = fn_[id].next;
      const bool done = (id == on.lge);
      stats_.darts_visited++;
      fnode_erase(L, id);
      if (done) break;
      id = nx;
    }
    on.lgb = on.lge = -1;
  }

  // Pop dying entries from the back of node n's group: entries clockwise
  // between dout_old (exclusive) and dout_new (inclusive) at vertex u.
  void group_fix_out(FrontierList& L, int n, Vertex u, DartId dout_old, DartId dout_new) {
    PathNode& on = pn_[n];
    const std::int32_t lim = cw_dist(u, dout_old, dout_new);
    while (on.lge != -1) {
      const DartId e = fn_[on.lge].dart;
      if (g_.tail(e) != u) violate("frontier group bounds corrupt");
      const bool dying = (e == dout_new) || (cw_dist(u, dout_old, e) < lim && e != dout_old);
      if (!dying) break;
      const int prv = fn_[on.lge].prev;
      const bool was_first = (on.lge == on.lgb);
      stats_.darts_visited++;
      fnode_erase(L, on.lge);
      if (was_first) {
        on.lgb = on.lge = -1;
        break;
      }
      on.lge = prv;
    }
  }

  // Pop dying entries from the front of node n's group: entries clockwise
  // between reverse(din_new) (inclusive) and reverse(din_old) (exclusive).
  void group_fix_in(FrontierList& L, int n, Vertex u, DartId din_old, DartId din_new) {
    PathNode& on = pn_[n];
    const DartId a = reverse(din_new);
    const std::int32_t lim = cw_dist(u, a, reverse(din_old));
    while (on.lgb != -1) {
      const DartId e = fn_[on.lgb].dart;
      if (g_.tail(e) != u) violate("frontier group bounds corrupt");
      const bool dying = (e == a) || cw_dist(u, a, e) < lim;
      if (!dying) break;
      const int nx = fn_[on.lgb].next;
      const bool was_last = (on.lgb == on.lge);
      stats_.darts_visited++;
      fnode_erase(L, on.lgb);
      if (was_last) {
        on.lgb = on.lge = -1;
        break;
      }
      on.lgb = nx;
    }
  }

  // ------------------------------------------------------------------ walk
  // First admissible dart out of v strictly clockwise after `after`, stopping
  // before reverse(din); reverse(din) itself is returned as a last resort.
  DartId probe([[maybe_unused]] Vertex v, DartId after, DartId din) {
    const DartId stop = (din == -1) ? after : reverse(din);
    DartId d = g_.rotation_next(after);
    while (d != stop) {
      stats_.darts_visited++;
      if (!sealed(d)) return d;
      d = g_.rotation_next(d);
    }
    if (din != -1 && !sealed(reverse(din))) return reverse(din);
    return -1;
  }

  void step(int i, DartId d) {
    const Vertex w = g_.head(d);
    const int id = pnode_alloc();
    PathNode& n = pn_[id];
    n.kind = kDartNode;
    n.dart = d;
    n.owner = i;
    register_dart(d, id);
    if (mark_[d] == kNoMark) mark_[d] = i;
    stats_.fresh_darts++;
    stats_.darts_visited++;
    // Step-off bookkeeping for the vertex we are leaving.
    if (din_ != -1) {
      const int entering = ps_[i].P.tail;  // node entering cur_ (mine), or -1
      if (entering != -1 && pn_[entering].dart >= 0 && g_.head(pn_[entering].dart) == cur_ &&
          pn_[entering].owner == i) {
        emit_group(i, entering, cur_, din_, d);
      }
      // Otherwise cur_ is a chunk end; its fan is emitted at commit.
    }
    WalkElem el;
    el.is_ref = false;
    el.pnode = id;
    el.din_before = din_;
    el.old_stamp = stamp_[w];
    wstack_.push_back(el);
    list_append(ps_[i].P, id);
    stamp_[w] = Stamp{i, id, pn_[id].gen};
    wseen_[w] = wepoch_;
    cur_ = w;
    din_ = d;
    resume_after_ = -1;
    enqueue_event(d, id);
  }

  // Pop the last walk element; returns the dart to resume probing after.
  DartId backtrack_one(int i) {
    while (!wstack_.empty() && wstack_.back().is_ref && refs_.back().d_node == -1) {
      // Empty chunk on top: discard the adoption and keep unwinding.
      ps_[refs_.back().child].adopted = false;
      din_ = wstack_.back().din_before;
      refs_.pop_back();
      wstack_.pop_back();
      stats_.adoptions--;
    }
    if (wstack_.empty()) violate("walk exhausted every route from its source terminal");
    WalkElem& el = wstack_.back();
    if (!el.is_ref) {
      const int id = el.pnode;
      const DartId pd = pn_[id].dart;
      const Vertex u = g_.tail(pd);
      const Vertex w = g_.head(pd);
      seal_unless_protected(pd);
      stats_.excised_darts++;
      stats_.darts_visited++;
      if (wseen_[w] == wepoch_) wseen_[w] = 0;
      if (stamp_[w].node == id) stamp_[w] = el.old_stamp;
      // The group emitted when u was stepped off hangs on the node entering u.
      const int entering = pn_[id].prev;
      if (entering != -1 && pn_[entering].kind == kDartNode && pn_[entering].owner == i &&
          g_.head(pn_[entering].dart) == u) {
        erase_group(ps_[i].L, entering);
      }
      din_ = el.din_before;
      cur_ = u;
      list_cut(ps_[i].P, id, id);
      pnode_free(id);
      wstack_.pop_back();
      return pd;
    }
    // Non-empty chunk: trim one dart off its tail.
    RefRec& R = refs_.back();
    const int dn = R.d_node;
    const DartId pd = pn_[dn].dart;
    seal_unless_protected(pd);
    stats_.excised_darts++;
    stats_.darts_visited++;
    if (wseen_[cur_] == wepoch_) wseen_[cur_] = 0;
    int prv = prev_normal(dn);
    bool emptied = false;
    if (R.c_entry == -1) {
      if (prv == -1) emptied = true;
    } else if (prv == R.c_entry || prv == -1) {
      emptied = true;
    }
    if (emptied) {
      R.d_node = -1;
      R.d = R.c;
      cur_ = R.c;
      din_ = R.din_mine != -1 ? R.din_mine : wstack_.back().din_before;
    } else {
      R.d_node = prv;
      R.d = g_.head(pn_[prv].dart);
      cur_ = R.d;
      din_ = pn_[prv].dart;
    }
    wseen_[cur_] = wepoch_;
    return pd;
  }

  // Record adoption of child z starting at vertex c.  c_entry: child's node
  // entering c (-1 from the start).  din_mine: my arrival dart at c (-1 when
  // my path begins at c).
  void adopt(int i, int z, Vertex c, int c_entry, DartId din_mine) {
    RefRec R;
    R.child = z;
    R.c = c;
    R.c_entry = c_entry;
    R.din_mine = din_mine;
    R.my_prev = ps_[i].P.tail;
    R.enter_node = -1;
    if (R.my_prev != -1 && pn_[R.my_prev].kind == kDartNode &&
        g_.head(pn_[R.my_prev].dart) == c) {
      R.enter_node = R.my_prev;
    } else if (!refs_.empty() && refs_.back().d == c && refs_.back().d_node != -1 &&
               refs_.back().my_prev == R.my_prev) {
      R.enter_node = refs_.back().d_node;  // back-to-back chunks share the junction
    }
    R.l_after = ps_[i].L.tail;
    const NodeList& CL = ps_[z].P;
    const int stub = last_normal(CL);
    if (stub == -1) violate("adopted pair has an empty path");
    const Vertex tzp = g_.tail(pn_[stub].dart);  // vertex before the child's far tip
    int dn = -1;
    if (c == tzp || c_entry == stub) {
      dn = -1;  // empty chunk: the paths share only the vertex c
    } else {
      dn = prev_normal(stub);
      if (dn == -1 || dn == c_entry) dn = -1;
    }
    if (dn == -1) {
      R.d = R.c;
      R.d_node = -1;
    } else {
      R.d = tzp;
      R.d_node = dn;
      din_ = pn_[dn].dart;
      cur_ = tzp;
      wseen_[cur_] = wepoch_;
    }
    ps_[z].adopted = true;
    stats_.adoptions++;
    WalkElem el;
    el.is_ref = true;
    el.din_before = (R.d_node == -1) ? din_ : R.din_mine;
    wstack_.push_back(el);
    refs_.push_back(R);
    resume_after_ = -1;
  }

  void run_walk(int i) {
    cur_pair_ = i;
    refs_.clear();
    wstack_.clear();
    wepoch_++;
    const Vertex s_tip = inst_.s[i];
    const Vertex t_tip = inst_.t[i];
    cur_ = s_tip;
    din_ = -1;
    resume_after_ = -1;
    wseen_[s_tip] = wepoch_;
    // A pair sharing its source tip with a descendant starts by adoption.
    {
      const Stamp& st = stamp_[s_tip];
      if (stamp_valid(st) && st.pair != i && inst_.is_descendant(st.pair, i)) {
        const int z = lineage_child(i, st.pair);
        if (z != -1 && !ps_[z].adopted) adopt(i, z, s_tip, -1, -1);
      }
    }
    while (true) {
      DartId d;
      if (resume_after_ != -1) {
        d = probe(cur_, resume_after_, din_);
        resume_after_ = -1;
      } else if (din_ == -1) {
        d = *g_.darts_begin(cur_);  // pendant source tip
        if (sealed(d)) violate("source stub is sealed");
      } else {
        d = probe(cur_, reverse(din_), din_);
      }
      if (d == -1 || (din_ != -1 && d == reverse(din_))) {
        resume_after_ = backtrack_one(i);
        continue;
      }
      // Forward dart of a live, not-yet-adopted descendant path: ride by ref.
      const int nd = path_node_of(d, inst_.first_desc[i], i - 1);
      if (nd != -1) {
        const int z = lineage_child(i, pn_[nd].owner);
        if (z != -1 && !ps_[z].adopted) {
          adopt(i, z, cur_, prev_normal(nd), din_);
          continue;
        }
      }
      const Vertex w = g_.head(d);
      if (w == t_tip) {
        step(i, d);
        break;
      }
      if (wseen_[w] == wepoch_) {
        // Closing a loop against the walk itself: excise it.
        seal_unless_protected(d);
        stats_.darts_visited++;
        while (cur_ != w) resume_after_ = backtrack_one(i);
        continue;
      }
      const Stamp& st = stamp_[w];
      if (stamp_valid(st) && st.pair != i && inst_.is_descendant(st.pair, i)) {
        const int z = lineage_child(i, st.pair);
        if (z != -1 && !ps_[z].adopted) {
          // The chunk must continue forward, not bounce back along d.
          int centry = st.node;
          int cfirst = (centry == -1) ? first_normal(ps_[z].P) : next_normal(centry);
          if (cfirst == -1 || pn_[cfirst].dart != reverse(d)) {
            step(i, d);
            adopt(i, z, w, centry, d);
            continue;
          }
        }
      }
      step(i, d);
    }
  }

  // A chunk boundary can cut through a range the child itself adopted from a
  // deeper descendant.  Split every reference marker pair straddling the kept
  // chunk (c_entry, d_node] so the kept piece carries markers of its own; the
  // pieces falling in the dropped head and tail are left for the drop sweeps
  // to free.  Returns the last node of the kept range: d_node itself, or the
  // outermost closing marker inserted right after it.
  int rebracket_chunk(int z, int c_entry, int d_node) {
    NodeList& CL = ps_[z].P;
    struct Piece {
      int mb = -1;             // original begin marker
      int me = -1;             // original end marker when it lies in the kept zone
      int lead = -1;           // fresh begin marker at the kept range head
      int opened_zone = 0;     // zone the begin marker sits in
      bool open_at_exit = false;
      bool has_dart = false;
      Weight w = 0;
      Vertex from = -1, to = -1;
    };
    std::vector<Piece> br;
    std::vector<int> stack;       // open brackets, outermost first
    std::vector<int> entry_open;  // stack snapshot where the kept zone begins
    std::vector<int> exit_order;  // brackets cut by the kept end, innermost first
    std::vector<int> dead_me;     // kept end markers whose piece holds no dart
    int zone = (c_entry == -1) ? 1 : 0;  // 0 dropped head, 1 kept, 2 dropped tail
    for (int n = CL.head; n != -1; n = pn_[n].next) {
      if (pn_[n].kind == kRefBegin) {
        Piece p;
        p.mb = n;
        p.opened_zone = zone;
        br.push_back(p);
        stack.push_back(static_cast<int>(br.size()) - 1);
      } else if (pn_[n].kind == kRefEnd) {
        if (stack.empty()) violate("adopted path has an unmatched end marker");
        const int bi = stack.back();
        stack.pop_back();
        Piece& p = br[bi];
        if (zone == 1 && p.opened_zone == 0) {
          if (p.has_dart)
            p.me = n;  // pair with a fresh begin at the kept range head
          else
            dead_me.push_back(n);
        } else if (zone == 2 && p.opened_zone != 2) {
          if (p.has_dart) {
            p.open_at_exit = true;
            exit_order.push_back(bi);
          } else if (p.opened_zone == 1) {
            violate("kept chunk holds a begin marker with no content");
          }
        }
      } else if (zone == 1) {
        const Weight dw = g_.dart_weight(pn_[n].dart);
        for (int bi : stack) {
          Piece& p = br[bi];
          if (!p.has_dart) {
            p.has_dart = true;
            p.from = g_.tail(pn_[n].dart);
          }
          p.to = g_.head(pn_[n].dart);
          p.w = checked_add(p.w, dw);
        }
      }
      if (n == c_entry) {
        zone = 1;
        entry_open = stack;
      }
      if (n == d_node) zone = 2;
    }
    if (!stack.empty()) violate("adopted path has an unmatched begin marker");
    for (int id : dead_me) {
      list_cut(CL, id, id);
      pnode_free(id);
    }
    // Fresh begin markers for brackets cut by the kept start, outermost first.
    int pos = c_entry;
    for (int bi : entry_open) {
      Piece& p = br[bi];
      if (!p.has_dart || (p.me == -1 && !p.open_at_exit)) continue;
      const int mb2 = pnode_alloc();
      pn_[mb2].kind = kRefBegin;
      pn_[mb2].owner = pn_[p.mb].owner;
      pn_[mb2].child = pn_[p.mb].child;
      pn_[mb2].ref_w = p.w;
      pn_[mb2].ref_from = p.from;
      pn_[mb2].ref_to = p.to;
      if (p.me != -1) {
        pn_[mb2].twin = p.me;
        pn_[p.me].twin = mb2;
      }
      p.lead = mb2;
      list_insert_after(CL, pos, mb2, mb2);
      pos = mb2;
    }
    // Fresh end markers for brackets cut by the kept end, innermost first.
    int kept_last = d_node;
    for (int bi : exit_order) {
      Piece& p = br[bi];
      const int start = (p.opened_zone == 1) ? p.mb : p.lead;
      if (start == -1) violate("cut reference lost its begin marker");
      const int me2 = pnode_alloc();
      pn_[me2].kind = kRefEnd;
      pn_[me2].owner = pn_[start].owner;
      pn_[me2].child = pn_[start].child;
      pn_[me2].twin = start;
      pn_[start].twin = me2;
      if (p.opened_zone == 1) {
        pn_[start].ref_w = p.w;
        pn_[start].ref_to = p.to;
      }
      list_insert_after(CL, kept_last, me2, me2);
      kept_last = me2;
    }
    return kept_last;
  }

  // ---------------------------------------------------------------- commit
  void commit(int i) {
    struct PendingFan {
      int me_marker = -1;  // the chunk's end marker
      int d_node = -1;     // node entering the junction vertex d
      Vertex d = -1;
      int l_pos = -1;      // frontier position right after the chunk's range
    };
    std::vector<PendingFan> pending;
    int prev_anchor = -2, prev_chain = -1;       // path splice chaining
    int prev_l_anchor = -2, prev_l_chain = -1;   // frontier splice chaining
    for (RefRec& R : refs_) {
      const int z = R.child;
      NodeList& CL = ps_[z].P;
      FrontierList& ZL = ps_[z].L;
      const DartId din_child = (R.c_entry != -1) ? pn_[R.c_entry].dart : -1;
      const int kept_last = (R.d_node != -1) ? rebracket_chunk(z, R.c_entry, R.d_node) : -1;
      Weight pfx_s = 0, pfx_t = 0;
      // Drop the child's head portion [start .. c].
      if (R.c_entry != -1) {
        int n = CL.head;
        while (n != -1) {
          const int nx = pn_[n].next;
          const bool at_entry = (n == R.c_entry);
          if (pn_[n].kind == kDartNode) {
            pfx_s = checked_add(pfx_s, g_.dart_weight(pn_[n].dart));
            seal_unless_protected(pn_[n].dart);
            stats_.darts_visited++;
            const Vertex hv = g_.head(pn_[n].dart);
            if (stamp_[hv].node == n) stamp_[hv] = Stamp{};
          }
          if (at_entry) {
            // This node's group is the fan at c.  A non-empty chunk keeps it
            // (ownership moves to my own node entering c); an empty chunk is
            // covered by my own step-off fan at c, so the child's dies.
            if (R.d_node != -1) {
              if (R.enter_node == -1) violate("kept junction fan has no owner on my path");
              pn_[R.enter_node].lgb = pn_[n].lgb;
              pn_[R.enter_node].lge = pn_[n].lge;
              pn_[n].lgb = pn_[n].lge = -1;
            } else {
              erase_group(ZL, n);
            }
          } else {
            erase_group(ZL, n);
          }
          list_cut(CL, n, n);
          pnode_free(n);
          if (at_entry) break;
          n = nx;
        }
      }
      // Drop the child's tail portion (everything past d), including its stub.
      {
        int n = CL.tail;
        const int stop = kept_last;
        while (n != -1 && n != stop) {
          const int pv = pn_[n].prev;
          if (pn_[n].kind == kDartNode) {
            pfx_t = checked_add(pfx_t, g_.dart_weight(pn_[n].dart));
            seal_unless_protected(pn_[n].dart);
            stats_.darts_visited++;
            erase_group(ZL, n);
            const Vertex hv = g_.head(pn_[n].dart);
            if (stamp_[hv].node == n) stamp_[hv] = Stamp{};
          }
          list_cut(CL, n, n);
          pnode_free(n);
          n = pv;
        }
        // The fan of d itself came from the dropped side; my own fan at d is
        // emitted in the junction pass below.
        if (R.d_node != -1) erase_group(ZL, R.d_node);
      }
      // Prefix-fix c's kept group against my arrival direction.
      if (R.d_node != -1 && din_child != -1 && R.din_mine != -1 && R.enter_node != -1 &&
          R.din_mine != din_child) {
        group_fix_in(ZL, R.enter_node, R.c, din_child, R.din_mine);
      }
      // Price the chunk.
      const Weight ref_w = ps_[z].weight - pfx_s - pfx_t;
      if (ref_w < 0) violate("chunk weight bookkeeping went negative");
      // Build markers and splice the kept node range into my path.
      const int mb = pnode_alloc();
      const int me = pnode_alloc();
      pn_[mb].kind = kRefBegin;
      pn_[me].kind = kRefEnd;
      pn_[mb].owner = pn_[me].owner = i;
      pn_[mb].child = pn_[me].child = z;
      pn_[mb].twin = me;
      pn_[me].twin = mb;
      pn_[mb].ref_w = ref_w;
      pn_[mb].ref_from = R.c;
      pn_[mb].ref_to = R.d;
      const int anchor = (R.my_prev == prev_anchor && prev_chain != -1) ? prev_chain : R.my_prev;
      NodeList& MP = ps_[i].P;
      list_insert_after(MP, anchor, mb, mb);
      int kept_first = -1;
      if (R.d_node != -1) {
        kept_first = CL.head;
        if (kept_first == -1) violate("non-empty chunk lost its nodes");
        list_cut(CL, kept_first, kept_last);
        list_insert_after(MP, mb, kept_first, kept_last);
        list_insert_after(MP, kept_last, me, me);
      } else {
        list_insert_after(MP, mb, me, me);
      }
      prev_anchor = R.my_prev;
      prev_chain = me;
      CL.head = CL.tail = -1;
      // Splice the kept frontier range.
      int lanchor = (R.l_after == prev_l_anchor && prev_l_chain != -1) ? prev_l_chain : R.l_after;
      prev_l_anchor = R.l_after;
      if (ZL.head != -1) {
        const int a = ZL.head, b = ZL.tail;
        flist_cut(ZL, a, b);
        if (ZL.head != -1) violate("frontier splice left residue");
        flist_insert_after(ps_[i].L, lanchor, a, b);
        lanchor = b;
      }
      ZL.head = ZL.tail = -1;
      prev_l_chain = lanchor;
      if (R.d_node != -1) {
        pending.push_back(PendingFan{me, R.d_node, R.d, lanchor});
        // Junction boundary tests: the chunk's first and last darts.  The kept
        // range can open with reference markers (the child entered one of its
        // own chunks right at the junction), so scan to the first dart node.
        int jfirst = kept_first;
        while (jfirst != -1 && pn_[jfirst].kind != kDartNode) jfirst = pn_[jfirst].next;
        if (jfirst == -1) violate("kept chunk range holds no darts");
        enqueue_event(pn_[jfirst].dart, jfirst);
        if (R.d_node != jfirst) enqueue_event(pn_[R.d_node].dart, R.d_node);
      }
    }
    // Junction fans at chunk ends.  When the walk stepped off d onto a fresh
    // dart, the fan was deferred (it needs the chunk's dart for its incoming
    // side); when the next element is another chunk, the later chunk's kept
    // fan at its own start covers the junction instead.
    for (const PendingFan& pf : pending) {
      const int after = next_normal(pf.me_marker);
      if (after == -1) violate("chunk end has no outgoing continuation");
      if (pn_[after].owner != i) continue;  // junction shared with the next chunk
      const DartId dout_mine = pn_[after].dart;
      const DartId din_d = pn_[pf.d_node].dart;
      emit_group_at(i, pf.d_node, pf.d, din_d, dout_mine, pf.l_pos);
    }
    refs_.clear();
    wstack_.clear();
  }

  // Emit vertex u's fan into my frontier list at a given position (commit-time
  // variant of emit_group; `after` -1 inserts at the head).
  void emit_group_at(int i, int owner_node, [[maybe_unused]] Vertex u, DartId din_u, DartId dout_u,
                     int after) {
    PathNode& on = pn_[owner_node];
    on.lgb = on.lge = -1;
    DartId r = g_.rotation_prev(reverse(din_u));
    int first = -1, last = -1;
    while (r != dout_u) {
      stats_.darts_visited++;
      if (!sealed(r)) {
        const int id = fnode_alloc(r);
        if (first == -1)
          first = last = id;
        else {
          fn_[last].next = id;
          fn_[id].prev = last;
          last = id;
        }
      }
      r = g_.rotation_prev(r);
      if (r == reverse(din_u)) violate("frontier fan never reached the outgoing dart");
    }
    if (first == -1) return;
    flist_insert_after(ps_[i].L, after, first, last);
    on.lgb = first;
    on.lge = last;
  }

  // ------------------------------------------------------------ saturation
  void saturate(int i) {
    while (!queue_.empty()) {
      const Shortcut ev = queue_.front();
      queue_.pop_front();
      stats_.events_processed++;
      process_event(i, ev);
    }
  }

  bool on_my_path(DartId d, int i) const {
    return path_node_of(d, inst_.first_desc[i], i) != -1;
  }

  void process_event(int i, const Shortcut& ev) {
    if (ev.node < 0 || !pn_[ev.node].alive || pn_[ev.node].gen != ev.gen ||
        pn_[ev.node].dart != ev.dart)
      return;
    if (pn_[ev.node].owner < inst_.first_desc[i] || pn_[ev.node].owner > i) return;
    const FaceId f = ev.face;
    FaceState& fs = fstate_[f];
    if (fs.retired_for == i) return;
    if (fs.active_for != i) {
      fs.runs.clear();
      fs.active_for = i;
    }
    const std::int32_t m = ft_.orbit_length(f);
    const std::int32_t p = ft_.position_of(reverse(ev.dart));
    if (covered(fs, p, m)) return;
    // Grow a maximal run of path darts around position p.
    Run r;
    r.start = p;
    r.len = 1;
    r.w = g_.dart_weight(ev.dart);
    while (r.len < m) {
      const std::int32_t q = mod(r.start - 1, m);
      if (covered(fs, q, m)) break;
      const DartId od = ft_.orbit_dart(f, q);
      stats_.darts_visited++;
      if (!on_my_path(reverse(od), i)) break;
      r.start = q;
      r.len++;
      r.w = checked_add(r.w, g_.dart_weight(od));
    }
    while (r.len < m) {
      const std::int32_t q = mod(r.start + r.len, m);
      if (covered(fs, q, m)) break;
      const DartId od = ft_.orbit_dart(f, q);
      stats_.darts_visited++;
      if (!on_my_path(reverse(od), i)) break;
      r.len++;
      r.w = checked_add(r.w, g_.dart_weight(od));
    }
    if (r.len >= m) violate("path wraps an entire face boundary");
    insert_run(fs, r, m);
    resolve_face(i, f, fs, m);
  }

  static std::int32_t mod(std::int32_t a, std::int32_t m) {
    a %= m;
    return a < 0 ? a + m : a;
  }

  bool covered(const FaceState& fs, std::int32_t p, std::int32_t m) const {
    for (const Run& r : fs.runs) {
      if (mod(p - r.start, m) < r.len) return true;
    }
    return false;
  }

  void insert_run(FaceState& fs, Run r, std::int32_t m) {
    // Merge with runs adjacent to either end.
    bool merged = true;
    while (merged) {
      merged = false;
      for (std::size_t j = 0; j < fs.runs.size(); ++j) {
        Run& o = fs.runs[j];
        if (mod(o.start - (r.start + r.len), m) == 0) {
          r.len += o.len;
          r.w = checked_add(r.w, o.w);
          fs.runs.erase(fs.runs.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
          break;
        }
        if (mod(r.start - (o.start + o.len), m) == 0) {
          r.start = o.start;
          r.len += o.len;
          r.w = checked_add(r.w, o.w);
          fs.runs.erase(fs.runs.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
          break;
        }
      }
      if (r.len >= m) violate("path wraps an entire face boundary");
    }
    fs.runs.push_back(r);
  }

  // Apply every boundary replacement the face currently admits.
  void resolve_face(int i, FaceId f, FaceState& fs, std::int32_t m) {
    while (true) {
      if (fs.runs.empty()) return;
      if (fs.runs.size() == 1) {
        const Run r = fs.runs[0];
        stats_.faces_tested++;
        const Weight outside = ft_.boundary_weight(f) - r.w;
        if (outside > r.w) return;  // keeping the current side is strictly better
        // Replace the run's path segment by the complementary boundary arc.
        const std::int32_t hi = mod(r.start + r.len - 1, m);
        const int n_first = need_node(reverse(ft_.orbit_dart(f, hi)), i);
        const int n_last = need_node(reverse(ft_.orbit_dart(f, r.start)), i);
        std::vector<DartId> arc;
        arc.reserve(static_cast<std::size_t>(m - r.len));
        for (std::int32_t q = mod(hi + 1, m); q != r.start; q = mod(q + 1, m))
          arc.push_back(ft_.orbit_dart(f, q));
        if (!replacement_ok(arc, i)) return;  // would ride the path itself
        apply_replace(i, n_first, n_last, arc);
        fs.runs.clear();
        fs.retired_for = i;
        return;
      }
      // Disconnected intersection: find the two runs consecutive along the
      // path, the segment X between them, and try the two boundary arcs.
      int early = -1, late = -1, x_first = -1, x_last = -1;
      Weight wx = 0;
      find_consecutive(i, f, fs, m, early, late, x_first, x_last, wx);
      const Run re = fs.runs[static_cast<std::size_t>(early)];
      const Run rl = fs.runs[static_cast<std::size_t>(late)];
      stats_.faces_tested++;
      // Gap arc between the two runs on the boundary, traversed against the
      // orbit, joining X's endpoints directly.
      const std::int32_t gap_from = mod(rl.start + rl.len, m);  // first gap position
      const std::int32_t gap_to = mod(re.start - 1, m);         // last gap position
      {
        std::vector<DartId> sigma;
        Weight w_sigma = 0;
        for (std::int32_t q = gap_to; ; q = mod(q - 1, m)) {
          sigma.push_back(reverse(ft_.orbit_dart(f, q)));
          w_sigma = checked_add(w_sigma, g_.dart_weight(ft_.orbit_dart(f, q)));
          if (q == gap_from) break;
        }
        if (x_first != -1 && w_sigma <= wx && replacement_ok(sigma, i)) {
          apply_replace(i, x_first, x_last, sigma);
          // The gap joins the path: fold both runs and the gap into one run.
          Run merged;
          merged.start = rl.start;
          merged.len = rl.len + re.len + mod(gap_to - gap_from, m) + 1;
          merged.w = checked_add(checked_add(re.w, rl.w), w_sigma);
          if (merged.len >= m) violate("path wraps an entire face boundary");
          std::vector<Run> rest;
          for (int j = 0; j < static_cast<int>(fs.runs.size()); ++j)
            if (j != early && j != late) rest.push_back(fs.runs[static_cast<std::size_t>(j)]);
          fs.runs = std::move(rest);
          insert_run(fs, merged, m);
          continue;
        }
      }
      // Swallow: replace run-early + X + run-late by the far-side arc.
      const std::int32_t far_from = mod(re.start + re.len, m);
      const std::int32_t far_to = mod(rl.start - 1, m);
      std::vector<DartId> far;
      Weight w_far = 0;
      for (std::int32_t q = far_from; ; q = mod(q + 1, m)) {
        far.push_back(ft_.orbit_dart(f, q));
        w_far = checked_add(w_far, g_.dart_weight(ft_.orbit_dart(f, q)));
        if (q == far_to) break;
      }
      const Weight stretch = checked_add(checked_add(re.w, wx), rl.w);
      if (w_far <= stretch && replacement_ok(far, i)) {
        const int nf = need_node(reverse(ft_.orbit_dart(f, mod(re.start + re.len - 1, m))), i);
        const int nl = need_node(reverse(ft_.orbit_dart(f, rl.start)), i);
        apply_replace(i, nf, nl, far);
        // Both runs (and X) left the boundary's right side.
        std::vector<Run> rest;
        for (int j = 0; j < static_cast<int>(fs.runs.size()); ++j)
          if (j != early && j != late) rest.push_back(fs.runs[static_cast<std::size_t>(j)]);
        fs.runs = std::move(rest);
        continue;
      }
      violate("disconnected boundary intersection admits no replacement");
    }
  }

  int need_node(DartId d, int i) const {
    const int n = path_node_of(d, inst_.first_desc[i], i);
    if (n == -1) fail(ErrorCode::StaleShortcut, "boundary run lost its path occurrence");
    return n;
  }

  // A boundary arc is usable only if none of its darts (in either direction)
  // already lies on the path, and it visits no vertex twice.
  bool replacement_ok(const std::vector<DartId>& arc, int i) const {
    if (arc.empty()) return false;
    for (DartId d : arc) {
      if (on_my_path(d, i) || on_my_path(reverse(d), i)) return false;
    }
    for (std::size_t a = 0; a + 1 < arc.size(); ++a) {
      const Vertex v = g_.head(arc[a]);
      if (v == g_.tail(arc.front())) return false;
      for (std::size_t b = a + 1; b + 1 < arc.size(); ++b)
        if (g_.head(arc[b]) == v) return false;
    }
    return true;
  }

  // Among fs.runs, find the pair consecutive along the path and the weight of
  // the path segment X strictly between them.  Outputs the first/last path
  // nodes of X (-1 when X is empty, i.e. the runs share a vertex).
  void find_consecutive(int i, FaceId f, FaceState& fs, std::int32_t m, int& early, int& late,
                        int& x_first, int& x_last, Weight& wx) {
    struct Cursor {
      int run;
      int node;      // current candidate node (first node after the run's exit)
      Weight acc = 0;
      int first = -1;
      bool dead = false;
    };
    std::vector<Cursor> cs;
    std::vector<int> entry_node(fs.runs.size());
    for (std::size_t j = 0; j < fs.runs.size(); ++j) {
      const Run& r = fs.runs[j];
      const std::int32_t hi = mod(r.start + r.len - 1, m);
      entry_node[j] = need_node(reverse(ft_.orbit_dart(f, hi)), i);
      const int exit = need_node(reverse(ft_.orbit_dart(f, r.start)), i);
      Cursor c;
      c.run = static_cast<int>(j);
      c.node = next_normal(exit);
      cs.push_back(c);
    }
    while (true) {
      bool progress = false;
      for (Cursor& c : cs) {
        if (c.dead) continue;
        if (c.node == -1) {
          c.dead = true;
          continue;
        }
        progress = true;
        stats_.darts_visited++;
        for (std::size_t j = 0; j < fs.runs.size(); ++j) {
          if (static_cast<int>(j) != c.run && c.node == entry_node[j]) {
            early = c.run;
            late = static_cast<int>(j);
            x_first = c.first;
            x_last = (c.first == -1) ? -1 : prev_normal(c.node);
            wx = c.acc;
            return;
          }
        }
        if (c.first == -1) c.first = c.node;
        c.acc = checked_add(c.acc, g_.dart_weight(pn_[c.node].dart));
        c.node = next_normal(c.node);
      }
      if (!progress) violate("boundary runs are not connected along the path");
    }
  }

  // If `n` sits strictly inside a referenced range, split that reference at
  // the boundary so [n ..] (dir=+1) or [.. n] (dir=-1) can be detached whole.
  void split_ref_boundary(int i, int n, int dir) {
    if (pn_[n].owner == i) return;  // top-level node: no enclosing reference
    if (dir > 0) {
      // n starts the detached part.  Close every enclosing reference just
      // before n: walk backward summing the kept head part (nested closed
      // references are jumped over and contribute their priced weight), split
      // at each unmatched begin marker, stopping at my own top-level marker.
      Weight kept = 0;
      int p = pn_[n].prev;
      while (true) {
        if (p == -1) violate("interior path node has no enclosing reference");
        stats_.darts_visited++;
        if (pn_[p].kind == kRefEnd) {
          kept = checked_add(kept, pn_[pn_[p].twin].ref_w);
          p = pn_[pn_[p].twin].prev;
          continue;
        }
        if (pn_[p].kind == kDartNode) {
          kept = checked_add(kept, g_.dart_weight(pn_[p].dart));
          p = pn_[p].prev;
          continue;
        }
        // Unmatched begin marker: close its head part right before n.
        const bool top_level = (pn_[p].owner == i);
        const int me2 = pnode_alloc();
        pn_[me2].kind = kRefEnd;
        pn_[me2].owner = pn_[p].owner;
        pn_[me2].child = pn_[p].child;
        pn_[me2].twin = p;
        pn_[p].twin = me2;
        pn_[p].ref_w = kept;
        pn_[p].ref_to = g_.tail(pn_[n].dart);
        list_insert_after(ps_[i].P, pn_[n].prev, me2, me2);
        if (top_level) break;
        p = pn_[p].prev;
      }
    } else {
      // n ends the detached part.  Open every enclosing reference again just
      // after n, walking forward over the kept tail part.
      Weight kept = 0;
      int p = pn_[n].next;
      while (true) {
        if (p == -1) violate("interior path node has no enclosing reference");
        stats_.darts_visited++;
        if (pn_[p].kind == kRefBegin) {
          kept = checked_add(kept, pn_[p].ref_w);
          p = pn_[pn_[p].twin].next;
          continue;
        }
        if (pn_[p].kind == kDartNode) {
          kept = checked_add(kept, g_.dart_weight(pn_[p].dart));
          p = pn_[p].next;
          continue;
        }
        // Unmatched end marker: reopen its tail part right after n.
        const int old_me = p;
        const int orig_mb = pn_[old_me].twin;
        const bool top_level = (pn_[old_me].owner == i);
        const int mb2 = pnode_alloc();
        pn_[mb2].kind = kRefBegin;
        pn_[mb2].owner = pn_[old_me].owner;
        pn_[mb2].child = pn_[old_me].child;
        pn_[mb2].twin = old_me;
        pn_[mb2].ref_w = kept;
        pn_[mb2].ref_from = g_.head(pn_[n].dart);
        pn_[mb2].ref_to = pn_[orig_mb].ref_to;
        pn_[old_me].twin = mb2;
        list_insert_after(ps_[i].P, n, mb2, mb2);
        if (top_level) break;
        p = pn_[old_me].next;
      }
    }
  }

  // Replace the path range [n_first..n_last] (inclusive, dart nodes) by the
  // dart sequence `arc`; updates path, frontier, marks, stamps and events.
  void apply_replace(int i, int n_first, int n_last, const std::vector<DartId>& arc) {
    stats_.shortcuts_applied++;
    NodeList& P = ps_[i].P;
    FrontierList& L = ps_[i].L;
    const Vertex A = g_.tail(pn_[n_first].dart);
    const Vertex B = g_.head(pn_[n_last].dart);
    const DartId dout_old = pn_[n_first].dart;
    const DartId din_old = pn_[n_last].dart;
    const DartId dout_new = arc.front();
    const DartId din_new = arc.back();
    if (g_.tail(dout_new) != A || g_.head(din_new) != B)
      fail(ErrorCode::StaleShortcut, "replacement arc endpoints do not match the path");
    // Keep reference markers consistent when the range cuts into a chunk.
    // Split the tail side first so the head split reads unclobbered markers.
    split_ref_boundary(i, n_last, -1);
    split_ref_boundary(i, n_first, +1);
    // Absorb adjacent markers whose partner falls inside the range.
    int range_a = n_first, range_b = n_last;
    while (pn_[range_a].prev != -1) {
      const int p = pn_[range_a].prev;
      if (pn_[p].kind != kDartNode && marker_partner_within(p, range_a, range_b))
        range_a = p;
      else
        break;
    }
    while (pn_[range_b].next != -1) {
      const int q = pn_[range_b].next;
      if (pn_[q].kind != kDartNode && marker_partner_within(q, range_a, range_b))
        range_b = q;
      else
        break;
    }
    const int a_owner = prev_normal(range_a);  // node entering A
    // Trim A's fan against the new outgoing dart, B's against the new
    // incoming one; B's (trimmed) fan survives on the last new node.
    if (a_owner != -1 && g_.head(pn_[a_owner].dart) == A)
      group_fix_out(L, a_owner, A, dout_old, dout_new);
    group_fix_in(L, n_last, B, din_old, din_new);
    const int b_lgb = pn_[n_last].lgb, b_lge = pn_[n_last].lge;
    pn_[n_last].lgb = pn_[n_last].lge = -1;
    // Frontier insertion anchor for the new interior fans: right after A's
    // fan when it exists, else where the first dying entry sat, else right
    // before B's fan, else at the list tail.  Any fan-group boundary works —
    // each vertex's fan must stay contiguous, but the frontier list promises
    // no order between fans of different vertices.
    int lanchor = -1;
    bool lanchor_set = false;
    if (a_owner != -1 && pn_[a_owner].lge != -1) {
      lanchor = pn_[a_owner].lge;
      lanchor_set = true;
    }
    // Detach and free the old range.
    const int gap_prev = pn_[range_a].prev;
    {
      int n = range_a;
      while (true) {
        const int nx = pn_[n].next;
        const bool done = (n == range_b);
        if (pn_[n].kind == kDartNode) {
          seal_unless_protected(pn_[n].dart);
          stats_.darts_visited++;
          const Vertex hv = g_.head(pn_[n].dart);
          if (n != n_last) {
            if (!lanchor_set && pn_[n].lgb != -1) {
              lanchor = fn_[pn_[n].lgb].prev;
              lanchor_set = true;
            }
            erase_group(L, n);
          }
          if (stamp_[hv].node == n) stamp_[hv] = Stamp{};
        }
        list_cut(P, n, n);
        pnode_free(n);
        if (done) break;
        n = nx;
      }
    }
    if (!lanchor_set && b_lgb != -1) {
      lanchor = fn_[b_lgb].prev;
      lanchor_set = true;
    }
    auto ensure_anchor = [&]() {
      if (lanchor_set) return;
      lanchor_set = true;
      lanchor = L.tail;  // no fan anywhere near the gap: append
    };
    // Insert the new nodes into the gap and emit interior fans in order.
    int prev_node = gap_prev;
    std::vector<int> new_ids;
    new_ids.reserve(arc.size());
    for (std::size_t j = 0; j < arc.size(); ++j) {
      const DartId d = arc[j];
      const int id = pnode_alloc();
      pn_[id].kind = kDartNode;
      pn_[id].dart = d;
      pn_[id].owner = i;
      register_dart(d, id);
      if (mark_[d] == kNoMark) mark_[d] = i;
      stats_.fresh_darts++;
      stats_.darts_visited++;
      list_insert_after(P, prev_node, id, id);
      if (j > 0) {
        const Vertex v = g_.tail(d);
        stamp_[v] = Stamp{i, prev_node, pn_[prev_node].gen};
        ensure_anchor();
        emit_group_at(i, prev_node, v, arc[j - 1], d, lanchor);
        if (pn_[prev_node].lgb != -1) lanchor = pn_[prev_node].lge;
      }
      prev_node = id;
      new_ids.push_back(id);
    }
    // B's fan ownership moves to the node now entering B.
    pn_[prev_node].lgb = b_lgb;
    pn_[prev_node].lge = b_lge;
    if (!stamp_valid(stamp_[B]) || stamp_[B].pair == i)
      stamp_[B] = Stamp{i, prev_node, pn_[prev_node].gen};
    for (int id : new_ids) enqueue_event(pn_[id].dart, id);
  }

  bool marker_partner_within(int marker, int a, int b) const {
    const int t = pn_[marker].twin;
    for (int n = a; n != -1; n = pn_[n].next) {
      if (n == t) return true;
      if (n == b) break;
    }
    return false;
  }

  // ------------------------------------------------------------- finishing
  void finalize_pair(int i, PairPath& out) {
    out.s = inst_.s[i];
    out.t = inst_.t[i];
    out.segments.clear();
    Weight total = 0;
    const NodeList& P = ps_[i].P;
    PathSegment cur;
    auto flush = [&]() {
      if (cur.child == -1 && cur.darts.empty()) return;
      out.segments.push_back(std::move(cur));
      cur = PathSegment{};
    };
    int n = P.head;
    while (n != -1) {
      const PathNode& nd = pn_[n];
      if (nd.kind == kDartNode) {
        if (cur.child != -1) flush();
        if (cur.darts.empty()) cur.from = g_.tail(nd.dart);
        cur.darts.push_back(nd.dart);
        cur.to = g_.head(nd.dart);
        cur.weight = checked_add(cur.weight, g_.dart_weight(nd.dart));
        n = nd.next;
        continue;
      }
      if (nd.kind == kRefBegin) {
        if (nd.ref_from == nd.ref_to) {
          // Zero-width reference (a bare touch): contributes nothing.
          if (nd.ref_w != 0) violate("empty path reference carries weight");
          n = pn_[nd.twin].next;
          continue;
        }
        flush();
        PathSegment ref;
        ref.child = nd.child;
        ref.from = nd.ref_from;
        ref.to = nd.ref_to;
        ref.weight = nd.ref_w;
        out.segments.push_back(std::move(ref));
        n = pn_[nd.twin].next;  // skip the referenced interior
        continue;
      }
      violate("unpaired reference marker in a finished path");
    }
    flush();
    for (const PathSegment& sg : out.segments) total = checked_add(total, sg.weight);
    ps_[i].weight = total;
    ps_[i].built = true;
    out.weight = total;
    if (out.segments.empty()) violate("finished pair has an empty path");
  }

  std::vector<DartId> collect_live_darts(int i) const {
    std::vector<DartId> out;
    for (int n = ps_[i].P.head; n != -1; n = pn_[n].next)
      if (pn_[n].kind == kDartNode) out.push_back(pn_[n].dart);
    return out;
  }

  std::vector<DartId> collect_frontier(int i) const {
    std::vector<DartId> out;
    for (int n = ps_[i].L.head; n != -1; n = fn_[n].next) out.push_back(fn_[n].dart);
    return out;
  }

  void full_check_pair(int i, const ImplicitPathSet& out) const {
    const std::vector<DartId> darts = out.materialize(i);
    require(!darts.empty(), ErrorCode::InternalInvariantViolation, "materialized path is empty");
    require(g_.tail(darts.front()) == inst_.s[i] && g_.head(darts.back()) == inst_.t[i],
            ErrorCode::InternalInvariantViolation, "materialized path endpoints are wrong");
    Weight w = 0;
    std::vector<char> seen(static_cast<std::size_t>(g_.vertex_count()), 0);
    Vertex at = g_.tail(darts.front());
    seen[static_cast<std::size_t>(at)] = 1;
    for (DartId d : darts) {
      require(g_.tail(d) == at, ErrorCode::InternalInvariantViolation,
              "materialized path is not contiguous");
      at = g_.head(d);
      require(!seen[static_cast<std::size_t>(at)], ErrorCode::InternalInvariantViolation,
              "materialized path revisits a vertex");
      seen[static_cast<std::size_t>(at)] = 1;
      w = checked_add(w, g_.dart_weight(d));
    }
    require(w == out.paths[i].weight, ErrorCode::InternalInvariantViolation,
            "materialized weight disagrees with the recorded weight");
  }
};

// Convenience wrapper.
inline ImplicitPathSet solve_noncrossing(const PlaneGraph& g, const PreparedInstance& inst,
                                         SolverOptions opt = {}) {
  Solver s(g, inst, opt);
  return s.solve();
}

}  // namespace ncsp
