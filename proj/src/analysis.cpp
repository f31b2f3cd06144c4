#include "maidkit/analysis.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>

#include "path_search.hpp"

namespace maidkit {

namespace detail {

namespace {

constexpr int kDown = 0;  // arrived along an edge pointing into the node
constexpr int kUp = 1;    // arrived from a child, against the edge

bool in_mask(const std::vector<char>& mask, NodeIndex v) {
  return !mask.empty() && mask[v] != 0;
}

class Searcher {
 public:
  Searcher(const Maid& maid, const IndexQuery& q, std::span<const char> effective,
           BlockCache* cache)
      : maid_(maid), q_(q), effective_(effective), cache_(cache) {}

  bool interior_ok(NodeIndex v) const {
    if (v == q_.source || v == q_.target) return false;
    if (in_mask(q_.avoid, v)) return false;
    if (maid_.is_decision(v)) {
      if (q_.interior == InteriorDecisions::ForbidAll) return false;
      if (!effective_[v]) return false;
    }
    return true;
  }

  bool collider_open(NodeIndex v) {
    if (q_.collider_policy == ColliderPolicy::CollidersOpen) return true;
    if (cache_ != nullptr) return !cache_->blocked(maid_, v, q_.w_sorted);
    return !collider_blocked_uncached(maid_, v, q_.w_sorted);
  }

  bool undirected() const { return q_.edge_mode == EdgeMode::Undirected; }

  // Calls `emit(next, dir, collider)` for every legal move out of interior
  // node `v` entered in direction `dir`.
  template <typename Emit>
  void expand(NodeIndex v, int dir, bool collider, Emit&& emit) {
    const bool in_w = in_mask(q_.in_w, v);
    if (dir == kDown) {
      if (!in_w) {
        for (NodeIndex c : maid_.children(v)) emit(c, kDown, collider);
      }
      if (undirected() && !maid_.parents(v).empty() && collider_open(v)) {
        for (NodeIndex p : maid_.parents(v)) emit(p, kUp, true);
      }
    } else if (!in_w) {
      for (NodeIndex p : maid_.parents(v)) emit(p, kUp, collider);
      for (NodeIndex c : maid_.children(v)) emit(c, kDown, collider);
    }
  }

  template <typename Emit>
  void seed(Emit&& emit) {
    if (q_.first_edge != FirstEdge::IntoSource) {
      for (NodeIndex c : maid_.children(q_.source)) emit(c, kDown, false);
    }
    if (undirected() && q_.first_edge != FirstEdge::OutOfSource) {
      for (NodeIndex p : maid_.parents(q_.source)) emit(p, kUp, false);
    }
  }

  // Breadth-first search over (node, entry direction, collider seen). Finds a
  // shortest qualifying walk; walks may revisit nodes.
  std::optional<IndexPath> walk_search() {
    const std::size_t n = maid_.size();
    constexpr std::int64_t kUnvisited = -2;
    constexpr std::int64_t kStart = -1;
    std::vector<std::int64_t> pred(n * 4, kUnvisited);
    std::deque<std::size_t> queue;
    auto id_of = [](NodeIndex v, int dir, bool col) {
      return v * 4 + static_cast<std::size_t>(dir) * 2 + (col ? 1 : 0);
    };
    std::int64_t current = kStart;
    auto push = [&](NodeIndex v, int dir, bool col) {
      const std::size_t id = id_of(v, dir, col);
      if (pred[id] != kUnvisited) return;
      pred[id] = current;
      queue.push_back(id);
    };
    seed(push);
    while (!queue.empty()) {
      const std::size_t id = queue.front();
      queue.pop_front();
      const NodeIndex v = id / 4;
      const int dir = static_cast<int>((id / 2) % 2);
      const bool col = (id % 2) != 0;
      if (v == q_.target) {
        if (!q_.require_collider || col) return rebuild(pred, id);
        continue;
      }
      if (!interior_ok(v)) continue;
      current = static_cast<std::int64_t>(id);
      expand(v, dir, col, push);
    }
    return std::nullopt;
  }

  // Exhaustive depth-first search over simple paths. Exponential in the
  // worst case; only used when a walk witness cannot be shortened into a
  // qualifying simple path.
  std::optional<IndexPath> simple_search() {
    std::vector<char> on_path(maid_.size(), 0);
    on_path[q_.source] = 1;
    IndexPath path;
    path.nodes.push_back(q_.source);
    bool found = false;
    std::function<void(NodeIndex, int, bool)> visit = [&](NodeIndex v, int dir,
                                                          bool col) {
      if (found || on_path[v]) return;
      path.nodes.push_back(v);
      path.steps.push_back(dir == kDown ? Step::Forward : Step::Backward);
      if (v == q_.target) {
        if (!q_.require_collider || col) {
          found = true;
          return;
        }
      } else if (interior_ok(v)) {
        on_path[v] = 1;
        expand(v, dir, col, [&](NodeIndex next, int ndir, bool ncol) {
          if (!found) visit(next, ndir, ncol);
        });
        on_path[v] = 0;
      }
      if (!found) {
        path.nodes.pop_back();
        path.steps.pop_back();
      }
    };
    seed([&](NodeIndex next, int dir, bool col) {
      if (!found) visit(next, dir, col);
    });
    if (!found) return std::nullopt;
    return path;
  }

 private:
  IndexPath rebuild(const std::vector<std::int64_t>& pred, std::size_t id) const {
    IndexPath path;
    std::int64_t cur = static_cast<std::int64_t>(id);
    while (cur >= 0) {
      const auto state = static_cast<std::size_t>(cur);
      path.nodes.push_back(state / 4);
      path.steps.push_back((state / 2) % 2 == kDown ? Step::Forward : Step::Backward);
      cur = pred[state];
    }
    path.nodes.push_back(q_.source);
    std::reverse(path.nodes.begin(), path.nodes.end());
    std::reverse(path.steps.begin(), path.steps.end());
    return path;
  }

  const Maid& maid_;
  const IndexQuery& q_;
  std::span<const char> effective_;
  BlockCache* cache_;
};

// Cuts every loop out of a walk: between the first and last occurrence of a
// repeated node the walk is dropped. Interior blocking is preserved by this
// operation, but a required collider may be cut away.
IndexPath shorten(IndexPath walk) {
  for (std::size_t i = 0; i < walk.nodes.size(); ++i) {
    std::size_t last = i;
    for (std::size_t j = walk.nodes.size(); j-- > i + 1;) {
      if (walk.nodes[j] == walk.nodes[i]) {
        last = j;
        break;
      }
    }
    if (last == i) continue;
    walk.nodes.erase(walk.nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                     walk.nodes.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    walk.steps.erase(walk.steps.begin() + static_cast<std::ptrdiff_t>(i),
                     walk.steps.begin() + static_cast<std::ptrdiff_t>(last));
  }
  return walk;
}

}  // namespace

void IndexQuery::set_blocking(std::size_t size, std::vector<NodeIndex> w) {
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  in_w.assign(size, 0);
  for (NodeIndex v : w) in_w[v] = 1;
  w_sorted = std::move(w);
}

bool collider_blocked_uncached(const Maid& maid, NodeIndex b,
                               std::span<const NodeIndex> w_sorted) {
  if (w_sorted.empty()) return true;
  auto in_w = [&](NodeIndex v) {
    return std::binary_search(w_sorted.begin(), w_sorted.end(), v);
  };
  std::vector<char> seen(maid.size(), 0);
  std::vector<NodeIndex> stack{b};
  seen[b] = 1;
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    if (in_w(v)) return false;
    for (NodeIndex c : maid.children(v)) {
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return true;
}

bool satisfies(const Maid& maid, const IndexQuery& q,
               std::span<const char> effective, const IndexPath& path) {
  const auto& nodes = path.nodes;
  if (nodes.size() < 2 || path.steps.size() + 1 != nodes.size()) return false;
  if (nodes.front() != q.source || nodes.back() != q.target) return false;
  std::vector<char> seen(maid.size(), 0);
  for (NodeIndex v : nodes) {
    if (v >= maid.size() || seen[v]) return false;
    seen[v] = 1;
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const bool forward = path.steps[i] == Step::Forward;
    if (forward ? !maid.has_edge(nodes[i], nodes[i + 1])
                : !maid.has_edge(nodes[i + 1], nodes[i])) {
      return false;
    }
    if (!forward && q.edge_mode == EdgeMode::DirectedOnly) return false;
  }
  if (q.first_edge == FirstEdge::IntoSource && path.steps.front() != Step::Backward) {
    return false;
  }
  if (q.first_edge == FirstEdge::OutOfSource && path.steps.front() != Step::Forward) {
    return false;
  }
  bool has_collider = false;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    const NodeIndex v = nodes[i];
    if (in_mask(q.avoid, v)) return false;
    if (maid.is_decision(v)) {
      if (q.interior == InteriorDecisions::ForbidAll || !effective[v]) return false;
    }
    const bool collider =
        path.steps[i - 1] == Step::Forward && path.steps[i] == Step::Backward;
    if (collider) {
      has_collider = true;
      if (q.collider_policy == ColliderPolicy::Standard &&
          collider_blocked_uncached(maid, v, q.w_sorted)) {
        return false;
      }
    } else if (in_mask(q.in_w, v)) {
      return false;
    }
  }
  return !q.require_collider || has_collider;
}

std::optional<IndexPath> search(const Maid& maid, const IndexQuery& q,
                                std::span<const char> effective,
                                BlockCache* cache) {
  Searcher searcher(maid, q, effective, cache);
  auto walk = searcher.walk_search();
  if (!walk) return std::nullopt;
  IndexPath path = shorten(std::move(*walk));
  if (satisfies(maid, q, effective, path)) return path;
  return searcher.simple_search();
}

Path to_path(const Maid& maid, const IndexPath& path) {
  Path out;
  out.nodes.reserve(path.nodes.size());
  for (NodeIndex v : path.nodes) out.nodes.push_back(maid.node(v).id);
  out.steps = path.steps;
  return out;
}

}  // namespace detail

namespace {

detail::IndexQuery to_index_query(const Maid& maid, const PathQuery& q) {
  detail::IndexQuery out;
  out.source = maid.index_of(q.source);
  out.target = maid.index_of(q.target);
  if (out.source == out.target) {
    throw MaidError("path query needs distinct endpoints ('" + q.source + "')");
  }
  out.edge_mode = q.edge_mode;
  out.first_edge = q.first_edge;
  out.interior = q.interior_decisions;
  out.collider_policy = q.collider_policy;
  out.require_collider = q.require_collider;
  if (!q.avoid.empty()) {
    out.avoid.assign(maid.size(), 0);
    for (const auto& id : q.avoid) {
      if (id == q.source || id == q.target) {
        throw MaidError("avoid set must not contain a path endpoint ('" + id + "')");
      }
      out.avoid[maid.index_of(id)] = 1;
    }
  }
  std::vector<NodeIndex> w;
  for (const auto& id : q.blocking_set) w.push_back(maid.index_of(id));
  out.set_blocking(maid.size(), std::move(w));
  return out;
}

std::optional<Path> run_query(const Maid& maid, const PathQuery& q,
                              const EffectivenessMap& effectiveness,
                              BlockCache* cache) {
  return find_path(maid, q, effectiveness, cache);
}

}  // namespace

void EdgeMask::disable(NodeId from, NodeId to) {
  disabled_.emplace(std::move(from), std::move(to));
}

void EdgeMask::enable(const NodeId& from, const NodeId& to) {
  disabled_.erase({from, to});
}

bool EdgeMask::enabled(const NodeId& from, const NodeId& to) const {
  return !disabled_.contains({from, to});
}

std::size_t BlockCache::KeyHash::operator()(const Key& key) const {
  std::size_t h = std::hash<NodeIndex>{}(key.collider);
  for (NodeIndex v : key.w) {
    h ^= std::hash<NodeIndex>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

bool BlockCache::blocked(const Maid& maid, NodeIndex b,
                         std::span<const NodeIndex> w) {
  if (bound_revision_ != maid.revision()) {
    if (bound_revision_) invalidate();
    bound_revision_ = maid.revision();
  }
  if (enabled_) {
    Key key{b, std::vector<NodeIndex>(w.begin(), w.end())};
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
    ++misses_;
    const bool result = detail::collider_blocked_uncached(maid, b, w);
    entries_.emplace(std::move(key), result);
    return result;
  }
  ++misses_;
  return detail::collider_blocked_uncached(maid, b, w);
}

void BlockCache::invalidate() {
  entries_.clear();
  ++generation_;
}

bool d_separated(const Maid& maid, NodeIndex x, NodeIndex y,
                 std::span<const char> in_w, std::span<const char> enabled_edges) {
  const std::size_t n = maid.size();
  auto enabled = [&](NodeIndex from, NodeIndex to) {
    return enabled_edges.empty() || enabled_edges[from * n + to] != 0;
  };
  auto observed = [&](NodeIndex v) { return !in_w.empty() && in_w[v] != 0; };

  // Ancestors of the evidence (reflexive) over enabled edges.
  std::vector<char> evidence_ancestor(n, 0);
  std::vector<NodeIndex> stack;
  for (NodeIndex v = 0; v < n; ++v) {
    if (observed(v)) {
      evidence_ancestor[v] = 1;
      stack.push_back(v);
    }
  }
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex p : maid.parents(v)) {
      if (enabled(p, v) && !evidence_ancestor[p]) {
        evidence_ancestor[p] = 1;
        stack.push_back(p);
      }
    }
  }

  // Reachable (node, direction) pairs; up = arrived from a child.
  std::vector<char> visited_up(n, 0), visited_down(n, 0);
  std::vector<std::pair<NodeIndex, bool>> frontier{{x, true}};
  while (!frontier.empty()) {
    auto [v, up] = frontier.back();
    frontier.pop_back();
    auto& mark = up ? visited_up[v] : visited_down[v];
    if (mark) continue;
    mark = 1;
    if (v == y) return false;
    if (up) {
      if (observed(v)) continue;
      for (NodeIndex p : maid.parents(v)) {
        if (enabled(p, v)) frontier.emplace_back(p, true);
      }
      for (NodeIndex c : maid.children(v)) {
        if (enabled(v, c)) frontier.emplace_back(c, false);
      }
    } else {
      if (!observed(v)) {
        for (NodeIndex c : maid.children(v)) {
          if (enabled(v, c)) frontier.emplace_back(c, false);
        }
      }
      if (evidence_ancestor[v]) {
        for (NodeIndex p : maid.parents(v)) {
          if (enabled(p, v)) frontier.emplace_back(p, true);
        }
      }
    }
  }
  return true;
}

bool d_separated(const Maid& maid, std::string_view x, std::string_view y,
                 const std::set<NodeId>& w, const EdgeMask& mask) {
  const NodeIndex xi = maid.index_of(x);
  const NodeIndex yi = maid.index_of(y);
  if (xi == yi) throw MaidError("d-separation needs two distinct nodes");
  std::vector<char> in_w(maid.size(), 0);
  for (const auto& id : w) in_w[maid.index_of(id)] = 1;
  if (in_w[xi] || in_w[yi]) {
    throw MaidError("d-separation endpoints must not be in the conditioning set");
  }
  std::vector<char> enabled;
  if (!mask.disabled().empty()) {
    const std::size_t n = maid.size();
    enabled.assign(n * n, 1);
    for (const auto& [from, to] : mask.disabled()) {
      auto f = maid.find(from);
      auto t = maid.find(to);
      if (f && t) enabled[*f * n + *t] = 0;
    }
  }
  return d_separated(maid, xi, yi, in_w, enabled);
}

std::optional<Path> find_path(const Maid& maid, const PathQuery& q,
                              const EffectivenessMap& effectiveness,
                              BlockCache* cache) {
  const detail::IndexQuery iq = to_index_query(maid, q);
  const auto effective = effectiveness_mask(maid, effectiveness);
  auto found = detail::search(maid, iq, effective, cache);
  if (!found) return std::nullopt;
  return detail::to_path(maid, *found);
}

bool path_satisfies(const Maid& maid, const PathQuery& q,
                    const EffectivenessMap& effectiveness, const Path& path) {
  const detail::IndexQuery iq = to_index_query(maid, q);
  detail::IndexPath ip;
  for (const auto& id : path.nodes) {
    auto idx = maid.find(id);
    if (!idx) return false;
    ip.nodes.push_back(*idx);
  }
  ip.steps = path.steps;
  return detail::satisfies(maid, iq, effectiveness_mask(maid, effectiveness), ip);
}

std::optional<Path> directed_decision_free_path(const Maid& maid,
                                                std::string_view x,
                                                std::string_view y) {
  PathQuery q;
  q.source = x;
  q.target = y;
  q.edge_mode = EdgeMode::DirectedOnly;
  q.interior_decisions = InteriorDecisions::ForbidAll;
  return run_query(maid, q, {}, nullptr);
}

std::optional<Path> directed_effective_path(const Maid& maid, std::string_view x,
                                            std::string_view y,
                                            const EffectivenessMap& effectiveness) {
  return directed_effective_path_avoiding(maid, x, y, {}, effectiveness);
}

std::optional<Path> directed_effective_path_avoiding(
    const Maid& maid, std::string_view x, std::string_view y,
    const std::set<NodeId>& avoid, const EffectivenessMap& effectiveness) {
  PathQuery q;
  q.source = x;
  q.target = y;
  q.edge_mode = EdgeMode::DirectedOnly;
  q.interior_decisions = InteriorDecisions::RequireEffective;
  q.avoid = avoid;
  return run_query(maid, q, effectiveness, nullptr);
}

std::optional<Path> back_door_path(const Maid& maid, std::string_view x,
                                   std::string_view y, const std::set<NodeId>& w,
                                   const EffectivenessMap& effectiveness,
                                   BlockCache* cache) {
  PathQuery q;
  q.source = x;
  q.target = y;
  q.first_edge = FirstEdge::IntoSource;
  q.blocking_set = w;
  return run_query(maid, q, effectiveness, cache);
}

std::optional<Path> front_door_indirect_path(
    const Maid& maid, std::string_view x, std::string_view y,
    const std::set<NodeId>& w, const EffectivenessMap& effectiveness,
    BlockCache* cache) {
  PathQuery q;
  q.source = x;
  q.target = y;
  q.first_edge = FirstEdge::OutOfSource;
  q.require_collider = true;
  q.blocking_set = w;
  return run_query(maid, q, effectiveness, cache);
}

std::optional<Path> effective_path(const Maid& maid, std::string_view x,
                                   std::string_view y, const std::set<NodeId>& w,
                                   const EffectivenessMap& effectiveness,
                                   BlockCache* cache) {
  PathQuery q;
  q.source = x;
  q.target = y;
  q.blocking_set = w;
  return run_query(maid, q, effectiveness, cache);
}

bool collider_blocked(const Maid& maid, std::string_view b,
                      const std::set<NodeId>& w, BlockCache& cache) {
  const NodeIndex bi = maid.index_of(b);
  std::vector<NodeIndex> ws;
  for (const auto& id : w) ws.push_back(maid.index_of(id));
  std::sort(ws.begin(), ws.end());
  return cache.blocked(maid, bi, ws);
}

void invalidate_cache(BlockCache& cache) { cache.invalidate(); }

}  // namespace maidkit
