#include "maidkit/patterns.hpp"

#include <algorithm>
#include <deque>

#include "maidkit/simplify.hpp"
#include "path_search.hpp"

namespace maidkit {

namespace {

using detail::IndexPath;
using detail::IndexQuery;

struct Downstream {
  NodeIndex decision;
  IndexPath witness;  // directed, decision-free
};

class Detector {
 public:
  Detector(const Maid& maid, std::string_view d,
           const EffectivenessMap& effectiveness, const DetectorOptions& options)
      : maid_(maid),
        d_(maid.index_of(d)),
        effective_(effectiveness_mask(maid, effectiveness)),
        options_(options) {
    if (!maid_.is_decision(d_)) {
      throw MaidError("'" + std::string(d) + "' is not a decision node");
    }
    own_utilities_ = maid_.utilities_of(maid_.node(d_).owner);
  }

  std::vector<PatternInstance> direct_effect() {
    std::vector<PatternInstance> out;
    for (NodeIndex u : own_utilities_) {
      auto path = directed(d_, u, InteriorDecisions::ForbidAll, {});
      if (!path) continue;
      PatternInstance inst = make(PatternKind::DirectEffect, u);
      inst.witness_paths.push_back({"d_to_u", to_path(*path)});
      out.push_back(std::move(inst));
      if (first_only()) break;
    }
    return out;
  }

  std::vector<PatternInstance> manipulation() {
    std::vector<PatternInstance> out;
    for (NodeIndex u : own_utilities_) {
      for (const auto& down : downstream()) {
        const NodeIndex n = down.decision;
        auto n_to_u = directed(n, u, InteriorDecisions::RequireEffective, {});
        if (!n_to_u) continue;
        for (NodeIndex u_prime : maid_.utilities_of(maid_.node(n).owner)) {
          auto d_to_u_prime =
              directed(d_, u_prime, InteriorDecisions::RequireEffective, {n});
          if (!d_to_u_prime) continue;
          PatternInstance inst = make(PatternKind::Manipulation, u);
          inst.n = id(n);
          inst.u_prime = id(u_prime);
          inst.witness_paths = {{"d_to_n", to_path(down.witness)},
                                {"n_to_u", to_path(*n_to_u)},
                                {"d_to_u_prime", to_path(*d_to_u_prime)}};
          out.push_back(std::move(inst));
          if (first_only()) return out;
        }
      }
    }
    return out;
  }

  std::vector<PatternInstance> signaling() {
    std::vector<PatternInstance> out;
    const auto desc_d = descendant_mask(maid_, d_);
    const auto ancestors = strict_ancestors(d_);
    for (NodeIndex u : own_utilities_) {
      for (const auto& down : downstream()) {
        const NodeIndex n = down.decision;
        std::vector<NodeIndex> w_prime;
        for (NodeIndex p : maid_.parents(n)) {
          if (!desc_d[p]) w_prime.push_back(p);
        }
        auto n_to_u = directed(n, u, InteriorDecisions::RequireEffective, {});
        if (!n_to_u) continue;
        for (NodeIndex u_prime : maid_.utilities_of(maid_.node(n).owner)) {
          for (NodeIndex a : ancestors) {
            auto back_door = undirected(a, u_prime, FirstEdge::IntoSource, w_prime,
                                        /*require_collider=*/false);
            if (!back_door) continue;
            const auto desc_a = descendant_mask(maid_, a);
            std::vector<NodeIndex> w;
            for (NodeIndex p : maid_.parents(d_)) {
              if (!desc_a[p]) w.push_back(p);
            }
            auto a_to_u = undirected(a, u, FirstEdge::Any, w, false);
            if (!a_to_u) continue;
            auto a_to_d = directed(a, d_, InteriorDecisions::RequireEffective, {},
                                   /*any_decision=*/true);
            PatternInstance inst = make(PatternKind::Signaling, u);
            inst.n = id(n);
            inst.u_prime = id(u_prime);
            inst.a = id(a);
            inst.witness_paths = {{"d_to_n", to_path(down.witness)},
                                  {"n_to_u", to_path(*n_to_u)},
                                  {"a_to_d", to_path(*a_to_d)},
                                  {"a_to_u_prime", to_path(*back_door)},
                                  {"a_to_u", to_path(*a_to_u)}};
            out.push_back(std::move(inst));
            if (first_only()) return out;
          }
        }
      }
    }
    return out;
  }

  std::vector<PatternInstance> reveal_deny() {
    std::vector<PatternInstance> out;
    const auto desc_d = descendant_mask(maid_, d_);
    for (NodeIndex u : own_utilities_) {
      for (const auto& down : downstream()) {
        const NodeIndex n = down.decision;
        std::vector<NodeIndex> w;
        for (NodeIndex p : maid_.parents(n)) {
          if (options_.reveal_deny_blocking == RevealDenyBlocking::AllParents ||
              !desc_d[p]) {
            w.push_back(p);
          }
        }
        auto n_to_u = directed(n, u, InteriorDecisions::RequireEffective, {});
        if (!n_to_u) continue;
        for (NodeIndex u_prime : maid_.utilities_of(maid_.node(n).owner)) {
          auto front_door = undirected(d_, u_prime, FirstEdge::OutOfSource, w,
                                       /*require_collider=*/true);
          if (!front_door) continue;
          PatternInstance inst = make(PatternKind::RevealDeny, u);
          inst.n = id(n);
          inst.u_prime = id(u_prime);
          inst.witness_paths = {{"d_to_n", to_path(down.witness)},
                                {"n_to_u", to_path(*n_to_u)},
                                {"d_to_u_prime", to_path(*front_door)}};
          out.push_back(std::move(inst));
          if (first_only()) return out;
        }
      }
    }
    return out;
  }

 private:
  bool first_only() const { return options_.mode == WitnessMode::FirstWitness; }

  const NodeId& id(NodeIndex v) const { return maid_.node(v).id; }

  Path to_path(const IndexPath& p) const { return detail::to_path(maid_, p); }

  PatternInstance make(PatternKind kind, NodeIndex u) const {
    PatternInstance inst;
    inst.kind = kind;
    inst.decision = id(d_);
    inst.u = id(u);
    return inst;
  }

  std::optional<IndexPath> directed(NodeIndex x, NodeIndex y,
                                    InteriorDecisions interior,
                                    std::vector<NodeIndex> avoid,
                                    bool any_decision = false) const {
    IndexQuery q;
    q.source = x;
    q.target = y;
    q.edge_mode = EdgeMode::DirectedOnly;
    q.interior = interior;
    if (!avoid.empty()) {
      q.avoid.assign(maid_.size(), 0);
      for (NodeIndex v : avoid) q.avoid[v] = 1;
    }
    if (any_decision) {
      std::vector<char> all(maid_.size(), 1);
      return detail::search(maid_, q, all, nullptr);
    }
    return detail::search(maid_, q, effective_, nullptr);
  }

  std::optional<IndexPath> undirected(NodeIndex x, NodeIndex y, FirstEdge first,
                                      std::vector<NodeIndex> w,
                                      bool require_collider) const {
    IndexQuery q;
    q.source = x;
    q.target = y;
    q.edge_mode = EdgeMode::Undirected;
    q.first_edge = first;
    q.interior = InteriorDecisions::RequireEffective;
    q.require_collider = require_collider;
    q.set_blocking(maid_.size(), std::move(w));
    return detail::search(maid_, q, effective_, options_.cache);
  }

  // Decisions reachable from d along directed paths whose interior holds no
  // decision, in id order.
  const std::vector<Downstream>& downstream() {
    if (downstream_) return *downstream_;
    std::vector<std::optional<NodeIndex>> pred(maid_.size());
    std::vector<char> seen(maid_.size(), 0);
    std::deque<NodeIndex> queue{d_};
    seen[d_] = 1;
    std::vector<NodeIndex> found;
    while (!queue.empty()) {
      NodeIndex v = queue.front();
      queue.pop_front();
      for (NodeIndex c : maid_.children(v)) {
        if (seen[c]) continue;
        seen[c] = 1;
        pred[c] = v;
        if (maid_.is_decision(c)) {
          found.push_back(c);
        } else {
          queue.push_back(c);
        }
      }
    }
    std::sort(found.begin(), found.end());
    downstream_.emplace();
    for (NodeIndex n : found) {
      IndexPath path;
      for (std::optional<NodeIndex> cur = n; cur; cur = pred[*cur]) {
        path.nodes.push_back(*cur);
      }
      std::reverse(path.nodes.begin(), path.nodes.end());
      path.steps.assign(path.nodes.size() - 1, Step::Forward);
      downstream_->push_back({n, std::move(path)});
    }
    return *downstream_;
  }

  std::vector<NodeIndex> strict_ancestors(NodeIndex x) const {
    std::vector<char> seen(maid_.size(), 0);
    std::vector<NodeIndex> stack{x};
    while (!stack.empty()) {
      NodeIndex v = stack.back();
      stack.pop_back();
      for (NodeIndex p : maid_.parents(v)) {
        if (!seen[p]) {
          seen[p] = 1;
          stack.push_back(p);
        }
      }
    }
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < maid_.size(); ++v) {
      if (seen[v] && v != x) out.push_back(v);
    }
    return out;
  }

  const Maid& maid_;
  NodeIndex d_;
  std::vector<char> effective_;
  const DetectorOptions& options_;
  std::vector<NodeIndex> own_utilities_;
  std::optional<std::vector<Downstream>> downstream_;
};

}  // namespace

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::DirectEffect:
      return "DirectEffect";
    case PatternKind::Manipulation:
      return "Manipulation";
    case PatternKind::Signaling:
      return "Signaling";
    case PatternKind::RevealDeny:
      return "RevealDeny";
  }
  return "Unknown";
}

bool PatternInstance::same_binding(const PatternInstance& other) const {
  return kind == other.kind && decision == other.decision && u == other.u &&
         n == other.n && u_prime == other.u_prime && a == other.a;
}

std::vector<PatternInstance> direct_effect(const Maid& maid, std::string_view d,
                                           const EffectivenessMap& effectiveness,
                                           const DetectorOptions& options) {
  return Detector(maid, d, effectiveness, options).direct_effect();
}

std::vector<PatternInstance> manipulation(const Maid& maid, std::string_view d,
                                          const EffectivenessMap& effectiveness,
                                          const DetectorOptions& options) {
  return Detector(maid, d, effectiveness, options).manipulation();
}

std::vector<PatternInstance> signaling(const Maid& maid, std::string_view d,
                                       const EffectivenessMap& effectiveness,
                                       const DetectorOptions& options) {
  return Detector(maid, d, effectiveness, options).signaling();
}

std::vector<PatternInstance> reveal_deny(const Maid& maid, std::string_view d,
                                         const EffectivenessMap& effectiveness,
                                         const DetectorOptions& options) {
  return Detector(maid, d, effectiveness, options).reveal_deny();
}

std::vector<PatternInstance> detect_patterns(const Maid& maid, std::string_view d,
                                             const EffectivenessMap& effectiveness,
                                             const DetectorOptions& options,
                                             bool short_circuit) {
  Detector detector(maid, d, effectiveness, options);
  std::vector<PatternInstance> out;
  auto append = [&out](std::vector<PatternInstance> found) {
    for (auto& inst : found) out.push_back(std::move(inst));
  };
  append(detector.direct_effect());
  if (short_circuit && !out.empty()) return out;
  append(detector.manipulation());
  if (short_circuit && !out.empty()) return out;
  append(detector.signaling());
  if (short_circuit && !out.empty()) return out;
  append(detector.reveal_deny());
  return out;
}

std::vector<PatternInstance> PatternReport::all() const {
  std::vector<PatternInstance> out;
  for (const auto& [_, list] : by_decision) {
    out.insert(out.end(), list.begin(), list.end());
  }
  return out;
}

PatternReport enumerate_patterns(const Maid& maid, const EnumerateOptions& options) {
  if (auto diags = validate(maid); !diags.empty()) {
    throw MaidError("invalid diagram: " + diags.front().message);
  }
  PatternReport report;
  Maid graph = maid;
  if (options.original) {
    report.flags = all_effective(maid);
  } else {
    SimplifyOptions so;
    so.memoize = options.memoize;
    so.reveal_deny_blocking = options.reveal_deny_blocking;
    SimplificationResult result = simplify(maid, so);
    graph = std::move(result.final);
    report.flags = std::move(result.effectiveness);
  }

  BlockCache cache(options.memoize);
  DetectorOptions detector_options;
  detector_options.mode = WitnessMode::All;
  detector_options.reveal_deny_blocking = options.reveal_deny_blocking;
  detector_options.cache = &cache;
  for (NodeIndex d : maid.decisions()) {
    const NodeId& id = maid.node(d).id;
    auto& list = report.by_decision[id];
    auto idx = graph.find(id);
    if (!idx || !graph.is_decision(*idx)) continue;
    list = detect_patterns(graph, id, report.flags, detector_options,
                           /*short_circuit=*/false);
  }
  return report;
}

}  // namespace maidkit
