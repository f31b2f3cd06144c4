#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maidkit/analysis.hpp"
#include "maidkit/core.hpp"

namespace maidkit {

enum class PatternKind { DirectEffect, Manipulation, Signaling, RevealDeny };

std::string_view to_string(PatternKind kind);

enum class WitnessMode { FirstWitness, All };

/// Blocking set used by the revealing-denying front-door query: all parents
/// of the downstream decision, or only those that are not descendants of the
/// deciding node (the literal listing, kept for study; it can never open the
/// first collider of a front-door path).
enum class RevealDenyBlocking { AllParents, NonDescendantParents };

struct NamedPath {
  std::string name;
  Path path;

  bool operator==(const NamedPath&) const = default;
};

/// One reasoning-pattern instance for decision `decision`.
///
/// Bindings: `u` is a utility of the decision's owner; `n` a downstream
/// decision reached by a directed decision-free path; `u_prime` a utility of
/// n's owner; `a` an ancestor of the decision (signaling only).
struct PatternInstance {
  PatternKind kind = PatternKind::DirectEffect;
  NodeId decision;
  NodeId u;
  std::optional<NodeId> n;
  std::optional<NodeId> u_prime;
  std::optional<NodeId> a;
  std::vector<NamedPath> witness_paths;

  bool operator==(const PatternInstance&) const = default;
  /// Kind and bindings only; ignores witnesses.
  bool same_binding(const PatternInstance& other) const;
};

struct DetectorOptions {
  WitnessMode mode = WitnessMode::FirstWitness;
  RevealDenyBlocking reveal_deny_blocking = RevealDenyBlocking::AllParents;
  BlockCache* cache = nullptr;
};

std::vector<PatternInstance> direct_effect(const Maid& maid, std::string_view d,
                                           const EffectivenessMap& effectiveness,
                                           const DetectorOptions& options = {});

std::vector<PatternInstance> manipulation(const Maid& maid, std::string_view d,
                                          const EffectivenessMap& effectiveness,
                                          const DetectorOptions& options = {});

std::vector<PatternInstance> signaling(const Maid& maid, std::string_view d,
                                       const EffectivenessMap& effectiveness,
                                       const DetectorOptions& options = {});

std::vector<PatternInstance> reveal_deny(const Maid& maid, std::string_view d,
                                         const EffectivenessMap& effectiveness,
                                         const DetectorOptions& options = {});

/// Runs the four detectors in order. With `short_circuit` the first kind
/// that yields an instance ends the evaluation.
std::vector<PatternInstance> detect_patterns(const Maid& maid, std::string_view d,
                                             const EffectivenessMap& effectiveness,
                                             const DetectorOptions& options,
                                             bool short_circuit);

struct PatternReport {
  // Every decision of the input diagram, including eliminated ones (empty).
  std::map<NodeId, std::vector<PatternInstance>> by_decision;
  EffectivenessMap flags;

  std::vector<PatternInstance> all() const;
};

struct EnumerateOptions {
  /// Run the detectors on the input graph with every decision effective
  /// instead of on the simplification fixpoint.
  bool original = false;
  RevealDenyBlocking reveal_deny_blocking = RevealDenyBlocking::AllParents;
  bool memoize = true;
};

/// Lists every reasoning-pattern instance with witnesses. Throws MaidError
/// when the diagram does not validate.
PatternReport enumerate_patterns(const Maid& maid,
                                 const EnumerateOptions& options = {});

}  // namespace maidkit
