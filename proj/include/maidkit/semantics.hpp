#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "maidkit/core.hpp"
#include "maidkit/simplify.hpp"

namespace maidkit {

/// Thrown when an exhaustive computation would exceed its size guard.
class ScaleGuardError : public MaidError {
 public:
  using MaidError::MaidError;
};

/// Parent configuration -> distribution over the decision's domain, stored
/// like a chance CPT: one row of `domain.size()` entries per configuration,
/// last parent varying fastest.
struct DecisionRule {
  NodeId decision;
  std::vector<double> table;

  bool operator==(const DecisionRule&) const = default;
};

struct StrategyProfile {
  std::map<NodeId, DecisionRule> rules;

  bool operator==(const StrategyProfile&) const = default;
};

/// Node id -> value label, for chance and decision nodes.
using Assignment = std::map<NodeId, std::string>;

DecisionRule uniform_rule(const Maid& maid, std::string_view d);
/// `actions[q]` is the action index played at parent configuration q.
DecisionRule pure_rule(const Maid& maid, std::string_view d,
                       const std::vector<std::size_t>& actions);
StrategyProfile uniform_profile(const Maid& maid);

/// Re-expresses rules over `reduced` (a simplification of `original`) on the
/// original graph: each surviving decision ignores the parents it lost, and
/// every decision absent from `reduced` plays uniformly.
StrategyProfile lift_profile(const Maid& original, const Maid& reduced,
                             const StrategyProfile& reduced_profile);

double joint_probability(const Maid& maid, const StrategyProfile& profile,
                         const Assignment& assignment);

double expected_utility(const Maid& maid, const StrategyProfile& profile,
                        std::string_view agent);

/// Best gain available to `agent` by jointly replacing all of its decision
/// rules, floored at 0.
double best_response_gap(const Maid& maid, const StrategyProfile& profile,
                         std::string_view agent);

/// A pure-strategy equilibrium (every gap <= 1e-9), or nullopt when none
/// exists. Throws ScaleGuardError above 1e6 pure profiles.
std::optional<StrategyProfile> find_equilibrium_small(const Maid& maid,
                                                      std::uint64_t seed);

/// Whether d's owner strictly prefers one action to another at some parent
/// configuration of positive probability. `others` must cover every
/// decision except `d`.
bool is_motivated_bruteforce(const Maid& maid, std::string_view d,
                             const StrategyProfile& others);

enum class VerifyStatus { Pass, Fail, Inconclusive };

std::string_view to_string(VerifyStatus status);

struct VerificationReport {
  VerifyStatus status = VerifyStatus::Inconclusive;
  std::map<AgentId, double> gaps;  // in the original game; empty if inconclusive
  std::optional<StrategyProfile> equilibrium;  // of the simplified game
  double tolerance = 1e-9;
};

/// Solves the simplified game, lifts the equilibrium to the original game
/// (eliminated decisions uniform) and measures every agent's gap there.
/// Throws MaidError on structure-only input.
VerificationReport verify_simplification(const Maid& original,
                                         const SimplificationResult& result,
                                         std::uint64_t seed, double tolerance = 1e-9);

using BigCount = boost::multiprecision::cpp_int;

struct LeafMetric {
  BigCount monolithic;
  std::vector<std::pair<NodeId, BigCount>> per_decision;  // id order
  BigCount decoupled_total;
};

LeafMetric leaf_metric(const Maid& maid);

}  // namespace maidkit
