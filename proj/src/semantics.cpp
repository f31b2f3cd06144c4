#include "maidkit/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace maidkit {

namespace {

constexpr double kTolerance = 1e-9;
constexpr double kScaleGuard = 1e6;

void require_parameters(const Maid& maid) {
  if (!maid.fully_parameterized()) {
    throw MaidError("diagram is structure-only: every chance node needs a cpt "
                    "and every utility a table");
  }
}

std::size_t config_of(const Maid& maid, NodeIndex v,
                      const std::vector<std::size_t>& values) {
  std::size_t index = 0;
  for (NodeIndex p : maid.parents(v)) {
    index = index * maid.node(p).domain.size() + values[p];
  }
  return index;
}

// Exact enumeration of the joint distribution. Each chance or decision node
// contributes factor[v][config * |dom| + value]; a null factor contributes 1,
// which leaves that node free so that callers can read off per-action sums.
class Enumerator {
 public:
  explicit Enumerator(const Maid& maid) : maid_(maid), factor_(maid.size(), nullptr) {
    auto topo = maid.topological_order();
    if (!topo) throw MaidError("diagram has a cycle");
    for (NodeIndex v : *topo) {
      if (maid.kind(v) != NodeKind::Utility) order_.push_back(v);
    }
    for (NodeIndex v = 0; v < maid.size(); ++v) {
      if (maid.kind(v) == NodeKind::Chance) factor_[v] = &*maid.node(v).cpt;
    }
  }

  void set_factor(NodeIndex v, const std::vector<double>* table) { factor_[v] = table; }

  void bind(const StrategyProfile& profile, std::optional<NodeIndex> skip) {
    for (NodeIndex d : maid_.decisions()) {
      if (skip && *skip == d) {
        factor_[d] = nullptr;
        continue;
      }
      const NodeId& id = maid_.node(d).id;
      auto it = profile.rules.find(id);
      if (it == profile.rules.end()) {
        throw MaidError("profile has no rule for decision '" + id + "'");
      }
      const std::size_t expected =
          configuration_count(maid_, d) * maid_.node(d).domain.size();
      if (it->second.table.size() != expected) {
        throw MaidError("decision rule for '" + id + "' has " +
                        std::to_string(it->second.table.size()) + " entries, expected " +
                        std::to_string(expected));
      }
      factor_[d] = &it->second.table;
    }
  }

  double utility(NodeIndex u, const std::vector<std::size_t>& values) const {
    return (*maid_.node(u).table)[config_of(maid_, u, values)];
  }

  void run(const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
    std::vector<std::size_t> values(maid_.size(), 0);
    recurse(0, 1.0, values, visit);
  }

 private:
  void recurse(std::size_t pos, double prob, std::vector<std::size_t>& values,
               const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
    if (pos == order_.size()) {
      visit(values, prob);
      return;
    }
    const NodeIndex v = order_[pos];
    const std::size_t dom = maid_.node(v).domain.size();
    const std::size_t row = config_of(maid_, v, values) * dom;
    for (std::size_t a = 0; a < dom; ++a) {
      const double f = factor_[v] ? (*factor_[v])[row + a] : 1.0;
      if (f == 0.0) continue;
      values[v] = a;
      recurse(pos + 1, prob * f, values, visit);
    }
  }

  const Maid& maid_;
  std::vector<NodeIndex> order_;
  std::vector<const std::vector<double>*> factor_;
};

double agent_utility(const Enumerator& e, const std::vector<NodeIndex>& utilities,
                     const std::vector<std::size_t>& values) {
  double total = 0.0;
  for (NodeIndex u : utilities) total += e.utility(u, values);
  return total;
}

std::vector<NodeIndex> decisions_of(const Maid& maid, std::string_view agent) {
  std::vector<NodeIndex> out;
  for (NodeIndex d : maid.decisions()) {
    if (maid.node(d).owner == agent) out.push_back(d);
  }
  return out;
}

void require_agent(const Maid& maid, std::string_view agent) {
  if (!maid.agents().contains(std::string(agent))) {
    throw MaidError("unknown agent '" + std::string(agent) + "'");
  }
}

// Number of pure rules of decision d, or +inf past the guard.
double pure_rule_count(const Maid& maid, NodeIndex d) {
  return std::pow(static_cast<double>(maid.node(d).domain.size()),
                  static_cast<double>(configuration_count(maid, d)));
}

// Mixed-radix counter over (decision, configuration) slots.
class PureRuleCounter {
 public:
  PureRuleCounter(const Maid& maid, std::vector<NodeIndex> decisions)
      : maid_(maid), decisions_(std::move(decisions)) {
    for (NodeIndex d : decisions_) {
      configs_.push_back(configuration_count(maid, d));
      actions_.emplace_back(configs_.back(), 0);
    }
  }

  std::vector<DecisionRule> rules() const {
    std::vector<DecisionRule> out;
    for (std::size_t i = 0; i < decisions_.size(); ++i) {
      out.push_back(pure_rule(maid_, maid_.node(decisions_[i]).id, actions_[i]));
    }
    return out;
  }

  std::vector<std::vector<std::size_t>>& actions() { return actions_; }

  bool advance() {
    for (std::size_t i = decisions_.size(); i-- > 0;) {
      const std::size_t dom = maid_.node(decisions_[i]).domain.size();
      for (std::size_t q = configs_[i]; q-- > 0;) {
        if (++actions_[i][q] < dom) return true;
        actions_[i][q] = 0;
      }
    }
    return false;
  }

 private:
  const Maid& maid_;
  std::vector<NodeIndex> decisions_;
  std::vector<std::size_t> configs_;
  std::vector<std::vector<std::size_t>> actions_;
};

struct BestResponse {
  double value = 0.0;
  std::vector<DecisionRule> rules;  // one per decision of the agent
};

// The first decision of the agent is optimised per parent configuration;
// the agent's remaining decisions are enumerated over pure rules.
BestResponse best_response(const Maid& maid, const StrategyProfile& profile,
                           std::string_view agent) {
  require_parameters(maid);
  require_agent(maid, agent);
  const auto own = decisions_of(maid, agent);
  const auto utilities = maid.utilities_of(agent);
  Enumerator e(maid);
  if (own.empty()) {
    e.bind(profile, std::nullopt);
    BestResponse br;
    e.run([&](const auto& values, double p) {
      br.value += p * agent_utility(e, utilities, values);
    });
    return br;
  }

  const NodeIndex free = own.front();
  std::vector<NodeIndex> rest(own.begin() + 1, own.end());
  double combos = 1.0;
  for (NodeIndex d : rest) combos *= pure_rule_count(maid, d);
  if (combos > kScaleGuard) {
    throw ScaleGuardError("best response over more than 1e6 joint pure rules");
  }

  e.bind(profile, free);
  const std::size_t dom = maid.node(free).domain.size();
  const std::size_t configs = configuration_count(maid, free);
  PureRuleCounter counter(maid, rest);
  std::optional<BestResponse> best;
  std::vector<double> q_values(configs * dom);
  do {
    auto rest_rules = counter.rules();
    for (std::size_t i = 0; i < rest.size(); ++i) e.set_factor(rest[i], &rest_rules[i].table);
    std::fill(q_values.begin(), q_values.end(), 0.0);
    e.run([&](const auto& values, double p) {
      q_values[config_of(maid, free, values) * dom + values[free]] +=
          p * agent_utility(e, utilities, values);
    });
    double value = 0.0;
    std::vector<std::size_t> actions(configs, 0);
    for (std::size_t q = 0; q < configs; ++q) {
      for (std::size_t a = 1; a < dom; ++a) {
        if (q_values[q * dom + a] > q_values[q * dom + actions[q]]) actions[q] = a;
      }
      value += q_values[q * dom + actions[q]];
    }
    if (!best || value > best->value + 1e-12) {
      BestResponse candidate;
      candidate.value = value;
      candidate.rules.push_back(pure_rule(maid, maid.node(free).id, actions));
      for (auto& r : rest_rules) candidate.rules.push_back(std::move(r));
      best = std::move(candidate);
    }
  } while (counter.advance());
  return *best;
}

}  // namespace

DecisionRule uniform_rule(const Maid& maid, std::string_view d) {
  const NodeIndex v = maid.index_of(d);
  if (!maid.is_decision(v)) throw MaidError("'" + std::string(d) + "' is not a decision");
  const std::size_t dom = maid.node(v).domain.size();
  return {std::string(d),
          std::vector<double>(configuration_count(maid, v) * dom, 1.0 / dom)};
}

DecisionRule pure_rule(const Maid& maid, std::string_view d,
                       const std::vector<std::size_t>& actions) {
  const NodeIndex v = maid.index_of(d);
  if (!maid.is_decision(v)) throw MaidError("'" + std::string(d) + "' is not a decision");
  const std::size_t dom = maid.node(v).domain.size();
  const std::size_t configs = configuration_count(maid, v);
  if (actions.size() != configs) {
    throw MaidError("pure rule for '" + std::string(d) + "' needs one action per "
                    "parent configuration");
  }
  DecisionRule rule{std::string(d), std::vector<double>(configs * dom, 0.0)};
  for (std::size_t q = 0; q < configs; ++q) {
    if (actions[q] >= dom) throw MaidError("action index out of range");
    rule.table[q * dom + actions[q]] = 1.0;
  }
  return rule;
}

StrategyProfile uniform_profile(const Maid& maid) {
  StrategyProfile profile;
  for (NodeIndex d : maid.decisions()) {
    const NodeId& id = maid.node(d).id;
    profile.rules.emplace(id, uniform_rule(maid, id));
  }
  return profile;
}

StrategyProfile lift_profile(const Maid& original, const Maid& reduced,
                             const StrategyProfile& reduced_profile) {
  StrategyProfile out;
  for (NodeIndex d : original.decisions()) {
    const NodeId& id = original.node(d).id;
    auto rd = reduced.find(id);
    auto rule = reduced_profile.rules.find(id);
    if (!rd || !reduced.is_decision(*rd) || rule == reduced_profile.rules.end()) {
      out.rules.emplace(id, uniform_rule(original, id));
      continue;
    }
    const auto& parents = original.node(d).parents;
    const auto& kept = reduced.node(*rd).parents;
    std::vector<std::size_t> radix;
    for (const NodeId& p : parents) radix.push_back(original.node(p).domain.size());
    const std::size_t dom = original.node(d).domain.size();
    const std::size_t configs = configuration_count(original, d);
    DecisionRule lifted{id, std::vector<double>(configs * dom)};
    std::vector<std::size_t> digits(parents.size(), 0);
    for (std::size_t q = 0; q < configs; ++q) {
      std::size_t reduced_q = 0;
      for (const NodeId& k : kept) {
        auto pos = std::find(parents.begin(), parents.end(), k) - parents.begin();
        if (static_cast<std::size_t>(pos) == parents.size()) {
          throw MaidError("'" + k + "' is a parent of '" + id +
                          "' only in the reduced diagram");
        }
        reduced_q = reduced_q * radix[pos] + digits[pos];
      }
      std::copy_n(rule->second.table.begin() + reduced_q * dom, dom,
                  lifted.table.begin() + q * dom);
      for (std::size_t i = digits.size(); i-- > 0;) {
        if (++digits[i] < radix[i]) break;
        digits[i] = 0;
      }
    }
    out.rules.emplace(id, std::move(lifted));
  }
  return out;
}

double joint_probability(const Maid& maid, const StrategyProfile& profile,
                         const Assignment& assignment) {
  require_parameters(maid);
  std::vector<std::size_t> values(maid.size(), 0);
  for (NodeIndex v = 0; v < maid.size(); ++v) {
    const Node& node = maid.node(v);
    if (node.kind == NodeKind::Utility) continue;
    auto it = assignment.find(node.id);
    if (it == assignment.end()) {
      throw MaidError("assignment has no value for '" + node.id + "'");
    }
    auto pos = std::find(node.domain.begin(), node.domain.end(), it->second);
    if (pos == node.domain.end()) {
      throw MaidError("'" + it->second + "' is not in the domain of '" + node.id + "'");
    }
    values[v] = static_cast<std::size_t>(pos - node.domain.begin());
  }
  Enumerator e(maid);
  e.bind(profile, std::nullopt);
  double prob = 1.0;
  for (NodeIndex v = 0; v < maid.size(); ++v) {
    const Node& node = maid.node(v);
    if (node.kind == NodeKind::Utility) continue;
    const std::vector<double>& table =
        node.kind == NodeKind::Chance ? *node.cpt : profile.rules.at(node.id).table;
    prob *= table[config_of(maid, v, values) * node.domain.size() + values[v]];
  }
  return prob;
}

double expected_utility(const Maid& maid, const StrategyProfile& profile,
                        std::string_view agent) {
  require_parameters(maid);
  require_agent(maid, agent);
  const auto utilities = maid.utilities_of(agent);
  Enumerator e(maid);
  e.bind(profile, std::nullopt);
  double total = 0.0;
  e.run([&](const auto& values, double p) {
    total += p * agent_utility(e, utilities, values);
  });
  return total;
}

double best_response_gap(const Maid& maid, const StrategyProfile& profile,
                         std::string_view agent) {
  const double best = best_response(maid, profile, agent).value;
  return std::max(0.0, best - expected_utility(maid, profile, agent));
}

std::optional<StrategyProfile> find_equilibrium_small(const Maid& maid,
                                                      std::uint64_t seed) {
  require_parameters(maid);
  const auto decisions = maid.decisions();
  double profiles = 1.0;
  for (NodeIndex d : decisions) profiles *= pure_rule_count(maid, d);
  if (profiles > kScaleGuard) {
    throw ScaleGuardError("more than 1e6 pure strategy profiles");
  }

  auto all_within = [&](const StrategyProfile& profile) {
    for (const AgentId& agent : maid.agents()) {
      if (best_response_gap(maid, profile, agent) > kTolerance) return false;
    }
    return true;
  };

  // Best-response dynamics from a seeded pure start.
  std::mt19937_64 rng(seed);
  StrategyProfile profile;
  for (NodeIndex d : decisions) {
    const std::size_t dom = maid.node(d).domain.size();
    std::vector<std::size_t> actions(configuration_count(maid, d));
    for (auto& a : actions) a = std::uniform_int_distribution<std::size_t>(0, dom - 1)(rng);
    profile.rules.emplace(maid.node(d).id, pure_rule(maid, maid.node(d).id, actions));
  }
  constexpr int kRounds = 64;
  for (int round = 0; round < kRounds; ++round) {
    bool improved = false;
    for (const AgentId& agent : maid.agents()) {
      BestResponse br = best_response(maid, profile, agent);
      if (br.value > expected_utility(maid, profile, agent) + kTolerance) {
        for (auto& rule : br.rules) profile.rules[rule.decision] = std::move(rule);
        improved = true;
      }
    }
    if (!improved) return profile;
  }

  // Exhaustive fallback.
  PureRuleCounter counter(maid, decisions);
  do {
    StrategyProfile candidate;
    for (auto& rule : counter.rules()) {
      candidate.rules.emplace(rule.decision, std::move(rule));
    }
    if (all_within(candidate)) return candidate;
  } while (counter.advance());
  return std::nullopt;
}

bool is_motivated_bruteforce(const Maid& maid, std::string_view d,
                             const StrategyProfile& others) {
  require_parameters(maid);
  const NodeIndex v = maid.index_of(d);
  if (!maid.is_decision(v)) throw MaidError("'" + std::string(d) + "' is not a decision");
  const auto utilities = maid.utilities_of(maid.node(v).owner);
  Enumerator e(maid);
  e.bind(others, v);
  const std::size_t dom = maid.node(v).domain.size();
  const std::size_t configs = configuration_count(maid, v);
  std::vector<double> q_values(configs * dom, 0.0);
  std::vector<double> mass(configs * dom, 0.0);
  e.run([&](const auto& values, double p) {
    const std::size_t slot = config_of(maid, v, values) * dom + values[v];
    q_values[slot] += p * agent_utility(e, utilities, values);
    mass[slot] += p;
  });
  // d is free, so every action at q carries the same mass P(q).
  for (std::size_t q = 0; q < configs; ++q) {
    const double pq = mass[q * dom];
    if (pq <= 1e-12) continue;
    double lo = q_values[q * dom] / pq;
    double hi = lo;
    for (std::size_t a = 1; a < dom; ++a) {
      const double eu = q_values[q * dom + a] / pq;
      lo = std::min(lo, eu);
      hi = std::max(hi, eu);
    }
    if (hi - lo > kTolerance) return true;
  }
  return false;
}

std::string_view to_string(VerifyStatus status) {
  switch (status) {
    case VerifyStatus::Pass:
      return "pass";
    case VerifyStatus::Fail:
      return "fail";
    case VerifyStatus::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

VerificationReport verify_simplification(const Maid& original,
                                         const SimplificationResult& result,
                                         std::uint64_t seed, double tolerance) {
  require_parameters(original);
  VerificationReport report;
  report.tolerance = tolerance;
  report.equilibrium = find_equilibrium_small(result.final, seed);
  if (!report.equilibrium) return report;
  const StrategyProfile lifted = lift_profile(original, result.final, *report.equilibrium);
  report.status = VerifyStatus::Pass;
  for (const AgentId& agent : original.agents()) {
    const double gap = best_response_gap(original, lifted, agent);
    report.gaps[agent] = gap;
    if (gap > tolerance) report.status = VerifyStatus::Fail;
  }
  return report;
}

LeafMetric leaf_metric(const Maid& maid) {
  LeafMetric metric;
  metric.monolithic = 1;
  for (NodeIndex d : maid.decisions()) {
    metric.monolithic *= maid.node(d).domain.size();
    std::vector<char> scope(maid.size(), 0);
    scope[d] = 1;
    for (NodeIndex u : maid.utilities_of(maid.node(d).owner)) {
      for (NodeIndex p : maid.parents(u)) {
        if (maid.kind(p) != NodeKind::Utility) scope[p] = 1;
      }
    }
    BigCount leaves = 1;
    for (NodeIndex v = 0; v < maid.size(); ++v) {
      if (scope[v]) leaves *= maid.node(v).domain.size();
    }
    metric.decoupled_total += leaves;
    metric.per_decision.emplace_back(maid.node(d).id, std::move(leaves));
  }
  return metric;
}

}  // namespace maidkit
