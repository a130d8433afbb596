/*
Copyright 2026 The partopt Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "partopt/error.hpp"
#include "partopt/expr.hpp"

namespace partopt {

using StateIndex = std::size_t;
using ActionId = std::string;

/// Action added to states that lose every enabled action during pruning.
inline constexpr std::string_view kStutterAction = "stutter";

/// Parameters whose values always sum to one (one probability distribution).
struct ParamGroup {
  std::vector<ParamId> members;
  friend bool operator==(const ParamGroup&, const ParamGroup&) = default;
};

/// Ordered key=value pairs; keys are unique.
using Labels = std::vector<std::pair<std::string, std::string>>;

inline std::optional<std::string_view> label_value(const Labels& labels, std::string_view key) {
  for (const auto& [k, v] : labels)
    if (k == key) return std::string_view(v);
  return std::nullopt;
}

struct Branch {
  LinExpr prob;
  StateIndex target = 0;
  friend bool operator==(const Branch&, const Branch&) = default;
};

/// One (state, action) distribution.
struct Choice {
  ActionId action;
  std::vector<Branch> branches;
  friend bool operator==(const Choice&, const Choice&) = default;
};

struct State {
  std::string name;
  Rational reward;
  Labels labels;
  std::vector<Choice> choices;
  friend bool operator==(const State&, const State&) = default;
};

/// Parametric MDP. States are indexed by declaration order; branch targets
/// refer to those indices. Treat instances as immutable values once built.
struct Pmdp {
  std::string name;
  std::vector<ParamId> params;
  std::vector<ParamGroup> groups;
  std::vector<ActionId> actions;
  std::vector<State> states;
  StateIndex initial = 0;

  friend bool operator==(const Pmdp&, const Pmdp&) = default;

  std::optional<StateIndex> find_state(std::string_view n) const {
    for (StateIndex i = 0; i < states.size(); ++i)
      if (states[i].name == n) return i;
    return std::nullopt;
  }
  StateIndex state_index(std::string_view n) const {
    if (auto i = find_state(n)) return *i;
    throw UnknownState(std::string(n));
  }
  std::unordered_map<std::string, StateIndex> state_lookup() const {
    std::unordered_map<std::string, StateIndex> out;
    out.reserve(states.size());
    for (StateIndex i = 0; i < states.size(); ++i) out.emplace(states[i].name, i);
    return out;
  }

  bool has_param(std::string_view p) const { return std::find(params.begin(), params.end(), p) != params.end(); }
  bool has_action(std::string_view a) const { return std::find(actions.begin(), actions.end(), a) != actions.end(); }

  std::optional<std::size_t> group_of(std::string_view p) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (const auto& m : groups[g].members)
        if (m == p) return g;
    return std::nullopt;
  }

  std::size_t transition_count() const {
    std::size_t n = 0;
    for (const auto& s : states)
      for (const auto& c : s.choices) n += c.branches.size();
    return n;
  }
};

/// Conjunction of label equality tests; the empty conjunction matches every
/// state. A missing key makes the predicate false.
struct LabelPredicate {
  std::vector<std::pair<std::string, std::string>> tests;

  bool matches(const Labels& labels) const {
    for (const auto& [k, v] : tests) {
      auto actual = label_value(labels, k);
      if (!actual || *actual != v) return false;
    }
    return true;
  }
  std::string to_string() const {
    if (tests.empty()) return "*";
    std::string out;
    for (const auto& [k, v] : tests) {
      if (!out.empty()) out += ",";
      out += k + "=" + v;
    }
    return out;
  }
  friend bool operator==(const LabelPredicate&, const LabelPredicate&) = default;
};

struct MaskRule {
  LabelPredicate when;
  std::set<ActionId> allowed;
  friend bool operator==(const MaskRule&, const MaskRule&) = default;
};

/// Per-situation action availability. A state matched by several rules may
/// only use actions allowed by all of them; an unmatched state is unrestricted.
struct AvailabilityMask {
  std::string id;
  std::vector<MaskRule> rules;

  bool empty() const { return rules.empty(); }

  std::optional<std::set<ActionId>> allowed_at(const Labels& labels) const {
    std::optional<std::set<ActionId>> out;
    for (const auto& r : rules) {
      if (!r.when.matches(labels)) continue;
      if (!out) {
        out = r.allowed;
        continue;
      }
      std::set<ActionId> both;
      std::set_intersection(out->begin(), out->end(), r.allowed.begin(), r.allowed.end(),
                            std::inserter(both, both.end()));
      *out = std::move(both);
    }
    return out;
  }

  /// Conjunction of two masks (rules concatenated).
  friend AvailabilityMask operator&(AvailabilityMask a, const AvailabilityMask& b) {
    a.rules.insert(a.rules.end(), b.rules.begin(), b.rules.end());
    return a;
  }
  friend bool operator==(const AvailabilityMask&, const AvailabilityMask&) = default;
};

/// A candidate partitioning policy: a valuation of the policy parameters,
/// optionally restricted further by its own availability mask.
struct Policy {
  std::string id;
  Valuation valuation;
  AvailabilityMask mask;
  friend bool operator==(const Policy&, const Policy&) = default;
};

struct Violation {
  enum class Kind {
    BadInitial,
    NoEnabledAction,
    UnknownAction,
    DuplicateAction,
    DanglingTarget,
    DuplicateTarget,
    ZeroBranch,
    UnknownParameter,
    OutOfRange,
    SumNotOne,
  };
  Kind kind;
  StateIndex state = 0;
  std::optional<std::size_t> choice;
  std::optional<std::size_t> branch;
  std::string message;
};

namespace detail {

/// Replaces every group whose members all appear with one common coefficient
/// by that coefficient (the group sums to one).
inline LinExpr reduce_groups(LinExpr sum, const std::vector<ParamGroup>& groups) {
  for (const auto& g : groups) {
    if (g.members.empty()) continue;
    Rational c = sum.coeff(g.members.front());
    if (c.is_zero()) continue;
    bool uniform = std::all_of(g.members.begin(), g.members.end(),
                               [&](const ParamId& p) { return sum.coeff(p) == c; });
    if (!uniform) continue;
    for (const auto& p : g.members) sum.add_term(p, -c);
    sum.add_constant(c);
  }
  return sum;
}

/// Exact [min, max] of `e` over every admissible valuation: grouped
/// parameters range over their simplex, ungrouped ones over [0,1].
inline std::pair<Rational, Rational> expr_range(const LinExpr& e, const Pmdp& m) {
  Rational lo = e.constant(), hi = e.constant();
  std::vector<bool> seen(m.groups.size(), false);
  for (const auto& [p, c] : e.terms()) {
    auto g = m.group_of(p);
    if (!g) {
      lo += std::min(Rational(0), c);
      hi += std::max(Rational(0), c);
      continue;
    }
    if (seen[*g]) continue;
    seen[*g] = true;
    Rational gmin = e.coeff(m.groups[*g].members.front()), gmax = gmin;
    for (const auto& member : m.groups[*g].members) {
      Rational k = e.coeff(member);
      gmin = std::min(gmin, k);
      gmax = std::max(gmax, k);
    }
    lo += gmin;
    hi += gmax;
  }
  return {lo, hi};
}

}  // namespace detail

/// Probabilistic well-formedness check. Violations are data; an empty result
/// means the model is valid.
inline std::vector<Violation> validate_model(const Pmdp& m) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  auto report = [&](K kind, StateIndex s, std::optional<std::size_t> c, std::optional<std::size_t> b,
                    std::string msg) { out.push_back({kind, s, c, b, std::move(msg)}); };

  if (m.states.empty() || m.initial >= m.states.size()) {
    report(K::BadInitial, 0, std::nullopt, std::nullopt, "initial state is not a model state");
    return out;
  }
  std::set<ParamId> declared(m.params.begin(), m.params.end());

  for (StateIndex s = 0; s < m.states.size(); ++s) {
    const State& st = m.states[s];
    if (st.choices.empty()) report(K::NoEnabledAction, s, std::nullopt, std::nullopt, "state '" + st.name + "' has no enabled action");
    std::set<ActionId> actions_here;
    for (std::size_t c = 0; c < st.choices.size(); ++c) {
      const Choice& ch = st.choices[c];
      std::string where = "(" + st.name + ", " + ch.action + ")";
      if (!m.has_action(ch.action) && ch.action != kStutterAction)
        report(K::UnknownAction, s, c, std::nullopt, "undeclared action in " + where);
      if (!actions_here.insert(ch.action).second)
        report(K::DuplicateAction, s, c, std::nullopt, "duplicate distribution " + where);
      if (ch.branches.empty()) report(K::SumNotOne, s, c, std::nullopt, "empty distribution " + where);

      LinExpr sum;
      std::set<StateIndex> targets;
      bool symbols_ok = true;
      for (std::size_t b = 0; b < ch.branches.size(); ++b) {
        const Branch& br = ch.branches[b];
        if (br.target >= m.states.size()) {
          report(K::DanglingTarget, s, c, b, "dangling branch target in " + where);
          continue;
        }
        if (!targets.insert(br.target).second)
          report(K::DuplicateTarget, s, c, b, "duplicate target '" + m.states[br.target].name + "' in " + where);
        if (br.prob.is_zero()) report(K::ZeroBranch, s, c, b, "zero-probability branch in " + where);
        for (const auto& [p, k] : br.prob.terms()) {
          if (!declared.count(p)) {
            report(K::UnknownParameter, s, c, b, "undeclared parameter '" + p + "' in " + where);
            symbols_ok = false;
          }
        }
        if (symbols_ok) {
          auto [lo, hi] = detail::expr_range(br.prob, m);
          if (lo < 0 || hi > 1)
            report(K::OutOfRange, s, c, b,
                   "branch '" + br.prob.to_string() + "' can leave [0,1] in " + where);
        }
        sum += br.prob;
      }
      if (!ch.branches.empty() && symbols_ok) {
        LinExpr reduced = detail::reduce_groups(sum, m.groups);
        if (!(reduced == LinExpr(1)))
          report(K::SumNotOne, s, c, std::nullopt, "sum != 1 in " + where + ": " + sum.to_string());
      }
    }
  }
  return out;
}

inline std::set<ActionId> enabled_actions(const Pmdp& m, StateIndex s) {
  if (s >= m.states.size()) throw UnknownState("#" + std::to_string(s));
  std::set<ActionId> out;
  for (const auto& c : m.states[s].choices) out.insert(c.action);
  return out;
}

inline std::set<ActionId> enabled_actions(const Pmdp& m, std::string_view state) {
  return enabled_actions(m, m.state_index(state));
}

/// Problems with `v` as a valuation for `m`: undeclared parameters, values
/// outside [0,1], and fully covered groups that do not sum to one.
inline std::vector<std::string> check_valuation(const Pmdp& m, const Valuation& v) {
  std::vector<std::string> out;
  for (const auto& [p, x] : v) {
    if (!m.has_param(p)) out.push_back("undeclared parameter '" + p + "'");
    if (x < 0 || x > 1) out.push_back("value of '" + p + "' outside [0,1]: " + x.to_string());
  }
  for (const auto& g : m.groups) {
    Rational sum;
    bool covered = true;
    for (const auto& p : g.members) {
      auto it = v.find(p);
      if (it == v.end()) {
        covered = false;
        break;
      }
      sum += it->second;
    }
    if (covered && sum != Rational(1)) out.push_back("group " + g.members.front() + ".. sums to " + sum.to_string());
  }
  return out;
}

/// Throws ModelError unless `pol` fits `m`: declared parameters only, every
/// group it touches fully assigned and summing to one, mask actions declared.
inline void check_policy(const Pmdp& m, const Policy& pol) {
  auto problems = check_valuation(m, pol.valuation);
  for (const auto& g : m.groups) {
    std::size_t assigned = 0;
    for (const auto& p : g.members) assigned += pol.valuation.count(p);
    if (assigned != 0 && assigned != g.members.size())
      problems.push_back("group " + g.members.front() + ".. only partially assigned");
  }
  for (const auto& r : pol.mask.rules)
    for (const auto& a : r.allowed)
      if (!m.has_action(a) && a != kStutterAction) problems.push_back("mask references unknown action '" + a + "'");
  if (!problems.empty()) throw ModelError("policy '" + pol.id + "': " + problems.front());
}

inline void check_mask(const Pmdp& m, const AvailabilityMask& mask) {
  for (const auto& r : mask.rules)
    for (const auto& a : r.allowed)
      if (!m.has_action(a) && a != kStutterAction)
        throw ModelError("mask '" + mask.id + "' references unknown action '" + a + "'");
}

}  // namespace partopt
