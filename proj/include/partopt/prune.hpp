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
#include <set>
#include <string>
#include <vector>

#include "partopt/error.hpp"
#include "partopt/model.hpp"

// Two-round elimination: availability masking (S -> S') followed by policy
// application (S' -> S''), each closed by reachability pruning.
//
// Pruning never renormalizes. A distribution that loses a branch to a removed
// state is dropped whole, and a surviving state left without any distribution
// receives a constant-1 self-loop on the reserved `stutter` action.

namespace partopt {

struct PruneTrace {
  std::set<std::string> removed_states_round1;
  std::size_t removed_transitions_round1 = 0;
  std::set<std::string> removed_states_round2;
  std::size_t removed_transitions_round2 = 0;

  friend bool operator==(const PruneTrace&, const PruneTrace&) = default;
};

/// Forward closure from the initial state over every branch of every enabled
/// action, whatever its symbolic value.
inline std::vector<bool> reachable_mask(const Pmdp& m) {
  std::vector<bool> seen(m.states.size(), false);
  if (m.states.empty()) return seen;
  std::vector<StateIndex> stack{m.initial};
  seen[m.initial] = true;
  while (!stack.empty()) {
    StateIndex s = stack.back();
    stack.pop_back();
    for (const auto& c : m.states[s].choices)
      for (const auto& b : c.branches)
        if (!seen[b.target]) {
          seen[b.target] = true;
          stack.push_back(b.target);
        }
  }
  return seen;
}

inline std::set<StateIndex> reachable_states(const Pmdp& m) {
  auto mask = reachable_mask(m);
  std::set<StateIndex> out;
  for (StateIndex s = 0; s < mask.size(); ++s)
    if (mask[s]) out.insert(s);
  return out;
}

namespace detail {

/// Restriction to `keep` (indexed by state). Returns the number of stutter
/// loops it had to add.
inline std::size_t restrict_states(const Pmdp& m, const std::vector<bool>& keep, Pmdp& out) {
  if (m.initial >= keep.size() || !keep[m.initial])
    throw PruneError(PruneError::Kind::InitialStateEliminated, "initial state eliminated");
  std::vector<StateIndex> remap(m.states.size(), 0);
  out.name = m.name;
  out.params = m.params;
  out.groups = m.groups;
  out.actions = m.actions;
  out.states.clear();
  for (StateIndex s = 0; s < m.states.size(); ++s)
    if (keep[s]) {
      remap[s] = out.states.size();
      out.states.push_back(State{m.states[s].name, m.states[s].reward, m.states[s].labels, {}});
    }
  out.initial = remap[m.initial];

  std::size_t stutters = 0;
  for (StateIndex s = 0; s < m.states.size(); ++s) {
    if (!keep[s]) continue;
    State& dst = out.states[remap[s]];
    for (const auto& c : m.states[s].choices) {
      bool intact = std::all_of(c.branches.begin(), c.branches.end(), [&](const Branch& b) { return keep[b.target]; });
      if (!intact) continue;
      Choice nc{c.action, {}};
      nc.branches.reserve(c.branches.size());
      for (const auto& b : c.branches) nc.branches.push_back({b.prob, remap[b.target]});
      dst.choices.push_back(std::move(nc));
    }
    if (dst.choices.empty()) {
      dst.choices.push_back({std::string(kStutterAction), {{LinExpr(1), remap[s]}}});
      ++stutters;
    }
  }
  if (stutters > 0 && !out.has_action(kStutterAction)) out.actions.emplace_back(kStutterAction);
  return stutters;
}

inline std::set<std::string> dropped_names(const Pmdp& m, const std::vector<bool>& keep) {
  std::set<std::string> out;
  for (StateIndex s = 0; s < m.states.size(); ++s)
    if (!keep[s]) out.insert(m.states[s].name);
  return out;
}

}  // namespace detail

/// Restriction of `m` to `keep`. Distributions with a branch leaving `keep`
/// are removed entirely; throws InitialStateEliminated when the initial state
/// is not kept.
inline Pmdp induced_submodel(const Pmdp& m, const std::set<StateIndex>& keep) {
  std::vector<bool> mask(m.states.size(), false);
  for (StateIndex s : keep)
    if (s < mask.size()) mask[s] = true;
  Pmdp out;
  detail::restrict_states(m, mask, out);
  return out;
}

/// Round one: removes the distributions of actions the mask does not allow,
/// then every state no longer reachable. `stutter` is always allowed.
inline std::pair<Pmdp, PruneTrace> eliminate_unavailable(const Pmdp& m, const AvailabilityMask& mask) {
  check_mask(m, mask);
  Pmdp stripped = m;
  for (auto& st : stripped.states) {
    auto allowed = mask.allowed_at(st.labels);
    if (!allowed) continue;
    std::erase_if(st.choices, [&](const Choice& c) { return c.action != kStutterAction && !allowed->count(c.action); });
  }
  if (stripped.states.at(stripped.initial).choices.empty())
    throw PruneError(PruneError::Kind::InitialStateEliminated, "mask disables every action of the initial state");

  auto keep = reachable_mask(stripped);
  PruneTrace trace;
  Pmdp out;
  std::size_t stutters = detail::restrict_states(stripped, keep, out);
  trace.removed_states_round1 = detail::dropped_names(m, keep);
  trace.removed_transitions_round1 = m.transition_count() - (out.transition_count() - stutters);
  return {std::move(out), std::move(trace)};
}

/// Round two: substitutes the policy valuation into every branch, removes
/// branches that became exactly 0 and distributions left empty, then prunes
/// unreachable states. Parameters outside the policy stay symbolic.
inline std::pair<Pmdp, PruneTrace> apply_policy(const Pmdp& m, const Policy& pol) {
  check_policy(m, pol);
  Pmdp sub = m;
  std::size_t removed = 0;
  for (auto& st : sub.states) {
    for (auto& c : st.choices) {
      LinExpr sum;
      std::vector<Branch> kept;
      kept.reserve(c.branches.size());
      for (auto& b : c.branches) {
        LinExpr e = substitute(b.prob, pol.valuation);
        if (e.is_zero()) {
          ++removed;
          continue;
        }
        sum += e;
        kept.push_back({std::move(e), b.target});
      }
      if (!kept.empty() && !(detail::reduce_groups(sum, sub.groups) == LinExpr(1)))
        throw PruneError(PruneError::Kind::InvalidDistribution,
                         "policy '" + pol.id + "' leaves (" + st.name + ", " + c.action + ") summing to " + sum.to_string());
      c.branches = std::move(kept);
    }
    std::erase_if(st.choices, [](const Choice& c) { return c.branches.empty(); });
  }
  if (sub.states.at(sub.initial).choices.empty())
    throw PruneError(PruneError::Kind::InitialStateEliminated, "policy '" + pol.id + "' removes every action of the initial state");

  auto keep = reachable_mask(sub);
  PruneTrace trace;
  Pmdp out;
  std::size_t stutters = detail::restrict_states(sub, keep, out);
  trace.removed_states_round2 = detail::dropped_names(m, keep);
  trace.removed_transitions_round2 = m.transition_count() - (out.transition_count() - stutters);
  return {std::move(out), std::move(trace)};
}

/// `after` (a pruned descendant of `before`) with every branch expression
/// replaced by its unsubstituted form in `before`, matched on state name,
/// action and target. Added stutter loops keep their constant. The result has
/// the same graph as `after` but need not be a valid model; it records which
/// parameters govern each surviving branch.
inline Pmdp pre_substitution_view(const Pmdp& before, const Pmdp& after) {
  auto lookup = before.state_lookup();
  Pmdp out = after;
  for (auto& st : out.states) {
    auto it = lookup.find(st.name);
    if (it == lookup.end()) throw UnknownState(st.name);
    const State& orig = before.states[it->second];
    for (auto& c : st.choices) {
      auto oc = std::find_if(orig.choices.begin(), orig.choices.end(), [&](const Choice& x) { return x.action == c.action; });
      if (oc == orig.choices.end()) continue;
      for (auto& b : c.branches) {
        const std::string& tname = after.states[b.target].name;
        for (const auto& ob : oc->branches)
          if (before.states[ob.target].name == tname) {
            b.prob = ob.prob;
            break;
          }
      }
    }
  }
  return out;
}

}  // namespace partopt
