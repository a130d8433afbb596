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
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "partopt/model.hpp"

namespace partopt {

/// Iterative Tarjan over an adjacency list (`g[v]` iterates the successors
/// of v). Returns the component of every vertex; components are numbered in
/// the order Tarjan completes them, which is a reverse topological order of
/// the condensation.
template <typename Graph>
std::vector<std::size_t> strongly_connected_components(const Graph& g, std::size_t& n_components) {
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.size();
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::pair<std::size_t, std::size_t>> frames;  // (vertex, next successor position)
  std::size_t counter = 0;
  n_components = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      const auto& succ = g[v];
      if (pos < succ.size()) {
        std::size_t w = succ[pos++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) {
        std::size_t parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = n_components;
        } while (w != done);
        ++n_components;
      }
    }
  }
  return comp;
}

struct Component {
  std::size_t id = 0;
  std::vector<StateIndex> states;  // ascending
  std::size_t size = 0;
  std::set<ParamId> params;
  friend bool operator==(const Component&, const Component&) = default;
};

struct ComponentSet {
  std::vector<Component> components;
  std::vector<std::size_t> state_to_component;
  friend bool operator==(const ComponentSet&, const ComponentSet&) = default;
};

/// |C_i| for every component size i. `max` is 0 for an empty set.
struct SizeHistogram {
  std::map<std::size_t, std::size_t> counts;
  std::size_t max = 0;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [size, count] : counts) n += count;
    return n;
  }
  std::size_t singletons() const {
    auto it = counts.find(1);
    return it == counts.end() ? 0 : it->second;
  }
  /// "size:count" pairs by ascending size, e.g. "2:556 6:556".
  std::string to_string() const {
    std::string out;
    for (const auto& [size, count] : counts) {
      if (!out.empty()) out += ' ';
      out += std::to_string(size) + ":" + std::to_string(count);
    }
    return out;
  }
  friend bool operator==(const SizeHistogram&, const SizeHistogram&) = default;
};

/// Successor lists of the model's underlying graph: an edge s -> t for every
/// branch, regardless of action or probability.
inline std::vector<std::vector<StateIndex>> successor_lists(const Pmdp& m) {
  std::vector<std::vector<StateIndex>> g(m.states.size());
  for (StateIndex s = 0; s < m.states.size(); ++s)
    for (const auto& c : m.states[s].choices)
      for (const auto& b : c.branches) g[s].push_back(b.target);
  return g;
}

/// Parameters with a nonzero coefficient on any branch leaving a state of `c`
/// (internal and exiting branches).
inline std::set<ParamId> component_params(const Pmdp& m, const Component& c) {
  std::set<ParamId> out;
  for (StateIndex s : c.states)
    for (const auto& ch : m.states.at(s).choices)
      for (const auto& b : ch.branches)
        for (const auto& [p, k] : b.prob.terms()) out.insert(p);
  return out;
}

/// Recomputes every component's parameter set from `m`, which must share the
/// state indexing of the decomposed model.
inline void attribute_params(ComponentSet& cs, const Pmdp& m) {
  for (auto& c : cs.components) c.params = component_params(m, c);
}

inline ComponentSet decompose(const Pmdp& m) {
  auto g = successor_lists(m);
  std::size_t n = 0;
  ComponentSet cs;
  cs.state_to_component = strongly_connected_components(g, n);
  cs.components.resize(n);
  for (std::size_t i = 0; i < n; ++i) cs.components[i].id = i;
  for (StateIndex s = 0; s < m.states.size(); ++s) cs.components[cs.state_to_component[s]].states.push_back(s);
  for (auto& c : cs.components) c.size = c.states.size();
  attribute_params(cs, m);
  return cs;
}

inline SizeHistogram size_histogram(const ComponentSet& cs) {
  SizeHistogram h;
  for (const auto& c : cs.components) {
    ++h.counts[c.size];
    h.max = std::max(h.max, c.size);
  }
  return h;
}

/// Graphviz text of the condensation: one node per component labelled with
/// its size, one edge per distinct inter-component connection.
inline std::string condensation_dot(const Pmdp& m, const ComponentSet& cs) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (StateIndex s = 0; s < m.states.size(); ++s)
    for (const auto& c : m.states[s].choices)
      for (const auto& b : c.branches) {
        std::size_t from = cs.state_to_component[s], to = cs.state_to_component[b.target];
        if (from != to) edges.emplace(from, to);
      }
  std::ostringstream os;
  os << "digraph condensation {\n";
  for (const auto& c : cs.components) {
    os << "  c" << c.id << " [label=\"c" << c.id << " (" << c.size << ")";
    if (c.size == 1) os << "\\n" << m.states[c.states.front()].name;
    os << "\"];\n";
  }
  for (const auto& [a, b] : edges) os << "  c" << a << " -> c" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace partopt
