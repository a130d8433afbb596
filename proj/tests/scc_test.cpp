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

#include <gtest/gtest.h>

#include <random>

#include "partopt/partopt.hpp"
#include "test_support.hpp"

namespace partopt {
namespace {

Pmdp from_edges(std::size_t n, const std::vector<std::pair<StateIndex, StateIndex>>& edges) {
  Pmdp m;
  m.name = "g";
  m.actions = {"a"};
  for (std::size_t s = 0; s < n; ++s) m.states.push_back({"s" + std::to_string(s), 0, {}, {}});
  for (auto [s, t] : edges) {
    if (m.states[s].choices.empty()) m.states[s].choices.push_back({"a", {}});
    m.states[s].choices[0].branches.push_back({LinExpr(1), t});
  }
  return m;
}

TEST(Scc, SingleCycle) {
  auto cs = decompose(from_edges(3, {{0, 1}, {1, 2}, {2, 0}}));
  ASSERT_EQ(cs.components.size(), 1u);
  EXPECT_EQ(cs.components[0].states, (std::vector<StateIndex>{0, 1, 2}));
  EXPECT_EQ(size_histogram(cs).to_string(), "3:1");
}

TEST(Scc, DagWithSelfLoops) {
  auto cs = decompose(from_edges(3, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}}));
  EXPECT_EQ(cs.components.size(), 3u);
  EXPECT_EQ(size_histogram(cs).singletons(), 3u);
  // Reverse topological ids: the sink gets the lowest id.
  EXPECT_LT(cs.state_to_component[2], cs.state_to_component[1]);
  EXPECT_LT(cs.state_to_component[1], cs.state_to_component[0]);
}

TEST(Scc, TwoCyclesJoinedOneWay) {
  auto cs = decompose(from_edges(4, {{0, 1}, {1, 0}, {1, 2}, {2, 3}, {3, 2}}));
  EXPECT_EQ(size_histogram(cs).to_string(), "2:2");
  EXPECT_EQ(testing::as_partition(cs), (std::set<std::vector<StateIndex>>{{0, 1}, {2, 3}}));
}

TEST(Scc, MatchesMutualReachability) {
  std::mt19937_64 rng(40);
  for (int round = 0; round < 100; ++round) {
    std::vector<std::pair<StateIndex, StateIndex>> edges;
    std::uniform_int_distribution<StateIndex> node(0, 39);
    std::set<std::pair<StateIndex, StateIndex>> seen;
    while (edges.size() < 120) {
      std::pair<StateIndex, StateIndex> e{node(rng), node(rng)};
      if (seen.insert(e).second) edges.push_back(e);
    }
    Pmdp m = from_edges(40, edges);
    auto cs = decompose(m);
    EXPECT_EQ(testing::as_partition(cs), testing::brute_force_sccs(m));
    // Partition property, size conservation and determinism.
    std::size_t total = 0;
    std::vector<int> owner(40, 0);
    for (const auto& c : cs.components) {
      total += c.size;
      for (auto s : c.states) {
        ++owner[s];
        EXPECT_EQ(cs.state_to_component[s], c.id);
      }
    }
    EXPECT_EQ(total, 40u);
    EXPECT_TRUE(std::all_of(owner.begin(), owner.end(), [](int k) { return k == 1; }));
    EXPECT_EQ(decompose(m), cs);
    // Ids are a reverse topological order of the condensation.
    for (auto [s, t] : edges) EXPECT_GE(cs.state_to_component[s], cs.state_to_component[t]);
  }
}

TEST(Scc, DeepChainDoesNotRecurse) {
  std::vector<std::pair<StateIndex, StateIndex>> edges;
  const std::size_t n = 200000;
  for (StateIndex s = 0; s + 1 < n; ++s) edges.push_back({s, s + 1});
  edges.push_back({n - 1, 0});
  auto cs = decompose(from_edges(n, edges));
  EXPECT_EQ(cs.components.size(), 1u);
}

TEST(Histogram, Examples) {
  SizeHistogram h;
  h.counts = {{2, 556}, {6, 556}};
  h.max = 6;
  EXPECT_EQ(h.to_string(), "2:556 6:556");
  EXPECT_EQ(h.total(), 1112u);
  EXPECT_EQ(h.singletons(), 0u);
  EXPECT_EQ(SizeHistogram{}.to_string(), "");
}

TEST(ComponentParams, CountsInternalAndExitingBranches) {
  Pmdp m = parse_model(
      "pmdp c\nparam e f\ngroup e f\naction a\nstate x\nstate y\nstate z\ninit x\n"
      "trans x a : e -> y + f -> z\n"
      "trans y a : 1 -> x\n"
      "trans z a : 1 -> z\n");
  auto cs = decompose(m);
  ASSERT_EQ(cs.components.size(), 2u);
  const Component& xy = cs.components[cs.state_to_component[0]];
  const Component& z = cs.components[cs.state_to_component[2]];
  EXPECT_EQ(xy.params, (std::set<ParamId>{"e", "f"}));
  EXPECT_TRUE(z.params.empty());
}

TEST(CondensationDot, Shape) {
  auto m = from_edges(3, {{0, 1}, {1, 0}, {1, 2}, {2, 2}});
  auto cs = decompose(m);
  std::string dot = condensation_dot(m, cs);
  EXPECT_EQ(dot.rfind("digraph condensation {", 0), 0u);
  EXPECT_NE(dot.find("c1 -> c0;"), std::string::npos);
  EXPECT_NE(dot.find("(2)"), std::string::npos);
}

}  // namespace
}  // namespace partopt
