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

#include <cmath>
#include <random>

#include "partopt/partopt.hpp"
#include "test_support.hpp"

namespace partopt {
namespace {

using testing::component_set;
using testing::histogram_of;

TEST(Balancing, Examples) {
  EXPECT_DOUBLE_EQ(balancing(histogram_of({{1, 1056}, {2, 528}})), 3.0);
  EXPECT_EQ(balancing(histogram_of({{1, 2112}})), kInfinity);
  EXPECT_DOUBLE_EQ(balancing(histogram_of({{4, 66}})), 1.0);
  EXPECT_NEAR(balancing(histogram_of({{2, 264}, {4, 132}})), 1.8, 1e-12);
  EXPECT_NEAR(balancing(histogram_of({{1, 2224}, {2, 2224}, {4, 556}})), 27.0 / 7.0, 1e-12);
  EXPECT_THROW(balancing(SizeHistogram{}), EmptyPartition);
}

TEST(Balancing, AgreesWithExactOracle) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> size(1, 9), count(0, 50), kinds(1, 4);
  for (int i = 0; i < 500; ++i) {
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t k = kinds(rng); k > 0; --k) counts[size(rng)] += count(rng) + 1;
    auto exact = testing::exact_balancing(counts);
    double got = balancing(histogram_of(counts));
    if (!exact)
      EXPECT_EQ(got, kInfinity);
    else
      EXPECT_NEAR(got, exact->to_double(), 1e-9);
  }
}

TEST(Variation, Examples) {
  std::set<ParamId> pq{"p", "q"};
  Valuation half{{"p", Rational(1, 2)}, {"q", Rational(1, 2)}};
  EXPECT_DOUBLE_EQ(variation(component_set({{2, {"p"}}, {3, {}}}), half, pq), 0.25);
  EXPECT_DOUBLE_EQ(variation(component_set({{2, {}}, {3, {}}}), half, pq), 0.0);
  EXPECT_DOUBLE_EQ(variation(component_set({{2, pq}, {3, pq}}), half, pq), 1.0);
  EXPECT_DOUBLE_EQ(variation(component_set({{2, {}}}), {}, {}), 0.0);
  EXPECT_THROW(variation(component_set({{1, {"p"}}}), {{"p", Rational(1)}}, pq), UnboundParameter);
  EXPECT_THROW(variation(component_set({{1, {"z"}}}), half, pq), Error);
  EXPECT_THROW(variation(ComponentSet{}, half, pq), EmptyPartition);
}

TEST(Score, Examples) {
  EXPECT_DOUBLE_EQ(score(1.0, 0.0), 1.0);
  EXPECT_EQ(score(kInfinity, 0.7), kInfinity);
  EXPECT_NEAR(score(1.8, 0.3315), 5.115, 1e-12);
}

TEST(Metrics, EvaluateCombines) {
  auto cs = component_set({{2, {"p"}}, {2, {}}});
  auto mv = evaluate_metrics(cs, {{"p", Rational(1)}}, {"p"});
  EXPECT_DOUBLE_EQ(mv.balancing, 1.0);
  EXPECT_DOUBLE_EQ(mv.variation, 0.5);
  EXPECT_DOUBLE_EQ(mv.score, 6.0);
}

TEST(AffectedComponents, Examples) {
  std::vector<std::pair<std::size_t, std::set<ParamId>>> parts;
  for (int i = 0; i < 10; ++i) parts.push_back({1, i % 3 == 0 && i < 9 ? std::set<ParamId>{"p5", "q"} : std::set<ParamId>{}});
  parts[1].second = {"q"};
  auto cs = component_set(parts);
  EXPECT_TRUE(affected_components(cs, {}).empty());
  EXPECT_EQ(affected_components(cs, {"p5"}), (std::set<std::size_t>{0, 3, 6}));
  EXPECT_EQ(affected_components(cs, {"p5", "q"}), (std::set<std::size_t>{0, 1, 3, 6}));
}

TEST(MetricProperties, RandomPartitions) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> size(1, 8), ncomp(1, 12);
  std::uniform_int_distribution<int> weight(0, 10);
  const std::vector<ParamId> params{"a", "b", "c", "d"};
  for (int i = 0; i < 300; ++i) {
    std::vector<std::pair<std::size_t, std::set<ParamId>>> parts;
    for (std::size_t k = ncomp(rng); k > 0; --k) {
      std::set<ParamId> ps;
      for (const auto& p : params)
        if (rng() % 2) ps.insert(p);
      parts.push_back({size(rng), ps});
    }
    auto cs = component_set(parts);
    auto h = size_histogram(cs);
    double bal = balancing(h);
    EXPECT_TRUE(bal >= 1.0 || std::isinf(bal));
    auto with_singleton = parts;
    with_singleton.push_back({1, {}});
    double bal2 = balancing(size_histogram(component_set(with_singleton)));
    if (!std::isinf(bal)) {
      EXPECT_GT(bal2, bal);
    }

    Valuation theta;
    for (const auto& p : params) theta[p] = Rational(weight(rng), 10);
    std::set<ParamId> all(params.begin(), params.end());
    double var = variation(cs, theta, all);
    EXPECT_GE(var, 0.0);
    EXPECT_LE(var, 1.0 + 1e-12);
    Valuation scaled;
    for (const auto& [p, v] : theta) scaled[p] = v * Rational(7, 3);
    EXPECT_NEAR(variation(cs, scaled, all), var, 1e-12);
  }
}

}  // namespace
}  // namespace partopt
