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
#include <set>
#include <string>

#include "partopt/error.hpp"
#include "partopt/expr.hpp"
#include "partopt/scc.hpp"

namespace partopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Weight of Variation in the combined score.
inline constexpr double kVariationScale = 10.0;

struct MetricValue {
  double balancing = kInfinity;
  double variation = 0.0;
  double score = kInfinity;
};

/// Balancing of a partition from its size histogram:
///
///   sum_{i=1..max} |C_i|  /  sum_{i=2..max} |C_i| / (max - i + 1)
///
/// Singletons count in the numerator only, so every extra singleton raises
/// the value; 1 is reached exactly when all components share one size >= 2.
/// An all-singleton partition has a zero denominator and yields +inf.
inline double balancing(const SizeHistogram& h) {
  double total = 0.0, weighted = 0.0;
  std::size_t max = 0;
  for (const auto& [size, count] : h.counts)
    if (count > 0) max = std::max(max, size);
  for (const auto& [size, count] : h.counts) {
    total += static_cast<double>(count);
    if (size >= 2) weighted += static_cast<double>(count) / static_cast<double>(max - size + 1);
  }
  if (total == 0.0) throw EmptyPartition();
  if (weighted == 0.0) return kInfinity;
  return total / weighted;
}

/// Variation of a partition under valuation `theta`: every component
/// contributes the summed value of the parameters it carries, normalised by
/// (sum of theta over `all_params`) x (number of components). 0 when no
/// component carries a parameter, 1 when every component carries all of them.
inline double variation(const ComponentSet& cs, const Valuation& theta, const std::set<ParamId>& all_params) {
  if (cs.components.empty()) throw EmptyPartition();
  auto value = [&](const ParamId& p) {
    auto it = theta.find(p);
    if (it == theta.end()) throw UnboundParameter(p);
    return it->second.to_double();
  };
  double mass = 0.0;
  for (const auto& p : all_params) mass += value(p);
  if (all_params.empty() || mass == 0.0) return 0.0;
  double carried = 0.0;
  for (const auto& c : cs.components)
    for (const auto& p : c.params) {
      if (!all_params.count(p)) throw Error("component parameter '" + p + "' is not in the declared parameter set");
      carried += value(p);
    }
  return carried / (mass * static_cast<double>(cs.components.size()));
}

/// balancing + 10 * variation; an infinite balancing propagates.
inline double score(double balancing_value, double variation_value) {
  return balancing_value + kVariationScale * variation_value;
}

inline MetricValue evaluate_metrics(const ComponentSet& cs, const Valuation& theta, const std::set<ParamId>& all_params) {
  MetricValue mv;
  mv.balancing = balancing(size_histogram(cs));
  mv.variation = variation(cs, theta, all_params);
  mv.score = score(mv.balancing, mv.variation);
  return mv;
}

/// Components whose parameter set meets `changed`: the ones to re-verify
/// when those parameters change.
inline std::set<std::size_t> affected_components(const ComponentSet& cs, const std::set<ParamId>& changed) {
  std::set<std::size_t> out;
  for (const auto& c : cs.components)
    for (const auto& p : c.params)
      if (changed.count(p)) {
        out.insert(c.id);
        break;
      }
  return out;
}

}  // namespace partopt
