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
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "partopt/error.hpp"
#include "partopt/format.hpp"
#include "partopt/metrics.hpp"
#include "partopt/model.hpp"
#include "partopt/prune.hpp"
#include "partopt/scc.hpp"

namespace partopt {

enum class EnvLevel { Low, Medium, High };
enum class BatteryLevel { Low, Regular, High };

inline const char* to_string(EnvLevel e) {
  switch (e) {
    case EnvLevel::Low: return "low";
    case EnvLevel::Medium: return "medium";
    case EnvLevel::High: return "high";
  }
  return "?";
}
inline const char* to_string(BatteryLevel b) {
  switch (b) {
    case BatteryLevel::Low: return "low";
    case BatteryLevel::Regular: return "regular";
    case BatteryLevel::High: return "high";
  }
  return "?";
}

/// A situation (environment band x battery level) with the actions it leaves
/// available.
struct Category {
  std::string id;
  EnvLevel env_level = EnvLevel::Low;
  BatteryLevel battery_level = BatteryLevel::Low;
  AvailabilityMask mask;
};

/// Lattice enumeration: every listed group takes all distributions whose
/// members are multiples of `step`; parameters in `base` are shared by every
/// candidate.
struct GridSpec {
  Rational step;
  std::vector<ParamGroup> groups;
  Valuation base;
  std::string id_prefix = "grid";
};

struct CandidateSource {
  std::string category;
  std::variant<std::vector<Policy>, GridSpec> source;
};

struct CandidateSet {
  enum class Source { ExplicitFile, Grid };
  std::string category;
  std::vector<Policy> candidates;
  Source source = Source::ExplicitFile;
};

/// Hard cap on enumerated candidates.
inline constexpr std::size_t kMaxCandidates = 1'000'000;

namespace detail {

/// Compositions of `total` into `parts` non-negative parts, first part
/// ascending: (0,k), (1,k-1), ... for two parts.
inline void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& cur,
                         std::vector<std::vector<std::size_t>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t first = 0; first <= total; ++first) {
    cur.push_back(first);
    compositions(total - first, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace detail

inline CandidateSet enumerate_candidates(const CandidateSource& src) {
  CandidateSet out;
  out.category = src.category;
  if (const auto* list = std::get_if<std::vector<Policy>>(&src.source)) {
    out.source = CandidateSet::Source::ExplicitFile;
    std::set<std::string> ids;
    for (const auto& p : *list)
      if (!ids.insert(p.id).second)
        throw SearchError(SearchError::Kind::EmptyCandidateSet, "duplicate candidate id '" + p.id + "'");
    out.candidates = *list;
  } else {
    const auto& grid = std::get<GridSpec>(src.source);
    out.source = CandidateSet::Source::Grid;
    if (grid.step <= 0 || grid.step > 1 || !(Rational(1) / grid.step).is_integer())
      throw SearchError(SearchError::Kind::EmptyCandidateSet, "grid step must be 1/k for a positive integer k");
    auto k = static_cast<std::size_t>((Rational(1) / grid.step).num());

    std::vector<std::vector<std::vector<std::size_t>>> lattices;
    std::size_t count = 1;
    for (const auto& g : grid.groups) {
      if (g.members.empty()) continue;
      for (const auto& p : g.members)
        if (grid.base.count(p)) throw SearchError(SearchError::Kind::EmptyCandidateSet, "'" + p + "' is both gridded and fixed");
      std::vector<std::vector<std::size_t>> lattice;
      std::vector<std::size_t> cur;
      detail::compositions(k, g.members.size(), cur, lattice);
      if (lattice.size() > kMaxCandidates / count)
        throw SearchError(SearchError::Kind::TooManyCandidates, "grid exceeds " + std::to_string(kMaxCandidates) + " candidates");
      count *= lattice.size();
      lattices.push_back(std::move(lattice));
    }
    if (lattices.empty()) count = grid.base.empty() ? 0 : 1;

    std::size_t width = std::to_string(count).size();
    std::vector<std::size_t> odo(lattices.size(), 0);
    for (std::size_t n = 0; n < count; ++n) {
      Policy pol;
      std::string num = std::to_string(n + 1);
      pol.id = grid.id_prefix + "-" + std::string(width - num.size(), '0') + num;
      pol.valuation = grid.base;
      std::size_t li = 0;
      for (const auto& g : grid.groups) {
        if (g.members.empty()) continue;
        const auto& point = lattices[li][odo[li]];
        for (std::size_t j = 0; j < g.members.size(); ++j)
          pol.valuation[g.members[j]] = Rational(static_cast<std::int64_t>(point[j])) * grid.step;
        ++li;
      }
      out.candidates.push_back(std::move(pol));
      for (std::size_t d = odo.size(); d-- > 0;) {
        if (++odo[d] < lattices[d].size()) break;
        odo[d] = 0;
      }
    }
  }
  if (out.candidates.empty()) throw SearchError(SearchError::Kind::EmptyCandidateSet, "no candidates");
  return out;
}

/// One ranked result line: valuation, partition shape and metrics.
struct EvaluationRow {
  std::string policy_id;
  std::size_t index = 0;  // position in the candidate list
  Valuation valuation;
  std::size_t n_components = 0;
  std::size_t n_singletons = 0;
  SizeHistogram histogram;
  double balancing = kInfinity;
  double variation = 0.0;
  double score = kInfinity;
};

struct CandidateFailure {
  std::string policy_id;
  std::size_t index = 0;
  std::string reason;
};

struct Report {
  std::string category;
  std::string fingerprint;
  std::string best;
  std::vector<EvaluationRow> rows;
  std::vector<CandidateFailure> diagnostics;
  /// Valuation column layout: model groups touched by some row, in model
  /// order, then loose parameters as single-member columns.
  std::vector<ParamGroup> columns;
};

/// Valuation used for Variation: the policy valuation over the environment
/// valuation, every other declared parameter at 1 (its worst case).
inline Valuation variation_theta(const Pmdp& m, const Policy& pol, const Valuation& theta_env) {
  Valuation theta;
  for (const auto& p : m.params) theta[p] = Rational(1);
  for (const auto& [p, v] : theta_env) theta[p] = v;
  for (const auto& [p, v] : pol.valuation) theta[p] = v;
  return theta;
}

/// The partition a candidate induces: mask round, policy round, then SCCs.
/// Component parameter sets come from the unsubstituted expressions of the
/// surviving branches, so policy parameters count with their assigned weight.
inline ComponentSet candidate_partition(const Pmdp& m, const Category& cat, const Policy& pol) {
  auto [masked, trace1] = eliminate_unavailable(m, cat.mask & pol.mask);
  auto [pruned, trace2] = apply_policy(masked, pol);
  ComponentSet cs = decompose(pruned);
  attribute_params(cs, pre_substitution_view(masked, pruned));
  return cs;
}

/// Full pipeline for one candidate. Pruning errors propagate.
inline EvaluationRow evaluate_candidate(const Pmdp& m, const Category& cat, const Policy& pol, const Valuation& theta_env,
                                        std::size_t index = 0) {
  ComponentSet cs = candidate_partition(m, cat, pol);
  std::set<ParamId> all(m.params.begin(), m.params.end());
  MetricValue mv = evaluate_metrics(cs, variation_theta(m, pol, theta_env), all);

  EvaluationRow row;
  row.policy_id = pol.id;
  row.index = index;
  row.valuation = pol.valuation;
  row.histogram = size_histogram(cs);
  row.n_components = row.histogram.total();
  row.n_singletons = row.histogram.singletons();
  row.balancing = mv.balancing;
  row.variation = mv.variation;
  row.score = mv.score;
  return row;
}

/// Order used for ranking: score, then fewer singletons, then fewer
/// components, then candidate order.
inline bool ranks_before(const EvaluationRow& a, const EvaluationRow& b) {
  if (a.score != b.score) return a.score < b.score;
  if (a.n_singletons != b.n_singletons) return a.n_singletons < b.n_singletons;
  if (a.n_components != b.n_components) return a.n_components < b.n_components;
  return a.index < b.index;
}

/// FNV-1a 64-bit digest of `text`, as "fnv1a64:<16 hex digits>".
inline std::string fingerprint(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Report build_report(std::vector<EvaluationRow> rows, std::vector<CandidateFailure> failures, const Pmdp& m,
                           std::string category = {}, std::string model_fingerprint = {}) {
  if (rows.empty()) throw SearchError(SearchError::Kind::AllCandidatesFailed, "every candidate failed");
  Report r;
  r.category = std::move(category);
  r.fingerprint = model_fingerprint.empty() ? fingerprint(serialize_model(m)) : std::move(model_fingerprint);
  std::stable_sort(rows.begin(), rows.end(), ranks_before);
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  r.rows = std::move(rows);
  r.diagnostics = std::move(failures);
  r.best = r.rows.front().policy_id;

  std::set<ParamId> assigned;
  for (const auto& row : r.rows)
    for (const auto& [p, v] : row.valuation) assigned.insert(p);
  std::set<ParamId> placed;
  for (const auto& g : m.groups)
    if (std::any_of(g.members.begin(), g.members.end(), [&](const ParamId& p) { return assigned.count(p); })) {
      r.columns.push_back(g);
      placed.insert(g.members.begin(), g.members.end());
    }
  for (const auto& p : m.params)
    if (assigned.count(p) && !placed.count(p)) r.columns.push_back({{p}});
  return r;
}

/// Evaluates every candidate (on up to `threads` workers; 0 picks the
/// hardware concurrency) and ranks the successful ones. The ranking does not
/// depend on the thread count.
inline Report best_policy(const Pmdp& m, const Category& cat, const CandidateSet& cands, const Valuation& theta_env,
                          std::size_t threads = 1, std::string model_fingerprint = {}) {
  if (cands.candidates.empty()) throw SearchError(SearchError::Kind::EmptyCandidateSet, "no candidates");
  const std::size_t n = cands.candidates.size();
  std::vector<std::optional<EvaluationRow>> results(n);
  std::vector<std::string> errors(n);

  auto work = [&](std::size_t i) {
    try {
      results[i] = evaluate_candidate(m, cat, cands.candidates[i], theta_env, i);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    for (auto& t : pool) t.join();
  }

  std::vector<EvaluationRow> rows;
  std::vector<CandidateFailure> failures;
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i])
      rows.push_back(std::move(*results[i]));
    else
      failures.push_back({cands.candidates[i].id, i, errors[i]});
  }
  if (rows.empty())
    throw SearchError(SearchError::Kind::AllCandidatesFailed,
                      "all " + std::to_string(n) + " candidates failed; first: " + failures.front().reason);
  return build_report(std::move(rows), std::move(failures), m, cat.id, std::move(model_fingerprint));
}

// ---- rendering ---------------------------------------------------------

/// Fixed six decimals, or "inf".
inline std::string format_metric(double v) {
  if (v == kInfinity) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string valuation_cell(const ParamGroup& column, const Valuation& v) {
  std::string out;
  for (std::size_t i = 0; i < column.members.size(); ++i) {
    auto it = v.find(column.members[i]);
    if (it == v.end()) return "-";
    if (i) out += ',';
    out += it->second.to_decimal_string();
  }
  return out;
}

inline std::string column_header(const ParamGroup& column) {
  std::string out;
  for (std::size_t i = 0; i < column.members.size(); ++i) out += (i ? "," : "") + column.members[i];
  return out;
}

/// Tab-separated table with a header row:
/// policy, one column per valuation group, #C, #SS, S:#C, Bal, Var, score.
inline std::string render_tsv(const Report& r) {
  std::ostringstream os;
  os << "policy";
  for (const auto& c : r.columns) os << '\t' << column_header(c);
  os << "\t#C\t#SS\tS:#C\tBal\tVar\tscore\n";
  for (const auto& row : r.rows) {
    os << row.policy_id;
    for (const auto& c : r.columns) os << '\t' << valuation_cell(c, row.valuation);
    os << '\t' << row.n_components << '\t' << row.n_singletons << '\t' << row.histogram.to_string() << '\t'
       << format_metric(row.balancing) << '\t' << format_metric(row.variation) << '\t' << format_metric(row.score)
       << '\n';
  }
  return os.str();
}

/// Same values as render_tsv: metrics are emitted from their six-decimal
/// rendering (numbers) or as the string "inf".
inline nlohmann::ordered_json report_json(const Report& r) {
  using nlohmann::ordered_json;
  auto metric = [](double v) -> ordered_json {
    std::string s = format_metric(v);
    if (s == "inf") return s;
    return std::stod(s);
  };
  ordered_json j;
  j["category"] = r.category;
  j["fingerprint"] = r.fingerprint;
  j["best"] = r.best;
  j["rows"] = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json o;
    o["policy"] = row.policy_id;
    ordered_json val = ordered_json::object();
    for (const auto& c : r.columns) val[column_header(c)] = valuation_cell(c, row.valuation);
    o["valuation"] = std::move(val);
    o["n_components"] = row.n_components;
    o["n_singletons"] = row.n_singletons;
    o["histogram"] = row.histogram.to_string();
    o["balancing"] = metric(row.balancing);
    o["variation"] = metric(row.variation);
    o["score"] = metric(row.score);
    j["rows"].push_back(std::move(o));
  }
  j["diagnostics"] = ordered_json::array();
  for (const auto& f : r.diagnostics) j["diagnostics"].push_back({{"policy", f.policy_id}, {"reason", f.reason}});
  return j;
}

inline std::string render_json(const Report& r) { return report_json(r).dump(2) + "\n"; }

}  // namespace partopt
