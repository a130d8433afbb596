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

// partopt: command-line driver for partitioning-policy analysis.
//
// Machine-readable output goes to stdout, diagnostics to stderr.
// Exit codes: 0 ok, 1 usage, 2 parse/validation error, 3 pipeline failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "partopt/partopt.hpp"

namespace {

enum ExitStatus { kOk = 0, kUsage = 1, kInvalid = 2, kPipeline = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

// Parse errors are reported against the file they came from.
template <typename Fn>
auto parse_file(const std::string& path, Fn&& parse) {
  std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const partopt::ParseError& e) {
    throw partopt::ParseError(e.location(), e.kind(), path + ": " + e.message());
  }
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::size_t thread_setting() {
  const char* env = std::getenv("PARTOPT_THREADS");
  if (!env || !*env) return 1;
  try {
    return static_cast<std::size_t>(std::stoul(env));
  } catch (const std::exception&) {
    throw UsageError("PARTOPT_THREADS must be a non-negative integer");
  }
}

partopt::Category resolve_category(const std::string& id, const std::string& mask_file, const partopt::Pmdp& m) {
  auto cat = partopt::find_category(id.empty() ? "any" : id);
  if (!cat) throw UsageError("unknown category '" + id + "' (use any, or <low|medium|high>-<low|regular|high>)");
  if (!mask_file.empty()) cat->mask = cat->mask & parse_file(mask_file, partopt::parse_mask);
  partopt::check_mask(m, cat->mask);
  return *cat;
}

struct Options {
  std::string model, mask, policy, env, category, candidates, out, out_dir, config, dot, changed, grid_groups, base;
  std::string grid;
  bool trace = false, json = false, tsv = false;
};

int cmd_validate(const Options& o) {
  auto m = parse_file(o.model, [](const std::string& t) { return partopt::parse_model(t, false); });
  auto violations = partopt::validate_model(m);
  std::cout << violations.size() << " violations\n";
  for (const auto& v : violations) std::cerr << o.model << ": " << v.message << '\n';
  return violations.empty() ? kOk : kInvalid;
}

int cmd_prune(const Options& o) {
  auto m = parse_file(o.model, [](const std::string& t) { return partopt::parse_model(t); });
  auto mask = parse_file(o.mask, partopt::parse_mask);
  auto [masked, trace] = partopt::eliminate_unavailable(m, mask);
  partopt::Pmdp result = std::move(masked);
  if (!o.policy.empty()) {
    auto pol = parse_file(o.policy, partopt::parse_policy);
    auto [pruned, t2] = partopt::apply_policy(result, pol);
    result = std::move(pruned);
    trace.removed_states_round2 = std::move(t2.removed_states_round2);
    trace.removed_transitions_round2 = t2.removed_transitions_round2;
  }
  if (o.trace) {
    std::cout << "# states " << m.states.size() << " -> " << result.states.size() << '\n';
    std::cout << "# round1 removed_states " << trace.removed_states_round1.size() << " removed_transitions "
              << trace.removed_transitions_round1 << '\n';
    std::cout << "# round2 removed_states " << trace.removed_states_round2.size() << " removed_transitions "
              << trace.removed_transitions_round2 << '\n';
  }
  std::cout << partopt::serialize_model(result);
  return kOk;
}

int cmd_scc(const Options& o) {
  auto m = parse_file(o.model, [](const std::string& t) { return partopt::parse_model(t); });
  auto cs = partopt::decompose(m);
  auto h = partopt::size_histogram(cs);
  std::cout << "# components " << h.total() << " singletons " << h.singletons() << " sizes " << h.to_string() << '\n';
  std::cout << "component\tsize\tparams\tfirst_state\n";
  for (const auto& c : cs.components) {
    std::string params;
    for (const auto& p : c.params) params += (params.empty() ? "" : ",") + p;
    std::cout << c.id << '\t' << c.size << '\t' << (params.empty() ? "-" : params) << '\t'
              << m.states[c.states.front()].name << '\n';
  }
  if (!o.dot.empty()) write_file(o.dot, partopt::condensation_dot(m, cs));
  return kOk;
}

partopt::Valuation env_valuation(const Options& o) {
  if (o.env.empty()) return {};
  return parse_file(o.env, partopt::parse_valuation);
}

int cmd_score(const Options& o) {
  std::string text = read_file(o.model);
  auto m = parse_file(o.model, [](const std::string& t) { return partopt::parse_model(t); });
  auto pol = parse_file(o.policy, partopt::parse_policy);
  auto cat = resolve_category(o.category, o.mask, m);
  auto theta_env = env_valuation(o);
  auto row = partopt::evaluate_candidate(m, cat, pol, theta_env);
  auto report = partopt::build_report({row}, {}, m, cat.id, partopt::fingerprint(text));
  std::cout << (o.json ? partopt::render_json(report) : partopt::render_tsv(report));
  return kOk;
}

int cmd_search(const Options& o) {
  std::string text = read_file(o.model);
  auto m = parse_file(o.model, [](const std::string& t) { return partopt::parse_model(t); });
  auto cat = resolve_category(o.category, o.mask, m);
  partopt::CandidateSource src;
  src.category = cat.id;
  if (!o.candidates.empty()) {
    src.source = parse_file(o.candidates, partopt::parse_policies);
  } else {
    auto step = partopt::Rational::parse(o.grid);
    if (!step) throw UsageError("--grid expects a step such as 0.1 or 1/20");
    partopt::GridSpec grid;
    grid.step = *step;
    if (!o.base.empty()) grid.base = parse_file(o.base, partopt::parse_policy).valuation;
    std::vector<std::size_t> picked;
    if (!o.grid_groups.empty()) {
      for (const auto& p : split_csv(o.grid_groups)) {
        auto g = m.group_of(p);
        if (!g) throw UsageError("'" + p + "' is not a member of any parameter group");
        if (std::find(picked.begin(), picked.end(), *g) == picked.end()) picked.push_back(*g);
      }
    } else {
      for (std::size_t g = 0; g < m.groups.size(); ++g)
        if (!grid.base.count(m.groups[g].members.front())) picked.push_back(g);
    }
    for (std::size_t g : picked) grid.groups.push_back(m.groups[g]);
    src.source = std::move(grid);
  }
  auto cands = partopt::enumerate_candidates(src);
  auto report = partopt::best_policy(m, cat, cands, env_valuation(o), thread_setting(), partopt::fingerprint(text));
  for (const auto& f : report.diagnostics) std::cerr << "candidate " << f.policy_id << " failed: " << f.reason << '\n';
  bool json = o.json || (!o.tsv && std::filesystem::path(o.out).extension() == ".json");
  write_file(o.out, json ? partopt::render_json(report) : partopt::render_tsv(report));
  std::cout << report.best << '\n';
  return kOk;
}

int cmd_gen_case(const Options& o) {
  partopt::CaseConfig cfg = partopt::default_config();
  if (!o.config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(o.config));
    } catch (const nlohmann::json::parse_error& e) {
      throw partopt::ConfigInvalid(e.what());
    }
    cfg = partopt::case_config_from_json(j);
  }
  auto gen = partopt::generate_model(cfg);
  std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  write_file(dir / "case.pmdp", partopt::serialize_model(gen.model));
  for (const auto& c : gen.categories) write_file(dir / ("mask-" + c.id + ".txt"), partopt::serialize_mask(c.mask));
  write_file(dir / "manifest.json", partopt::manifest_json(gen, "case.pmdp").dump(2) + "\n");
  std::cout << (dir / "case.pmdp").string() << '\n';
  return kOk;
}

int cmd_affected(const Options& o) {
  auto m = parse_file(o.model, [](const std::string& t) { return partopt::parse_model(t); });
  auto pol = parse_file(o.policy, partopt::parse_policy);
  auto cat = resolve_category(o.category, o.mask, m);
  auto changed_list = split_csv(o.changed);
  for (const auto& p : changed_list)
    if (!m.has_param(p)) throw partopt::ModelError("unknown parameter '" + p + "' in --changed");
  std::set<partopt::ParamId> changed(changed_list.begin(), changed_list.end());
  auto cs = partopt::candidate_partition(m, cat, pol);
  auto hit = partopt::affected_components(cs, changed);
  std::size_t states = 0;
  for (auto id : hit) states += cs.components[id].size;
  std::cout << "# affected " << hit.size() << " of " << cs.components.size() << " components, " << states << " states\n";
  std::cout << "component\tsize\tparams\n";
  for (auto id : hit) {
    const auto& c = cs.components[id];
    std::string params;
    for (const auto& p : c.params) params += (params.empty() ? "" : ",") + p;
    std::cout << c.id << '\t' << c.size << '\t' << params << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best partitioning policy analysis for parametric MDPs"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a model for well-formedness");
  validate->add_option("model", o.model, "Model file")->required();

  auto* prune = app.add_subcommand("prune", "Apply an availability mask (and optionally a policy)");
  prune->add_option("model", o.model, "Model file")->required();
  prune->add_option("--mask", o.mask, "Mask file")->required();
  prune->add_option("--policy", o.policy, "Policy file");
  prune->add_flag("--trace", o.trace, "Prefix the output with pruning statistics");

  auto* scc = app.add_subcommand("scc", "List strongly connected components");
  scc->add_option("model", o.model, "Model file")->required();
  scc->add_option("--emit-dot", o.dot, "Write the condensation graph in DOT format");

  auto* score = app.add_subcommand("score", "Evaluate one policy");
  score->add_option("model", o.model, "Model file")->required();
  score->add_option("--policy", o.policy, "Policy file")->required();
  score->add_option("--env", o.env, "Environment valuation file");
  score->add_option("--category", o.category, "Situation category (default: any)");
  score->add_option("--mask", o.mask, "Additional mask file");
  auto* sj = score->add_flag("--json", o.json, "JSON output");
  auto* st = score->add_flag("--tsv", o.tsv, "TSV output (default)");
  sj->excludes(st);

  auto* search = app.add_subcommand("search", "Rank candidate policies for one category");
  search->add_option("model", o.model, "Model file")->required();
  search->add_option("--category", o.category, "Situation category")->required();
  auto* cand = search->add_option("--candidates", o.candidates, "Policy file with candidates");
  auto* grid = search->add_option("--grid", o.grid, "Enumerate group valuations with this step");
  cand->excludes(grid);
  search->add_option("--grid-groups", o.grid_groups, "Members naming the groups to enumerate (default: all not in --base)");
  search->add_option("--base", o.base, "Policy file fixing the parameters outside the grid");
  search->add_option("--env", o.env, "Environment valuation file");
  search->add_option("--mask", o.mask, "Additional mask file");
  search->add_option("--out", o.out, "Report file (.json for JSON, TSV otherwise)")->required();
  auto* rj = search->add_flag("--json", o.json, "Force JSON report");
  auto* rt = search->add_flag("--tsv", o.tsv, "Force TSV report");
  rj->excludes(rt);

  auto* gen = app.add_subcommand("gen-case", "Generate the energy-harvesting case study");
  gen->add_option("--config", o.config, "JSON configuration overriding the defaults");
  gen->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* affected = app.add_subcommand("affected", "Components affected by parameter changes");
  affected->add_option("model", o.model, "Model file")->required();
  affected->add_option("--policy", o.policy, "Policy file")->required();
  affected->add_option("--changed", o.changed, "Comma-separated changed parameters")->required();
  affected->add_option("--category", o.category, "Situation category (default: any)");
  affected->add_option("--mask", o.mask, "Additional mask file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*search && o.candidates.empty() && o.grid.empty()) throw UsageError("search needs --candidates or --grid");
    if (*validate) return cmd_validate(o);
    if (*prune) return cmd_prune(o);
    if (*scc) return cmd_scc(o);
    if (*score) return cmd_score(o);
    if (*search) return cmd_search(o);
    if (*gen) return cmd_gen_case(o);
    if (*affected) return cmd_affected(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const partopt::PruneError& e) {
    std::cerr << "pipeline failure: " << e.what() << '\n';
    return kPipeline;
  } catch (const partopt::SearchError& e) {
    std::cerr << "pipeline failure: " << e.what() << '\n';
    return kPipeline;
  } catch (const partopt::EmptyPartition& e) {
    std::cerr << "pipeline failure: " << e.what() << '\n';
    return kPipeline;
  } catch (const partopt::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
