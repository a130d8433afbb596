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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "partopt/error.hpp"
#include "partopt/format.hpp"
#include "partopt/model.hpp"
#include "partopt/search.hpp"

// Self-adaptive energy-harvesting case study: an hourly environment chain, a
// three-level battery and N sensors with four operating modes, composed into
// one parametric MDP.
//
// Each step the environment follows its distribution, one sensor (chosen by
// environment position, round robin) reacts to the controller's action, and
// the battery level is recomputed from harvested energy and consumption.
// Actions are operating envelopes named after the highest mode they reach:
//
//   busy     s<k>.p2 -> busy,    s<k>.p3 -> idle,    s<k>.p4 -> standby, s<k>.p0  -> stay
//   idle     s<k>.p5 -> idle,    s<k>.p6 -> standby, s<k>.p0b -> stay
//   standby  s<k>.p7 -> standby, s<k>.p8 -> sleep,   s<k>.p0c -> stay
//   sleep    1 -> sleep
//
// so every mode-switch distribution is one parameter group and the stay
// members are the self-loop mass of each mode. Leaving an environment state
// with a parametric distribution, all sensors hold their mode; this keeps
// every branch probability linear in the parameters.

namespace partopt {

enum class Mode { Busy, Idle, Standby, Sleep };
inline constexpr std::array<Mode, 4> kModes{Mode::Busy, Mode::Idle, Mode::Standby, Mode::Sleep};

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Busy: return "busy";
    case Mode::Idle: return "idle";
    case Mode::Standby: return "standby";
    case Mode::Sleep: return "sleep";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : kModes)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct EnvBranch {
  std::string target;
  std::string prob;  // expression text, e.g. "1", "e3", "1 - e3"
};

struct EnvState {
  std::string name;
  Rational energy;  // expected harvest in Wh for the step leaving this state
  std::vector<EnvBranch> next;  // empty: the following state (cyclically) with probability 1
};

/// One outcome of a mode-switch distribution: group member suffix and the
/// resulting mode (nullopt = keep the current mode).
struct SwitchOutcome {
  std::string member;
  std::optional<Mode> mode;
};

struct CaseConfig {
  std::size_t n_sensors = 2;
  std::vector<EnvState> env_states;
  std::vector<ParamGroup> env_groups;
  std::array<Rational, 2> band_cutoffs{200, 400};  // low < 200 <= medium < 400 <= high
  std::array<Rational, 2> battery_thresholds{200, 600};
  std::map<Mode, Rational> mode_power;
  std::map<std::pair<Mode, Mode>, Rational> switch_cost;  // absent pairs cost 0
  Rational base_load = 250;
  std::map<Mode, Rational> utility;
  std::map<Mode, std::vector<SwitchOutcome>> param_scheme;  // per action; empty = deterministic
};

/// Default hourly harvest profile in Wh (24 states, h0 = midnight).
inline const std::array<int, 24>& default_hourly_energy() {
  static const std::array<int, 24> e{0, 0, 0, 0, 0, 0, 50, 120, 180, 250, 320, 400,
                                     465, 420, 360, 280, 210, 140, 60, 0, 0, 0, 0, 0};
  return e;
}

inline std::map<Mode, std::vector<SwitchOutcome>> default_param_scheme() {
  return {
      {Mode::Busy, {{"p2", Mode::Busy}, {"p3", Mode::Idle}, {"p4", Mode::Standby}, {"p0", std::nullopt}}},
      {Mode::Idle, {{"p5", Mode::Idle}, {"p6", Mode::Standby}, {"p0b", std::nullopt}}},
      {Mode::Standby, {{"p7", Mode::Standby}, {"p8", Mode::Sleep}, {"p0c", std::nullopt}}},
      {Mode::Sleep, {}},
  };
}

inline CaseConfig default_config() {
  CaseConfig cfg;
  const auto& energy = default_hourly_energy();
  for (std::size_t h = 0; h < energy.size(); ++h) cfg.env_states.push_back({"h" + std::to_string(h), energy[h], {}});
  cfg.mode_power = {{Mode::Busy, 10}, {Mode::Idle, 5}, {Mode::Standby, 2}, {Mode::Sleep, 1}};
  for (Mode a : kModes)
    for (Mode b : kModes)
      if (a != b) cfg.switch_cost[{a, b}] = 1;
  cfg.utility = {{Mode::Busy, 4}, {Mode::Idle, 2}, {Mode::Standby, 1}, {Mode::Sleep, 0}};
  cfg.param_scheme = default_param_scheme();
  return cfg;
}

/// Allowed actions per (environment band, battery level). Richer situations
/// unlock higher-power envelopes; every cell keeps standby and sleep.
///
///   env \ battery   low               regular             high
///   low             standby,sleep     standby,sleep       idle,standby,sleep
///   medium          standby,sleep     idle,standby,sleep  all four
///   high            idle,standby,sleep all four           all four
inline std::set<ActionId> category_actions(EnvLevel env, BatteryLevel bat) {
  int level = static_cast<int>(env) + static_cast<int>(bat);
  if (level <= 1) return {"standby", "sleep"};
  if (level == 2) return {"idle", "standby", "sleep"};
  return {"busy", "idle", "standby", "sleep"};
}

inline std::string category_id(EnvLevel env, BatteryLevel bat) {
  return std::string(to_string(env)) + "-" + to_string(bat);
}

inline AvailabilityMask category_mask(EnvLevel env, BatteryLevel bat) {
  AvailabilityMask mask;
  mask.id = category_id(env, bat);
  mask.rules.push_back({LabelPredicate{{{"env", to_string(env)}, {"battery", to_string(bat)}}}, category_actions(env, bat)});
  return mask;
}

inline std::vector<Category> all_categories() {
  std::vector<Category> out;
  for (EnvLevel e : {EnvLevel::Low, EnvLevel::Medium, EnvLevel::High})
    for (BatteryLevel b : {BatteryLevel::Low, BatteryLevel::Regular, BatteryLevel::High})
      out.push_back({category_id(e, b), e, b, category_mask(e, b)});
  return out;
}

/// Looks up one of the nine categories by id ("low-low", ...). The id "any"
/// names the unrestricted situation.
inline std::optional<Category> find_category(std::string_view id) {
  if (id == "any") return Category{"any", EnvLevel::High, BatteryLevel::High, {}};
  for (auto& c : all_categories())
    if (c.id == id) return c;
  return std::nullopt;
}

struct GeneratedModel {
  Pmdp model;
  std::vector<Category> categories;
  std::vector<ParamId> policy_params;
  std::vector<ParamId> env_params;
};

namespace detail {

inline LinExpr parse_expr_text(const std::string& text) {
  auto tokens = tokenize(text, 1);
  LineReader r(std::move(tokens), 1);
  LinExpr e = r.expr(nullptr);
  r.expect_end();
  return e;
}

}  // namespace detail

inline void validate_config(const CaseConfig& cfg) {
  if (cfg.n_sensors < 1) throw ConfigInvalid("n_sensors must be at least 1");
  if (cfg.env_states.empty()) throw ConfigInvalid("environment chain is empty");
  if (!(cfg.battery_thresholds[0] < cfg.battery_thresholds[1])) throw ConfigInvalid("battery thresholds must be strictly increasing");
  if (!(cfg.band_cutoffs[0] < cfg.band_cutoffs[1])) throw ConfigInvalid("energy band cutoffs must be strictly increasing");
  for (Mode m : kModes) {
    if (!cfg.mode_power.count(m)) throw ConfigInvalid(std::string("missing power for mode ") + to_string(m));
    if (!cfg.param_scheme.count(m)) throw ConfigInvalid(std::string("missing switch scheme for action ") + to_string(m));
  }
  std::size_t states = cfg.env_states.size() * 3;
  for (std::size_t k = 0; k < cfg.n_sensors; ++k) {
    states *= 4;
    if (states > 5'000'000) throw ConfigInvalid("product state space too large");
  }
  std::set<std::string> names;
  for (const auto& e : cfg.env_states) {
    if (!is_identifier(e.name) || e.name.find('.') != std::string::npos)
      throw ConfigInvalid("environment state name '" + e.name + "' is not a plain identifier");
    if (!names.insert(e.name).second) throw ConfigInvalid("duplicate environment state '" + e.name + "'");
    if (e.energy < 0) throw ConfigInvalid("negative energy in '" + e.name + "'");
  }
  std::set<std::string> members;
  for (const auto& [mode, outcomes] : cfg.param_scheme) {
    if (outcomes.size() == 1) throw ConfigInvalid(std::string("scheme for ") + to_string(mode) + " needs 0 or >= 2 outcomes");
    std::set<std::optional<Mode>> seen;
    for (const auto& o : outcomes) {
      if (!is_identifier(o.member)) throw ConfigInvalid("bad scheme member '" + o.member + "'");
      if (!members.insert(o.member).second) throw ConfigInvalid("scheme member '" + o.member + "' used twice");
      if (!seen.insert(o.mode).second) throw ConfigInvalid(std::string("repeated outcome in scheme for ") + to_string(mode));
    }
  }
}

/// Builds the full product (|env| x 3 x 4^n states, before any pruning).
inline GeneratedModel generate_model(const CaseConfig& cfg) {
  validate_config(cfg);
  const std::size_t E = cfg.env_states.size();
  const std::size_t n = cfg.n_sensors;
  std::size_t mode_combos = 1;
  for (std::size_t k = 0; k < n; ++k) mode_combos *= 4;

  // Environment distributions.
  std::unordered_map<std::string, std::size_t> env_ix;
  for (std::size_t i = 0; i < E; ++i) env_ix.emplace(cfg.env_states[i].name, i);
  std::vector<std::vector<std::pair<LinExpr, std::size_t>>> env_next(E);
  std::vector<bool> env_parametric(E, false);
  std::set<ParamId> env_param_set;
  std::set<ParamId> env_grouped;
  for (const auto& g : cfg.env_groups) {
    if (g.members.size() < 2) throw ConfigInvalid("environment groups need at least two members");
    for (const auto& p : g.members)
      if (!env_grouped.insert(p).second) throw ConfigInvalid("environment parameter '" + p + "' in two groups");
  }
  for (std::size_t i = 0; i < E; ++i) {
    const auto& es = cfg.env_states[i];
    if (es.next.empty()) {
      env_next[i].push_back({LinExpr(1), (i + 1) % E});
      continue;
    }
    std::set<std::size_t> targets;
    for (const auto& br : es.next) {
      auto it = env_ix.find(br.target);
      if (it == env_ix.end()) throw ConfigInvalid("unknown environment target '" + br.target + "'");
      if (!targets.insert(it->second).second) throw ConfigInvalid("repeated environment target '" + br.target + "'");
      LinExpr e;
      try {
        e = detail::parse_expr_text(br.prob);
      } catch (const ParseError& err) {
        throw ConfigInvalid("bad probability '" + br.prob + "': " + err.message());
      }
      if (e.is_zero()) throw ConfigInvalid("zero environment branch from '" + es.name + "'");
      for (const auto& p : e.params()) {
        if (!env_grouped.count(p)) throw ConfigInvalid("environment parameter '" + p + "' belongs to no group");
        env_param_set.insert(p);
      }
      if (!e.is_constant()) env_parametric[i] = true;
      env_next[i].push_back({std::move(e), it->second});
    }
  }
  for (const auto& p : env_grouped)
    if (!env_param_set.count(p)) throw ConfigInvalid("environment parameter '" + p + "' is never used");

  GeneratedModel out;
  Pmdp& m = out.model;
  m.name = "energy_harvesting";
  for (std::size_t k = 1; k <= n; ++k) {
    std::string ns = "s" + std::to_string(k) + ".";
    for (Mode a : kModes) {
      const auto& outcomes = cfg.param_scheme.at(a);
      if (outcomes.empty()) continue;
      ParamGroup g;
      for (const auto& o : outcomes) {
        g.members.push_back(ns + o.member);
        out.policy_params.push_back(ns + o.member);
      }
      m.groups.push_back(std::move(g));
    }
  }
  std::set<ParamId> sensor_params(out.policy_params.begin(), out.policy_params.end());
  for (const auto& g : cfg.env_groups)
    for (const auto& p : g.members) {
      if (sensor_params.count(p)) throw ConfigInvalid("environment parameter '" + p + "' collides with a sensor parameter");
      out.env_params.push_back(p);
    }
  m.params = out.policy_params;
  m.params.insert(m.params.end(), out.env_params.begin(), out.env_params.end());
  for (const auto& g : cfg.env_groups) m.groups.push_back(g);
  for (Mode a : kModes) m.actions.emplace_back(to_string(a));

  const std::array<BatteryLevel, 3> levels{BatteryLevel::Low, BatteryLevel::Regular, BatteryLevel::High};
  auto band = [&](const Rational& energy) {
    if (energy < cfg.band_cutoffs[0]) return EnvLevel::Low;
    if (energy < cfg.band_cutoffs[1]) return EnvLevel::Medium;
    return EnvLevel::High;
  };
  // Representative stored energy of each level.
  const Rational t0 = cfg.battery_thresholds[0], t1 = cfg.battery_thresholds[1];
  const std::array<Rational, 3> stored{t0 / 2, (t0 + t1) / 2, t1 + (t1 - t0) / 2};
  auto classify = [&](const Rational& e) {
    if (e < t0) return std::size_t{0};
    if (e < t1) return std::size_t{1};
    return std::size_t{2};
  };
  auto decode = [&](std::size_t combo) {
    std::vector<Mode> modes(n);
    for (std::size_t k = n; k-- > 0;) {
      modes[k] = kModes[combo % 4];
      combo /= 4;
    }
    return modes;
  };
  auto encode = [&](const std::vector<Mode>& modes) {
    std::size_t combo = 0;
    for (Mode md : modes) combo = combo * 4 + static_cast<std::size_t>(md);
    return combo;
  };
  auto index_of = [&](std::size_t env, std::size_t bat, std::size_t combo) { return (env * 3 + bat) * mode_combos + combo; };

  m.states.reserve(E * 3 * mode_combos);
  for (std::size_t e = 0; e < E; ++e)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < mode_combos; ++c) {
        auto modes = decode(c);
        State st;
        st.name = cfg.env_states[e].name + "." + to_string(levels[b]);
        st.labels = {{"env", to_string(band(cfg.env_states[e].energy))}, {"battery", to_string(levels[b])}};
        for (std::size_t k = 0; k < n; ++k) {
          st.name += std::string(".") + to_string(modes[k]);
          st.labels.emplace_back("s" + std::to_string(k + 1), to_string(modes[k]));
          st.reward += cfg.utility.count(modes[k]) ? cfg.utility.at(modes[k]) : Rational(0);
        }
        st.labels.emplace_back("envstate", cfg.env_states[e].name);
        m.states.push_back(std::move(st));
      }
  m.initial = index_of(0, 1, encode(std::vector<Mode>(n, Mode::Sleep)));

  for (std::size_t e = 0; e < E; ++e) {
    const std::optional<std::size_t> adapting = env_parametric[e] ? std::nullopt : std::optional<std::size_t>(e % n);
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < mode_combos; ++c) {
        const auto modes = decode(c);
        Rational power;
        for (Mode md : modes) power += cfg.mode_power.at(md);
        State& st = m.states[index_of(e, b, c)];
        for (Mode action : kModes) {
          // Outcomes of the adapting sensor: (weight, resulting modes).
          std::vector<std::pair<LinExpr, std::vector<Mode>>> sensor;
          if (!adapting) {
            sensor.push_back({LinExpr(1), modes});
          } else {
            const auto& outcomes = cfg.param_scheme.at(action);
            std::string ns = "s" + std::to_string(*adapting + 1) + ".";
            if (outcomes.empty()) {
              auto next = modes;
              next[*adapting] = action;
              sensor.push_back({LinExpr(1), next});
            } else {
              for (const auto& o : outcomes) {
                auto next = modes;
                if (o.mode) next[*adapting] = *o.mode;
                sensor.push_back({LinExpr::param(ns + o.member), next});
              }
            }
          }
          Choice ch{to_string(action), {}};
          std::unordered_map<StateIndex, std::size_t> slot;
          for (const auto& [env_w, env_t] : env_next[e])
            for (const auto& [sen_w, next_modes] : sensor) {
              LinExpr w = env_w.is_constant() ? sen_w * env_w.constant() : env_w * sen_w.constant();
              Rational used = power;
              for (std::size_t k = 0; k < n; ++k)
                if (modes[k] != next_modes[k]) {
                  auto it = cfg.switch_cost.find({modes[k], next_modes[k]});
                  if (it != cfg.switch_cost.end()) used += it->second;
                }
              std::size_t next_b = classify(stored[b] + cfg.env_states[e].energy - cfg.base_load - used);
              StateIndex target = index_of(env_t, next_b, encode(next_modes));
              auto [it, fresh] = slot.emplace(target, ch.branches.size());
              if (fresh)
                ch.branches.push_back({std::move(w), target});
              else
                ch.branches[it->second].prob += w;
            }
          st.choices.push_back(std::move(ch));
        }
      }
  }

  auto violations = validate_model(m);
  if (!violations.empty()) throw ConfigInvalid("generated model is invalid: " + violations.front().message);
  out.categories = all_categories();
  return out;
}

// ---- JSON config and manifest -----------------------------------------

namespace detail {

inline Rational json_rational(const nlohmann::json& v, const std::string& what) {
  std::string text;
  if (v.is_string())
    text = v.get<std::string>();
  else if (v.is_number())
    text = v.dump();
  else
    throw ConfigInvalid(what + " must be a number");
  bool neg = !text.empty() && text[0] == '-';
  auto r = Rational::parse(neg ? text.substr(1) : text);
  if (!r) throw ConfigInvalid(what + " is not an exact decimal or fraction: " + text);
  return neg ? -*r : *r;
}

inline Mode json_mode(const std::string& s) {
  auto m = parse_mode(s);
  if (!m) throw ConfigInvalid("unknown mode '" + s + "'");
  return *m;
}

}  // namespace detail

/// Overrides the defaults with whatever keys `j` provides:
/// n_sensors, env_states [{name, energy, next:[{target, prob}]}], env_groups,
/// band_cutoffs, battery_thresholds, mode_power, switch_cost {"a->b": wh},
/// base_load, utility, param_scheme {action: [[member, mode|"stay"], ...]}.
inline CaseConfig case_config_from_json(const nlohmann::json& j) {
  CaseConfig cfg = default_config();
  try {
    if (j.contains("n_sensors")) cfg.n_sensors = j.at("n_sensors").get<std::size_t>();
    if (j.contains("env_states")) {
      cfg.env_states.clear();
      for (const auto& e : j.at("env_states")) {
        EnvState es;
        es.name = e.at("name").get<std::string>();
        es.energy = detail::json_rational(e.at("energy"), "energy of " + es.name);
        if (e.contains("next"))
          for (const auto& b : e.at("next")) {
            const auto& p = b.at("prob");
            es.next.push_back({b.at("target").get<std::string>(), p.is_string() ? p.get<std::string>() : p.dump()});
          }
        cfg.env_states.push_back(std::move(es));
      }
    }
    if (j.contains("env_groups")) {
      cfg.env_groups.clear();
      for (const auto& g : j.at("env_groups")) cfg.env_groups.push_back({g.get<std::vector<std::string>>()});
    }
    auto pair_of = [&](const char* key, std::array<Rational, 2>& dst) {
      if (!j.contains(key)) return;
      const auto& a = j.at(key);
      if (!a.is_array() || a.size() != 2) throw ConfigInvalid(std::string(key) + " must be a two-element array");
      dst = {detail::json_rational(a[0], key), detail::json_rational(a[1], key)};
    };
    pair_of("band_cutoffs", cfg.band_cutoffs);
    pair_of("battery_thresholds", cfg.battery_thresholds);
    auto mode_map = [&](const char* key, std::map<Mode, Rational>& dst) {
      if (!j.contains(key)) return;
      for (const auto& [k, v] : j.at(key).items()) dst[detail::json_mode(k)] = detail::json_rational(v, key);
    };
    mode_map("mode_power", cfg.mode_power);
    mode_map("utility", cfg.utility);
    if (j.contains("switch_cost")) {
      cfg.switch_cost.clear();
      for (const auto& [k, v] : j.at("switch_cost").items()) {
        auto arrow = k.find("->");
        if (arrow == std::string::npos) throw ConfigInvalid("switch_cost keys look like \"busy->idle\"");
        cfg.switch_cost[{detail::json_mode(k.substr(0, arrow)), detail::json_mode(k.substr(arrow + 2))}] =
            detail::json_rational(v, "switch_cost");
      }
    }
    if (j.contains("base_load")) cfg.base_load = detail::json_rational(j.at("base_load"), "base_load");
    if (j.contains("param_scheme")) {
      for (const auto& [k, v] : j.at("param_scheme").items()) {
        std::vector<SwitchOutcome> outcomes;
        for (const auto& o : v) {
          auto target = o.at(1).get<std::string>();
          outcomes.push_back({o.at(0).get<std::string>(), target == "stay" ? std::nullopt : std::optional(detail::json_mode(target))});
        }
        cfg.param_scheme[detail::json_mode(k)] = std::move(outcomes);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(e.what());
  }
  return cfg;
}

/// Categories (with their mask file names), groups and parameter roles.
inline nlohmann::ordered_json manifest_json(const GeneratedModel& g, const std::string& model_file) {
  nlohmann::ordered_json j;
  j["model"] = model_file;
  j["states"] = g.model.states.size();
  j["transitions"] = g.model.transition_count();
  j["categories"] = nlohmann::ordered_json::array();
  for (const auto& c : g.categories) {
    nlohmann::ordered_json cj;
    cj["id"] = c.id;
    cj["env_level"] = to_string(c.env_level);
    cj["battery_level"] = to_string(c.battery_level);
    cj["mask"] = "mask-" + c.id + ".txt";
    std::vector<std::string> allowed;
    for (const auto& r : c.mask.rules) allowed.assign(r.allowed.begin(), r.allowed.end());
    cj["allowed_actions"] = allowed;
    j["categories"].push_back(std::move(cj));
  }
  j["policy_params"] = g.policy_params;
  j["env_params"] = g.env_params;
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& grp : g.model.groups) j["groups"].push_back(grp.members);
  return j;
}

}  // namespace partopt
