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
#include <sstream>
#include <string>
#include <vector>

#include "partopt/partopt.hpp"
#include "test_support.hpp"

namespace partopt {
namespace {

constexpr const char* kMinimal =
    "pmdp one\n"
    "action a\n"
    "state s0\n"
    "init s0\n"
    "trans s0 a : 1 -> s0\n";

constexpr const char* kBlock =
    "# one sensor, standby/sleep only\n"
    "pmdp block\n"
    "param p7 p8 p0c\n"
    "group p7 p8 p0c\n"
    "action standby sleep\n"
    "state standby reward 1 label mode=standby\n"
    "state sleep label mode=sleep\n"
    "init standby\n"
    "trans standby standby : p7 + p0c -> standby + p8 -> sleep\n"
    "trans standby sleep : 1 -> sleep\n"
    "trans sleep sleep : 1 -> sleep\n"
    "trans sleep standby : 1 -> standby\n";

ParseError parse_error(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return ParseError({0, 0}, ParseError::Kind::Syntax, "none");
}

TEST(ParseModel, Minimal) {
  Pmdp m = parse_model(kMinimal);
  EXPECT_EQ(m.name, "one");
  ASSERT_EQ(m.states.size(), 1u);
  EXPECT_EQ(m.initial, 0u);
  ASSERT_EQ(m.states[0].choices.size(), 1u);
  EXPECT_EQ(m.states[0].choices[0].branches[0].prob, LinExpr(1));
}

TEST(ParseModel, SensorBlock) {
  Pmdp m = parse_model(kBlock);
  EXPECT_EQ(m.states.size(), 2u);
  EXPECT_EQ(m.groups.size(), 1u);
  EXPECT_EQ(m.transition_count(), 5u);
  EXPECT_EQ(m.states[0].reward, Rational(1));
  EXPECT_EQ(label_value(m.states[1].labels, "mode"), std::optional<std::string_view>("sleep"));
  const auto& c = m.states[0].choices[0];
  EXPECT_EQ(c.branches[0].prob, LinExpr::param("p7") + LinExpr::param("p0c"));
  EXPECT_TRUE(validate_model(m).empty());
}

TEST(ParseModel, SumBelowOneIsRangeErrorAtTransLine) {
  std::string text =
      "pmdp bad\naction a\nstate s0\nstate s1\ninit s0\n"
      "trans s0 a : 0.5 -> s0 + 0.4 -> s1\n"
      "trans s1 a : 1 -> s1\n";
  ParseError e = parse_error(text);
  EXPECT_EQ(e.kind(), ParseError::Kind::Range);
  EXPECT_EQ(e.location().line, 6u);
  EXPECT_EQ(e.location().column, 1u);
}

TEST(ParseModel, ErrorKindsAndLocations) {
  std::string head = "pmdp x\nparam q\naction a\nstate s0\n";
  ParseError unknown_state = parse_error(head + "init s0\ntrans s0 a : 1 -> nowhere\n");
  EXPECT_EQ(unknown_state.kind(), ParseError::Kind::UnknownSymbol);
  EXPECT_EQ(unknown_state.location(), (SourceLocation{6, 19}));

  ParseError unknown_param = parse_error(head + "init s0\ntrans s0 a : r -> s0\n");
  EXPECT_EQ(unknown_param.kind(), ParseError::Kind::UnknownSymbol);
  EXPECT_EQ(unknown_param.location(), (SourceLocation{6, 14}));

  ParseError dup = parse_error(head + "state s0\ninit s0\n");
  EXPECT_EQ(dup.kind(), ParseError::Kind::DuplicateDeclaration);
  EXPECT_EQ(dup.location(), (SourceLocation{5, 7}));

  ParseError use_before = parse_error("pmdp x\naction a\nstate s0\ninit s0\ntrans s0 b : 1 -> s0\n");
  EXPECT_EQ(use_before.kind(), ParseError::Kind::UnknownSymbol);

  ParseError syntax = parse_error(head + "init s0\ntrans s0 a 1 -> s0\n");
  EXPECT_EQ(syntax.kind(), ParseError::Kind::Syntax);
  EXPECT_EQ(syntax.location().line, 6u);

  ParseError range = parse_error(head + "init s0\ntrans s0 a : 2*q -> s0 + 1 - 2*q -> s0\n");
  EXPECT_NE(range.kind(), ParseError::Kind::Syntax);

  ParseError dead = parse_error(head + "state s1\ninit s0\ntrans s0 a : 1 -> s1\n");
  EXPECT_EQ(dead.kind(), ParseError::Kind::Range);
  EXPECT_EQ(dead.location().line, 5u);

  ParseError no_init = parse_error("pmdp x\naction a\nstate s0\ntrans s0 a : 1 -> s0\n");
  EXPECT_EQ(no_init.kind(), ParseError::Kind::Syntax);
  EXPECT_NE(std::string(no_init.what()).find("syntax"), std::string::npos);
}

TEST(ParseModel, RoundTrip) {
  for (const char* text : {kMinimal, kBlock}) {
    Pmdp m = parse_model(text);
    std::string canon = serialize_model(m);
    Pmdp back = parse_model(canon);
    EXPECT_EQ(back, m);
    EXPECT_EQ(serialize_model(back), canon);
  }
}

TEST(ParseModel, ThirdsStayExact) {
  std::string text =
      "pmdp thirds\naction a\nstate s0\nstate s1\nstate s2\ninit s0\n"
      "trans s0 a : 1/3 -> s0 + 1/3 -> s1 + 1/3 -> s2\n"
      "trans s1 a : 1 -> s0\ntrans s2 a : 1 -> s0\n";
  Pmdp m = parse_model(text);
  std::string out = serialize_model(m);
  EXPECT_NE(out.find("1/3 -> s0 + 1/3 -> s1 + 1/3 -> s2"), std::string::npos);
  EXPECT_EQ(parse_model(out), m);
}

TEST(ParseModel, GeneratedModelRoundTrips) {
  auto g = generate_model(default_config());
  std::string text = serialize_model(g.model);
  Pmdp back = parse_model(text);
  EXPECT_EQ(back, g.model);
  EXPECT_EQ(serialize_model(back), text);
}

TEST(ParseModel, Deterministic) {
  EXPECT_EQ(parse_model(kBlock), parse_model(kBlock));
  EXPECT_EQ(serialize_model(parse_model(kBlock)), serialize_model(parse_model(kBlock)));
}

TEST(ParseModel, ErrorLocationsStayInsideInput) {
  std::mt19937_64 rng(99);
  const std::string base = kBlock;
  const std::string alphabet = "abz019 .:+-*=/#>,\n";
  std::uniform_int_distribution<std::size_t> pick_char(0, alphabet.size() - 1);
  int errors = 0;
  for (int i = 0; i < 1500; ++i) {
    std::string text = base;
    std::uniform_int_distribution<int> edits(1, 4);
    for (int k = edits(rng); k > 0; --k) {
      std::uniform_int_distribution<std::size_t> pos(0, text.size() - 1);
      std::size_t at = pos(rng);
      switch (rng() % 3) {
        case 0: text.erase(at, 1); break;
        case 1: text.insert(at, 1, alphabet[pick_char(rng)]); break;
        default: text[at] = alphabet[pick_char(rng)]; break;
      }
    }
    try {
      parse_model(text);
    } catch (const ParseError& e) {
      ++errors;
      std::vector<std::string> lines;
      std::istringstream is(text);
      for (std::string l; std::getline(is, l);) lines.push_back(l);
      if (text.empty() || text.back() == '\n') lines.emplace_back();
      const auto& loc = e.location();
      ASSERT_GE(loc.line, 1u) << text;
      ASSERT_LE(loc.line, lines.size()) << text;
      ASSERT_GE(loc.column, 1u) << text;
      ASSERT_LE(loc.column, lines[loc.line - 1].size() + 1) << e.what() << "\n" << text;
    }
  }
  EXPECT_GT(errors, 500);
}

TEST(ParsePolicy, NamespacedGroupLine) {
  Policy pol = parse_policy("policy b3\ns1: p2=0, p3=0.8, p4=0.2, p0=0\n");
  EXPECT_EQ(pol.id, "b3");
  EXPECT_EQ(pol.valuation.size(), 4u);
  EXPECT_EQ(pol.valuation.at("s1.p3"), Rational(4, 5));
  EXPECT_EQ(pol.valuation.at("s1.p4"), Rational(1, 5));
  EXPECT_EQ(pol.valuation.at("s1.p2"), Rational(0));
}

TEST(ParsePolicy, PlainGroupLine) {
  Policy pol = parse_policy("policy w\np5=0.5, p6=0.5, p0=0\n");
  EXPECT_EQ(pol.valuation.at("p5"), Rational(1, 2));
  EXPECT_EQ(pol.valuation.at("p0"), Rational(0));
}

TEST(ParsePolicy, GroupNotSummingToOne) {
  try {
    parse_policy("policy z\np2=0, p3=0, p4=0, p0=0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::Range);
    EXPECT_EQ(e.location().line, 2u);
  }
  EXPECT_THROW(parse_policy("policy z\np2=1.5\n"), ParseError);
  EXPECT_THROW(parse_policy("policy z\np2=1\np2=1\n"), ParseError);
  EXPECT_THROW(parse_policy("p2=1\n"), ParseError);
  EXPECT_THROW(parse_policy("policy a\np=1\npolicy b\np=1\n"), ParseError);
}

TEST(ParsePolicy, HyphenatedIds) {
  EXPECT_EQ(parse_policy("policy grid-07\n").id, "grid-07");
  EXPECT_EQ(parse_mask("mask low-low\n").id, "low-low");
  EXPECT_THROW(parse_policy("policy a - b\n"), ParseError);
  EXPECT_THROW(parse_policy("policy a-\n"), ParseError);
}

TEST(ParsePolicy, SeveralPoliciesWithRules) {
  auto all = parse_policies(
      "policy a\ns1: p7=1, p8=0, p0c=0\nallow mode=busy : idle sleep\n"
      "policy b\ns1: p7=0, p8=1, p0c=0\n");
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].mask.rules.size(), 1u);
  EXPECT_EQ(all[0].mask.rules[0].allowed, (std::set<ActionId>{"idle", "sleep"}));
  EXPECT_TRUE(all[1].mask.empty());
}

TEST(ParsePolicy, SerializeRoundTrip) {
  auto g = generate_model(default_config());
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Policy pol = testing::random_policy(rng, g.model, "r" + std::to_string(i));
    EXPECT_EQ(parse_policy(serialize_policy(pol, g.model)), pol);
  }
}

TEST(ParseMask, HeaderAndRules) {
  auto mask = parse_mask("mask low-low\nallow env=low, battery=low : standby sleep\nallow * : sleep standby idle\n");
  EXPECT_EQ(mask.id, "low-low");
  ASSERT_EQ(mask.rules.size(), 2u);
  EXPECT_EQ(mask.rules[0].when.tests.size(), 2u);
  EXPECT_TRUE(mask.rules[1].when.tests.empty());
  EXPECT_EQ(parse_mask(serialize_mask(mask)), mask);
  EXPECT_THROW(parse_mask("allow * :\n"), ParseError);
  EXPECT_THROW(parse_mask("allow * : a\nmask late\n"), ParseError);
}

TEST(ParseValuation, Lines) {
  auto v = parse_valuation("e1=0.3\ne2=1/3\n# comment\n");
  EXPECT_EQ(v.at("e1"), Rational(3, 10));
  EXPECT_EQ(v.at("e2"), Rational(1, 3));
}

}  // namespace
}  // namespace partopt
