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
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "partopt/error.hpp"
#include "partopt/model.hpp"

// Line-oriented text formats for models, policies, masks and valuations.
//
//   pmdp <name>
//   param <id> ...
//   group <id> <id> ...
//   action <id> ...
//   state <id> [reward <num>] [label k=v,...]
//   init <id>
//   trans <state> <action> : <expr> -> <state> [+ <expr> -> <state> ...]
//
// Policy files start with `policy <id>` and contain assignment lines
// (`[ns:] p=v[, q=w ...]`, a line with several assignments is a group that
// must sum to one) and `allow <k=v,...|*> : <action> ...` mask lines.

namespace partopt {

struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;
  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

class ParseError : public Error {
public:
  enum class Kind { Syntax, DuplicateDeclaration, UnknownSymbol, Range };

  ParseError(SourceLocation loc, Kind kind, std::string message)
      : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + kind_name(kind) + ": " + message),
        location_(loc), kind_(kind), message_(std::move(message)) {}

  const SourceLocation& location() const { return location_; }
  Kind kind() const { return kind_; }
  const std::string& message() const { return message_; }

  static const char* kind_name(Kind k) {
    switch (k) {
      case Kind::Syntax: return "syntax";
      case Kind::DuplicateDeclaration: return "duplicate-declaration";
      case Kind::UnknownSymbol: return "unknown-symbol";
      case Kind::Range: return "range";
    }
    return "?";
  }

private:
  SourceLocation location_;
  Kind kind_;
  std::string message_;
};

namespace detail {

struct Token {
  enum class Type { Ident, Number, Colon, Arrow, Plus, Minus, Star, Equals, Comma, End };
  Type type;
  std::string text;
  std::size_t column;
};

inline bool ident_char(char c, bool first) {
  if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_') return true;
  return !first && ((c >= '0' && c <= '9') || c == '.');
}

inline std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  using T = Token::Type;
  std::vector<Token> out;
  std::size_t i = 0;
  auto err = [&](std::size_t col, const std::string& msg) {
    return ParseError({line_no, col + 1}, ParseError::Kind::Syntax, msg);
  };
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (ident_char(c, true)) {
      while (i < line.size() && ident_char(line[i], false)) ++i;
      out.push_back({T::Ident, std::string(line.substr(start, i - start)), start + 1});
    } else if (c >= '0' && c <= '9') {
      auto digits = [&] {
        std::size_t s = i;
        while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
        return i > s;
      };
      digits();
      if (i < line.size() && line[i] == '.') {
        ++i;
        if (!digits()) throw err(i, "expected digits after '.'");
      } else if (i < line.size() && line[i] == '/') {
        ++i;
        if (!digits()) throw err(i, "expected denominator after '/'");
      }
      if (i < line.size() && ident_char(line[i], true)) throw err(i, "malformed number");
      out.push_back({T::Number, std::string(line.substr(start, i - start)), start + 1});
    } else if (c == '-' && i + 1 < line.size() && line[i + 1] == '>') {
      i += 2;
      out.push_back({T::Arrow, "->", start + 1});
    } else {
      T t;
      switch (c) {
        case ':': t = T::Colon; break;
        case '+': t = T::Plus; break;
        case '-': t = T::Minus; break;
        case '*': t = T::Star; break;
        case '=': t = T::Equals; break;
        case ',': t = T::Comma; break;
        default: throw err(i, std::string("unexpected character '") + c + "'");
      }
      ++i;
      out.push_back({t, std::string(1, c), start + 1});
    }
  }
  out.push_back({T::End, "", line.size() + 1});
  return out;
}

/// Cursor over one tokenized line.
class LineReader {
public:
  using T = Token::Type;

  LineReader(std::vector<Token> tokens, std::size_t line_no) : toks_(std::move(tokens)), line_(line_no) {}

  const Token& peek() const { return toks_[pos_]; }
  bool at(T t) const { return peek().type == t; }
  bool at_end() const { return at(T::End); }
  Token next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
  SourceLocation loc() const { return {line_, peek().column}; }
  SourceLocation loc(const Token& t) const { return {line_, t.column}; }
  std::size_t line() const { return line_; }

  ParseError error(ParseError::Kind kind, const std::string& msg) const { return ParseError(loc(), kind, msg); }
  ParseError error_at(const Token& t, ParseError::Kind kind, const std::string& msg) const {
    return ParseError(loc(t), kind, msg);
  }

  Token expect(T t, const char* what) {
    if (!at(t)) {
      const Token& got = peek();
      throw error(ParseError::Kind::Syntax,
                  std::string("expected ") + what + (got.type == T::End ? " at end of line" : ", found '" + got.text + "'"));
    }
    return next();
  }
  Token ident(const char* what) { return expect(T::Ident, what); }
  /// Identifier that may continue with hyphens, written without spaces
  /// (ids such as "low-low" or "grid-07").
  Token name(const char* what) {
    Token t = ident(what);
    while (at(T::Minus) && peek().column == t.column + t.text.size() && pos_ + 1 < toks_.size()) {
      const Token& after = toks_[pos_ + 1];
      if ((after.type != T::Ident && after.type != T::Number) || after.column != peek().column + 1) break;
      next();
      t.text += "-" + next().text;
    }
    return t;
  }
  void expect_end() {
    if (!at_end()) throw error(ParseError::Kind::Syntax, "unexpected '" + peek().text + "'");
  }

  Rational number() {
    Token t = expect(T::Number, "number");
    auto r = Rational::parse(t.text);
    if (!r) throw error_at(t, ParseError::Kind::Range, "number out of range: " + t.text);
    return *r;
  }
  Rational signed_number() {
    bool neg = false;
    if (at(T::Minus)) {
      next();
      neg = true;
    }
    Rational r = number();
    return neg ? -r : r;
  }

  /// term := num | param | num '*' param ; expr := term (('+'|'-') term)*
  /// Stops before '->' or end of line; a '+' after a branch target is consumed
  /// by the caller, never here. Parameter tokens are reported through `refs`.
  LinExpr expr(std::vector<std::pair<ParamId, Token>>* refs) {
    LinExpr e;
    Rational sign = 1;
    for (;;) {
      if (at(T::Number)) {
        Rational k = number();
        if (at(T::Star)) {
          next();
          Token p = ident("parameter");
          if (refs) refs->emplace_back(p.text, p);
          e.add_term(p.text, sign * k);
        } else {
          e.add_constant(sign * k);
        }
      } else if (at(T::Ident)) {
        Token p = next();
        if (refs) refs->emplace_back(p.text, p);
        e.add_term(p.text, sign);
      } else {
        expect(T::Number, "number or parameter");
      }
      if (at(T::Plus)) {
        next();
        sign = 1;
      } else if (at(T::Minus)) {
        next();
        sign = -1;
      } else {
        return e;
      }
    }
  }

private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto tokens = tokenize(text.substr(start, end - start), line_no);
    if (tokens.size() > 1) fn(LineReader(std::move(tokens), line_no));
    if (end == text.size()) break;
    start = end + 1;
  }
}

inline std::size_t line_count(std::string_view text) {
  std::size_t n = 1;
  for (char c : text) n += c == '\n';
  return n;
}

inline LabelPredicate parse_predicate(LineReader& r) {
  LabelPredicate pred;
  if (r.at(Token::Type::Star)) {
    r.next();
    return pred;
  }
  for (;;) {
    Token k = r.ident("label key");
    r.expect(Token::Type::Equals, "'='");
    Token v = r.at(Token::Type::Number) ? r.next() : r.ident("label value");
    pred.tests.emplace_back(k.text, v.text);
    if (!r.at(Token::Type::Comma)) break;
    r.next();
  }
  return pred;
}

/// `allow <pred> : <action> ...` after the keyword has been consumed.
inline MaskRule parse_allow(LineReader& r) {
  MaskRule rule;
  rule.when = parse_predicate(r);
  r.expect(Token::Type::Colon, "':'");
  while (!r.at_end()) {
    Token a = r.ident("action");
    rule.allowed.insert(a.text);
  }
  if (rule.allowed.empty()) throw r.error(ParseError::Kind::Range, "allow rule with no actions");
  return rule;
}

/// `[ns :] p=v[, q=w ...]` into `out`. Lines with several assignments must
/// sum to one.
inline void parse_assignments(LineReader& r, Valuation& out) {
  using T = Token::Type;
  SourceLocation start = r.loc();
  std::string ns;
  Token first = r.ident("parameter");
  if (r.at(T::Colon)) {
    r.next();
    ns = first.text + ".";
    first = r.ident("parameter");
  }
  Rational sum;
  std::size_t count = 0;
  Token name = first;
  for (;;) {
    r.expect(T::Equals, "'='");
    Token vt = r.peek();
    Rational v = r.number();
    if (v > 1) throw r.error_at(vt, ParseError::Kind::Range, "value outside [0,1]: " + vt.text);
    std::string full = ns + name.text;
    if (!is_identifier(full)) throw r.error_at(name, ParseError::Kind::Syntax, "bad parameter name '" + full + "'");
    if (!out.emplace(full, v).second)
      throw r.error_at(name, ParseError::Kind::DuplicateDeclaration, "parameter '" + full + "' assigned twice");
    sum += v;
    ++count;
    if (r.at_end()) break;
    r.expect(T::Comma, "',' or end of line");
    name = r.ident("parameter");
  }
  if (count > 1 && sum != Rational(1))
    throw ParseError(start, ParseError::Kind::Range, "group sums to " + sum.to_decimal_string() + ", not 1");
}

}  // namespace detail

/// Parses the model text and reports the first syntax error or well-formedness
/// violation as a ParseError. State order follows declaration order. With
/// `check` false only syntax and symbol errors are raised; run
/// validate_model for the rest.
inline Pmdp parse_model(std::string_view text, bool check = true) {
  using detail::LineReader;
  using K = ParseError::Kind;
  using T = detail::Token::Type;

  Pmdp m;
  bool have_header = false;
  std::optional<StateIndex> initial;
  std::unordered_map<std::string, StateIndex> state_ix;
  std::set<ParamId> params;
  std::set<ParamId> grouped;
  std::set<ActionId> actions;
  std::vector<SourceLocation> state_loc;
  std::map<std::pair<StateIndex, std::size_t>, SourceLocation> choice_loc;
  std::map<std::tuple<StateIndex, std::size_t, std::size_t>, SourceLocation> branch_loc;

  detail::for_each_line(text, [&](LineReader r) {
    detail::Token kw = r.ident("statement keyword");
    if (!have_header && kw.text != "pmdp") throw r.error_at(kw, K::Syntax, "model must start with 'pmdp <name>'");
    if (kw.text == "pmdp") {
      if (have_header) throw r.error_at(kw, K::DuplicateDeclaration, "second 'pmdp' header");
      m.name = r.ident("model name").text;
      have_header = true;
    } else if (kw.text == "param") {
      if (r.at_end()) throw r.error(K::Syntax, "expected parameter name");
      while (!r.at_end()) {
        auto p = r.ident("parameter name");
        if (!params.insert(p.text).second) throw r.error_at(p, K::DuplicateDeclaration, "parameter '" + p.text + "' already declared");
        m.params.push_back(p.text);
      }
    } else if (kw.text == "group") {
      ParamGroup g;
      SourceLocation at = r.loc();
      while (!r.at_end()) {
        auto p = r.ident("parameter name");
        if (!params.count(p.text)) throw r.error_at(p, K::UnknownSymbol, "undeclared parameter '" + p.text + "'");
        if (!grouped.insert(p.text).second) throw r.error_at(p, K::DuplicateDeclaration, "parameter '" + p.text + "' already in a group");
        g.members.push_back(p.text);
      }
      if (g.members.size() < 2) throw ParseError(at, K::Syntax, "a group needs at least two members");
      m.groups.push_back(std::move(g));
    } else if (kw.text == "action") {
      if (r.at_end()) throw r.error(K::Syntax, "expected action name");
      while (!r.at_end()) {
        auto a = r.ident("action name");
        if (!actions.insert(a.text).second) throw r.error_at(a, K::DuplicateDeclaration, "action '" + a.text + "' already declared");
        m.actions.push_back(a.text);
      }
    } else if (kw.text == "state") {
      auto id = r.ident("state name");
      if (state_ix.count(id.text)) throw r.error_at(id, K::DuplicateDeclaration, "state '" + id.text + "' already declared");
      State st;
      st.name = id.text;
      bool seen_reward = false, seen_label = false;
      while (!r.at_end()) {
        auto opt = r.ident("'reward' or 'label'");
        if (opt.text == "reward" && !seen_reward) {
          st.reward = r.signed_number();
          seen_reward = true;
        } else if (opt.text == "label" && !seen_label) {
          auto pred = detail::parse_predicate(r);
          std::set<std::string> keys;
          for (auto& [k, v] : pred.tests)
            if (!keys.insert(k).second) throw r.error_at(opt, K::DuplicateDeclaration, "label key '" + k + "' repeated");
          st.labels = std::move(pred.tests);
          seen_label = true;
        } else {
          throw r.error_at(opt, K::Syntax, "unexpected '" + opt.text + "'");
        }
      }
      state_ix.emplace(st.name, m.states.size());
      state_loc.push_back(r.loc(id));
      m.states.push_back(std::move(st));
    } else if (kw.text == "init") {
      auto id = r.ident("state name");
      if (initial) throw r.error_at(kw, K::DuplicateDeclaration, "second 'init'");
      auto it = state_ix.find(id.text);
      if (it == state_ix.end()) throw r.error_at(id, K::UnknownSymbol, "unknown state '" + id.text + "'");
      initial = it->second;
      r.expect_end();
    } else if (kw.text == "trans") {
      auto sid = r.ident("source state");
      auto sit = state_ix.find(sid.text);
      if (sit == state_ix.end()) throw r.error_at(sid, K::UnknownSymbol, "unknown state '" + sid.text + "'");
      auto act = r.ident("action");
      if (!actions.count(act.text) && act.text != kStutterAction)
        throw r.error_at(act, K::UnknownSymbol, "unknown action '" + act.text + "'");
      State& st = m.states[sit->second];
      for (const auto& c : st.choices)
        if (c.action == act.text)
          throw r.error_at(act, K::DuplicateDeclaration, "duplicate distribution (" + sid.text + ", " + act.text + ")");
      r.expect(T::Colon, "':'");
      Choice ch;
      ch.action = act.text;
      std::set<StateIndex> targets;
      for (;;) {
        detail::Token expr_start = r.peek();
        std::vector<std::pair<ParamId, detail::Token>> refs;
        LinExpr e = r.expr(&refs);
        for (const auto& [p, tok] : refs)
          if (!params.count(p)) throw r.error_at(tok, K::UnknownSymbol, "undeclared parameter '" + p + "'");
        r.expect(T::Arrow, "'->'");
        auto tgt = r.ident("target state");
        auto tit = state_ix.find(tgt.text);
        if (tit == state_ix.end()) throw r.error_at(tgt, K::UnknownSymbol, "unknown state '" + tgt.text + "'");
        if (e.is_zero()) throw r.error_at(expr_start, K::Range, "zero-probability branch");
        if (!targets.insert(tit->second).second)
          throw r.error_at(tgt, K::DuplicateDeclaration, "target '" + tgt.text + "' repeated in one distribution");
        branch_loc[{sit->second, st.choices.size(), ch.branches.size()}] = r.loc(expr_start);
        ch.branches.push_back({std::move(e), tit->second});
        if (r.at_end()) break;
        r.expect(T::Plus, "'+' or end of line");
      }
      choice_loc[{sit->second, st.choices.size()}] = {r.line(), kw.column};
      st.choices.push_back(std::move(ch));
    } else {
      throw r.error_at(kw, K::Syntax, "unknown statement '" + kw.text + "'");
    }
  });

  SourceLocation eof{detail::line_count(text), 1};
  if (!have_header) throw ParseError(eof, K::Syntax, "missing 'pmdp <name>' header");
  if (!initial) throw ParseError(eof, K::Syntax, "missing 'init <state>'");
  m.initial = *initial;
  if (!check) return m;

  auto violations = validate_model(m);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    SourceLocation at = v.state < state_loc.size() ? state_loc[v.state] : eof;
    if (v.choice) {
      if (v.branch) {
        if (auto it = branch_loc.find({v.state, *v.choice, *v.branch}); it != branch_loc.end()) at = it->second;
      } else if (auto it = choice_loc.find({v.state, *v.choice}); it != choice_loc.end()) {
        at = it->second;
      }
    }
    K kind = v.kind == Violation::Kind::UnknownParameter || v.kind == Violation::Kind::UnknownAction ? K::UnknownSymbol
             : v.kind == Violation::Kind::DuplicateTarget || v.kind == Violation::Kind::DuplicateAction ? K::DuplicateDeclaration
                                                                                                        : K::Range;
    throw ParseError(at, kind, v.message);
  }
  return m;
}

/// Canonical text of a model; parse_model(serialize_model(m)) == m.
inline std::string serialize_model(const Pmdp& m) {
  std::ostringstream os;
  auto wrapped = [&](const char* kw, const std::vector<std::string>& ids) {
    for (std::size_t i = 0; i < ids.size(); i += 8) {
      os << kw;
      for (std::size_t j = i; j < std::min(ids.size(), i + 8); ++j) os << ' ' << ids[j];
      os << '\n';
    }
  };
  os << "pmdp " << m.name << '\n';
  wrapped("param", m.params);
  for (const auto& g : m.groups) {
    os << "group";
    for (const auto& p : g.members) os << ' ' << p;
    os << '\n';
  }
  wrapped("action", m.actions);
  for (const auto& s : m.states) {
    os << "state " << s.name;
    if (!s.reward.is_zero()) os << " reward " << (s.reward < 0 ? "-" + (-s.reward).to_string() : s.reward.to_string());
    if (!s.labels.empty()) os << " label " << LabelPredicate{s.labels}.to_string();
    os << '\n';
  }
  os << "init " << m.states.at(m.initial).name << '\n';
  for (const auto& s : m.states) {
    for (const auto& c : s.choices) {
      os << "trans " << s.name << ' ' << c.action << " :";
      bool first = true;
      for (const auto& b : c.branches) {
        os << (first ? " " : " + ") << b.prob.to_string() << " -> " << m.states.at(b.target).name;
        first = false;
      }
      os << '\n';
    }
  }
  return os.str();
}

/// Every policy in a file; each `policy <id>` header opens a new one.
inline std::vector<Policy> parse_policies(std::string_view text) {
  using K = ParseError::Kind;
  std::vector<Policy> out;
  std::set<std::string> ids;
  detail::for_each_line(text, [&](detail::LineReader r) {
    const auto& head = r.peek();
    if (head.type == detail::Token::Type::Ident && (head.text == "policy" || head.text == "allow")) {
      auto kw = r.next();
      if (kw.text == "policy") {
        auto id = r.name("policy id");
        r.expect_end();
        if (!ids.insert(id.text).second) throw r.error_at(id, K::DuplicateDeclaration, "policy '" + id.text + "' repeated");
        out.push_back(Policy{id.text, {}, {}});
        return;
      }
      if (out.empty()) throw r.error_at(kw, K::Syntax, "expected 'policy <id>' first");
      out.back().mask.rules.push_back(detail::parse_allow(r));
      return;
    }
    if (out.empty()) throw r.error(K::Syntax, "expected 'policy <id>' first");
    detail::parse_assignments(r, out.back().valuation);
  });
  return out;
}

inline Policy parse_policy(std::string_view text) {
  auto all = parse_policies(text);
  if (all.size() != 1)
    throw ParseError({detail::line_count(text), 1}, ParseError::Kind::Syntax,
                     "expected exactly one policy, found " + std::to_string(all.size()));
  return std::move(all.front());
}

inline Valuation parse_valuation(std::string_view text) {
  Valuation v;
  detail::for_each_line(text, [&](detail::LineReader r) { detail::parse_assignments(r, v); });
  return v;
}

/// Optional `mask <id>` header followed by `allow` lines.
inline AvailabilityMask parse_mask(std::string_view text) {
  using K = ParseError::Kind;
  AvailabilityMask mask;
  bool any = false;
  detail::for_each_line(text, [&](detail::LineReader r) {
    auto kw = r.ident("'mask' or 'allow'");
    if (kw.text == "mask") {
      if (any) throw r.error_at(kw, K::Syntax, "'mask' header must come first");
      mask.id = r.name("mask id").text;
      r.expect_end();
    } else if (kw.text == "allow") {
      mask.rules.push_back(detail::parse_allow(r));
    } else {
      throw r.error_at(kw, K::Syntax, "unknown statement '" + kw.text + "'");
    }
    any = true;
  });
  return mask;
}

inline std::string serialize_mask(const AvailabilityMask& mask) {
  std::ostringstream os;
  if (!mask.id.empty()) os << "mask " << mask.id << '\n';
  for (const auto& r : mask.rules) {
    os << "allow " << r.when.to_string() << " :";
    for (const auto& a : r.allowed) os << ' ' << a;
    os << '\n';
  }
  return os.str();
}

/// Writes one assignment line per model group touched by the policy (so the
/// file re-parses with its group checks), then loose parameters, then rules.
inline std::string serialize_policy(const Policy& pol, const Pmdp& m) {
  std::ostringstream os;
  os << "policy " << pol.id << '\n';
  std::set<ParamId> done;
  for (const auto& g : m.groups) {
    if (!pol.valuation.count(g.members.front())) continue;
    bool first = true;
    for (const auto& p : g.members) {
      auto it = pol.valuation.find(p);
      if (it == pol.valuation.end()) continue;
      os << (first ? "" : ", ") << p << '=' << it->second.to_decimal_string();
      done.insert(p);
      first = false;
    }
    os << '\n';
  }
  for (const auto& [p, v] : pol.valuation)
    if (!done.count(p)) os << p << '=' << v.to_decimal_string() << '\n';
  for (const auto& r : pol.mask.rules) {
    os << "allow " << r.when.to_string() << " :";
    for (const auto& a : r.allowed) os << ' ' << a;
    os << '\n';
  }
  return os.str();
}

}  // namespace partopt
