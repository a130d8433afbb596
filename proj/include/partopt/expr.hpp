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

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "partopt/error.hpp"
#include "partopt/rational.hpp"

namespace partopt {

using ParamId = std::string;

/// Numeric assignment of parameters. Values are expected in [0,1]; group
/// constraints are checked against a model (see check_valuation in model.hpp).
using Valuation = std::map<ParamId, Rational>;

/// `[A-Za-z_][A-Za-z0-9_.]*`
inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!head(s.front())) return false;
  for (char c : s.substr(1))
    if (!head(c) && !(c >= '0' && c <= '9') && c != '.') return false;
  return true;
}

/// Linear expression `constant + sum(coeff * param)` with exact coefficients.
/// Zero coefficients are never stored.
class LinExpr {
public:
  LinExpr() = default;
  LinExpr(Rational constant) : constant_(constant) {}  // NOLINT: constants are expressions
  static LinExpr param(const ParamId& p, Rational coeff = 1) {
    LinExpr e;
    e.add_term(p, coeff);
    return e;
  }

  const Rational& constant() const { return constant_; }
  const std::map<ParamId, Rational>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }
  bool is_zero() const { return terms_.empty() && constant_.is_zero(); }

  Rational coeff(const ParamId& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  std::set<ParamId> params() const {
    std::set<ParamId> out;
    for (const auto& [p, c] : terms_) out.insert(p);
    return out;
  }

  void add_constant(Rational c) { constant_ += c; }
  void add_term(const ParamId& p, Rational c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(p, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  LinExpr& operator+=(const LinExpr& o) {
    constant_ += o.constant_;
    for (const auto& [p, c] : o.terms_) add_term(p, c);
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) {
    constant_ -= o.constant_;
    for (const auto& [p, c] : o.terms_) add_term(p, -c);
    return *this;
  }
  LinExpr& operator*=(const Rational& k) {
    if (k.is_zero()) {
      *this = LinExpr();
      return *this;
    }
    constant_ *= k;
    for (auto& [p, c] : terms_) c *= k;
    return *this;
  }
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, const Rational& k) { return a *= k; }
  friend bool operator==(const LinExpr&, const LinExpr&) = default;

  /// Canonical text: constant first (omitted when zero and terms exist), then
  /// terms in parameter order, unit coefficients elided: "1 - p2 - p3",
  /// "1/2*p7 + p8". Parses back to an equal expression.
  std::string to_string() const {
    std::string out;
    bool first = true;
    if (!constant_.is_zero() || terms_.empty()) {
      out = constant_ < 0 ? "0 - " + (-constant_).to_string() : constant_.to_string();
      first = false;
    }
    for (const auto& [p, c] : terms_) {
      Rational mag = c < 0 ? -c : c;
      std::string term = mag == Rational(1) ? p : mag.to_string() + "*" + p;
      if (first) {
        out = c < 0 ? "0 - " + term : term;
        first = false;
      } else {
        out += (c < 0 ? " - " : " + ") + term;
      }
    }
    return out;
  }

private:
  Rational constant_;
  std::map<ParamId, Rational> terms_;
};

/// constant + sum(coeff * value). Throws UnboundParameter for a missing term.
inline Rational eval_expr(const LinExpr& e, const Valuation& v) {
  Rational acc = e.constant();
  for (const auto& [p, c] : e.terms()) {
    auto it = v.find(p);
    if (it == v.end()) throw UnboundParameter(p);
    acc += c * it->second;
  }
  return acc;
}

/// Folds every parameter assigned in `partial` into the constant; the rest
/// stay symbolic.
inline LinExpr substitute(const LinExpr& e, const Valuation& partial) {
  LinExpr out(e.constant());
  for (const auto& [p, c] : e.terms()) {
    if (auto it = partial.find(p); it != partial.end())
      out.add_constant(c * it->second);
    else
      out.add_term(p, c);
  }
  return out;
}

}  // namespace partopt
