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

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace partopt {

/// Exact rational number over 64-bit integers, always stored in lowest terms
/// with a positive denominator. Intermediate products use 128-bit integers;
/// a result that does not fit back into 64 bits throws std::overflow_error.
class Rational {
public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT: implicit from integers
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator-() const {
    Rational r;
    r.num_ = checked(-static_cast<__int128>(num_));
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
    __int128 d = static_cast<__int128>(a.den_) * b.den_;
    return from_wide(n, d);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    __int128 n = static_cast<__int128>(a.num_) * b.den_;
    __int128 d = static_cast<__int128>(a.den_) * b.num_;
    return from_wide(n, d);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    __int128 l = static_cast<__int128>(a.num_) * b.den_;
    __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l <=> r;
  }

  /// "n" for integers, "n/d" otherwise. This is the canonical serialized form.
  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Finite decimal expansion when the denominator has only factors 2 and 5
  /// ("0.8", "0.05"); falls back to "n/d" otherwise.
  std::string to_decimal_string() const {
    if (den_ == 1) return std::to_string(num_);
    std::int64_t d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d != 1 || std::max(twos, fives) > 18) return to_string();
    int digits = std::max(twos, fives);
    __int128 scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    __int128 scaled = static_cast<__int128>(num_) * (scale / den_);
    bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    __int128 whole = scaled / scale;
    __int128 frac = scaled % scale;
    std::string frac_digits(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
      frac_digits[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    while (!frac_digits.empty() && frac_digits.back() == '0') frac_digits.pop_back();
    std::string out = negative ? "-" : "";
    out += std::to_string(static_cast<std::int64_t>(whole));
    if (!frac_digits.empty()) out += "." + frac_digits;
    return out;
  }

  /// Parses an unsigned literal: integer ("3"), decimal ("0.25") or
  /// fraction ("1/4"). Returns nullopt on malformed input or overflow.
  static std::optional<Rational> parse(std::string_view text) {
    auto digits_of = [](std::string_view s, std::int64_t& out) {
      if (s.empty() || s.size() > 18) return false;
      out = 0;
      for (char c : s) {
        if (c < '0' || c > '9') return false;
        out = out * 10 + (c - '0');
      }
      return true;
    };
    try {
      if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::int64_t n = 0, d = 0;
        if (!digits_of(text.substr(0, slash), n) || !digits_of(text.substr(slash + 1), d) || d == 0)
          return std::nullopt;
        return Rational(n, d);
      }
      if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::int64_t whole = 0, frac = 0;
        std::string_view w = text.substr(0, dot), f = text.substr(dot + 1);
        if (w.empty() && f.empty()) return std::nullopt;
        if (!w.empty() && !digits_of(w, whole)) return std::nullopt;
        if (!f.empty() && !digits_of(f, frac)) return std::nullopt;
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < f.size(); ++i) scale *= 10;
        return Rational(whole) + Rational(frac, scale);
      }
      std::int64_t n = 0;
      if (!digits_of(text, n)) return std::nullopt;
      return Rational(n);
    } catch (const std::overflow_error&) {
      return std::nullopt;
    }
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

private:
  static std::int64_t checked(__int128 v) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
      throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational from_wide(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 g = gcd128(n, d);
    if (g > 1) { n /= g; d /= g; }
    Rational r;
    r.num_ = checked(n);
    r.den_ = checked(d);
    return r;
  }

  void assign(std::int64_t n, std::int64_t d) { *this = from_wide(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace partopt
