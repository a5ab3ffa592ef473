#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedload {

/// Exact rate type. All analytical loads are carried as rationals so that
/// conservation and symmetry can be asserted with ==.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "3", "3/2" or a finite decimal such as "0.25".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw std::invalid_argument("not a rational literal: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  auto digits_only = [](std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t i = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) ++i;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
  };
  auto to_int = [](std::string_view s) {
    if (!s.empty() && s[0] == '+') s.remove_prefix(1);
    return BigInt(std::string(s));
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!digits_only(num, true) || !digits_only(den, false)) return fail();
    const BigInt d = to_int(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(to_int(num), d);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    const bool negative = !whole.empty() && whole[0] == '-';
    const bool whole_ok = whole.empty() || whole == "-" || whole == "+" || digits_only(whole, true);
    if (!whole_ok || !digits_only(frac, false)) return fail();
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    BigInt w = (whole.empty() || whole == "-" || whole == "+") ? BigInt(0) : to_int(whole);
    if (w < 0) w = -w;
    Rational r = Rational(w) + Rational(to_int(frac), scale);
    return negative ? Rational(-r) : r;
  }
  if (!digits_only(text, true)) return fail();
  return Rational(to_int(text));
}

/// "p/q" in lowest terms, or "p" when the denominator is 1.
inline std::string to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Fixed-point rendering with `digits` fractional digits, truncated toward
/// zero. Deterministic across platforms (no floating point involved).
inline std::string to_decimal(const Rational& r, int digits = 12) {
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool negative = r < 0;
  const Rational a = negative ? Rational(-r) : r;
  const BigInt scaled = numerator(a) * scale / denominator(a);
  std::string body = scaled.str();
  if (digits > 0) {
    if (body.size() <= static_cast<std::size_t>(digits)) {
      body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
    }
    body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  }
  return (negative && scaled != 0 ? "-" : "") + body;
}

}  // namespace fedload
