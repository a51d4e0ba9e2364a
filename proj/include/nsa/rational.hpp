#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

#include "nsa/error.hpp"

namespace nsa {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline bool is_integer(const Rational& q) { return denominator(q) == 1; }

inline Integer floor_div(const Rational& q) {
  Integer n = numerator(q), d = denominator(q);
  Integer r = n / d;
  if (n % d != 0 && n < 0) --r;
  return r;
}

inline Integer ceil_div(const Rational& q) { return -floor_div(-q); }

/// Mathematical (non-negative) remainder of an integer value.
inline Integer mod_floor(const Integer& a, const Integer& k) {
  Integer r = a % k;
  if (r < 0) r += k;
  return r;
}

inline int sign(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

/// `p` or `p/q` in lowest terms.
inline std::string to_string(const Rational& q) {
  if (is_integer(q)) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

/// Parses `[-]digits` or `[-]digits/digits`; returns nullopt on anything else.
inline std::optional<Rational> parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  auto digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : body.substr(slash + 1);
  if (!digits(num) || !digits(den)) return std::nullopt;
  Integer d{std::string(den)};
  if (d == 0) return std::nullopt;
  Rational q{Integer{std::string(num)}, d};
  return negative ? Rational{-q} : q;
}

inline std::int64_t to_int64(const Integer& z) {
  if (z > std::numeric_limits<std::int64_t>::max() || z < std::numeric_limits<std::int64_t>::min())
    throw UnsupportedTerm("integer out of machine range: " + z.str());
  return static_cast<std::int64_t>(z);
}

inline Integer lcm_integer(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  return boost::multiprecision::lcm(a, b);
}

}  // namespace nsa
