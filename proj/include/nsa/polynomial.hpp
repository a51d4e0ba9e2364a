#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsa/rational.hpp"

namespace nsa {

/// Variables of the term fragment. `n` is the inner index, `m` the outer
/// index of level-2 terms; `x` and `y` are free standard variables used by
/// predicates, relations and condition families.
enum class Var : std::uint8_t { n = 0, m = 1, x = 2, y = 3 };
inline constexpr std::size_t kVarCount = 4;

inline constexpr std::size_t idx(Var v) { return static_cast<std::size_t>(v); }

inline const char* var_name(Var v) {
  switch (v) {
    case Var::n: return "n";
    case Var::m: return "m";
    case Var::x: return "x";
    case Var::y: return "y";
  }
  return "?";
}

/// Partial assignment of values to variables.
using Point = std::array<std::optional<Rational>, kVarCount>;

/// Sparse multivariate polynomial with exact rational coefficients.
class Polynomial {
public:
  using Monomial = std::array<std::uint8_t, kVarCount>;

  Polynomial() = default;

  static Polynomial constant(const Rational& c) {
    Polynomial p;
    if (c != 0) p.terms_[Monomial{}] = c;
    return p;
  }

  static Polynomial variable(Var v) {
    Polynomial p;
    Monomial mono{};
    mono[idx(v)] = 1;
    p.terms_[mono] = 1;
    return p;
  }

  const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }

  bool is_zero() const noexcept { return terms_.empty(); }

  bool is_constant() const noexcept {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Monomial{});
  }

  Rational constant_value() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational{0} : it->second;
  }

  bool uses(Var v) const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [v](const auto& t) { return t.first[idx(v)] > 0; });
  }

  int degree(Var v) const {
    int d = terms_.empty() ? -1 : 0;
    for (const auto& [mono, c] : terms_) d = std::max<int>(d, mono[idx(v)]);
    return d;
  }

  int total_degree() const {
    int d = terms_.empty() ? -1 : 0;
    for (const auto& [mono, c] : terms_) {
      int s = 0;
      for (auto e : mono) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  /// Coefficients as polynomials in the remaining variables: result[k] is
  /// the coefficient of v^k.
  std::vector<Polynomial> coefficients(Var v) const {
    std::vector<Polynomial> out(static_cast<std::size_t>(std::max(degree(v), 0)) + 1);
    for (const auto& [mono, c] : terms_) {
      Monomial rest = mono;
      auto k = rest[idx(v)];
      rest[idx(v)] = 0;
      out[k].terms_[rest] += c;
    }
    for (auto& p : out) p.prune();
    return out;
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [mono, c] : r.terms_) c = -c;
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [mono, c] : o.terms_) terms_[mono] += c;
    prune();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [mono, c] : o.terms_) terms_[mono] -= c;
    prune();
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Monomial mono;
        for (std::size_t i = 0; i < kVarCount; ++i) {
          unsigned e = unsigned(ma[i]) + unsigned(mb[i]);
          if (e > 255) throw UnsupportedTerm("polynomial degree overflow");
          mono[i] = static_cast<std::uint8_t>(e);
        }
        r.terms_[mono] += ca * cb;
      }
    r.prune();
    return r;
  }

  Polynomial scaled(const Rational& s) const {
    if (s == 0) return {};
    Polynomial r = *this;
    for (auto& [mono, c] : r.terms_) c *= s;
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  /// Replaces every occurrence of v by `value`.
  Polynomial substitute(Var v, const Polynomial& value) const {
    auto cs = coefficients(v);
    Polynomial r;
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) r = r * value + *it;
    return r;
  }

  Polynomial partial(Var v, const Rational& value) const {
    return substitute(v, constant(value));
  }

  /// Full evaluation; every used variable must be assigned.
  Rational evaluate(const Point& at) const {
    Rational sum = 0;
    for (const auto& [mono, c] : terms_) {
      Rational t = c;
      for (std::size_t i = 0; i < kVarCount; ++i) {
        if (mono[i] == 0) continue;
        if (!at[i]) throw UnsupportedTerm(std::string("unassigned variable ") + var_name(Var(i)));
        Rational base = *at[i];
        for (unsigned e = 0; e < mono[i]; ++e) t *= base;
      }
      sum += t;
    }
    return sum;
  }

  bool has_integer_coefficients() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const auto& t) { return is_integer(t.second); });
  }

  /// Coefficient of the highest monomial in map order; used to normalise
  /// signs of denominators.
  Rational leading_coefficient() const {
    return terms_.empty() ? Rational{0} : terms_.rbegin()->second;
  }

  /// Univariate coefficient list in v (constant coefficients required).
  std::vector<Rational> univariate(Var v) const {
    auto cs = coefficients(v);
    std::vector<Rational> out;
    out.reserve(cs.size());
    for (const auto& c : cs) {
      if (!c.is_constant()) throw UnsupportedTerm("polynomial is not univariate");
      out.push_back(c.constant_value());
    }
    return out;
  }

  static Polynomial from_univariate(Var v, std::span<const Rational> cs) {
    Polynomial r;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      if (cs[k] == 0) continue;
      Monomial mono{};
      mono[idx(v)] = static_cast<std::uint8_t>(k);
      r.terms_[mono] = cs[k];
    }
    return r;
  }

  /// The single variable this polynomial uses, if it uses at most one.
  std::optional<Var> sole_variable() const {
    std::optional<Var> found;
    for (std::size_t i = 0; i < kVarCount; ++i)
      if (uses(Var(i))) {
        if (found) return std::nullopt;
        found = Var(i);
      }
    return found;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!out.empty()) out += " + ";
      out += "(" + to_string(it->second) + ")";
      for (std::size_t i = 0; i < kVarCount; ++i)
        if (it->first[i] > 0) {
          out += std::string("*") + var_name(Var(i));
          if (it->first[i] > 1) out += "^" + std::to_string(it->first[i]);
        }
    }
    return out;
  }

private:
  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = it->second == 0 ? terms_.erase(it) : std::next(it);
  }

  std::map<Monomial, Rational> terms_;
};

/// Eventual sign of p when the variables in `order` tend to infinity with
/// each variable dominating every later one (order[0] grows fastest).
/// Restricting any variable to a residue class does not change the result.
inline int lex_sign(const Polynomial& p, std::span<const Var> order) {
  if (p.is_zero()) return 0;
  if (order.empty()) {
    if (!p.is_constant()) throw UnsupportedTerm("free variable left in eventual-sign analysis");
    return sign(p.constant_value());
  }
  auto cs = p.coefficients(order.front());
  return lex_sign(cs.back(), order.subspan(1));
}

/// Cauchy root bound: every real root r satisfies |r| < bound.
inline Integer cauchy_bound(std::span<const Rational> cs) {
  std::size_t d = cs.size();
  while (d > 0 && cs[d - 1] == 0) --d;
  if (d <= 1) return 0;
  Rational lead = abs(cs[d - 1]);
  Rational worst = 0;
  for (std::size_t i = 0; i + 1 < d; ++i) worst = std::max(worst, Rational{abs(cs[i]) / lead});
  return floor_div(worst) + 2;
}

namespace detail {

inline std::vector<Rational> trim(std::vector<Rational> a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
  return a;
}

/// Remainder of univariate division a mod b (b nonzero, trimmed).
inline std::vector<Rational> poly_rem(std::vector<Rational> a, const std::vector<Rational>& b) {
  a = trim(std::move(a));
  while (a.size() >= b.size() && !a.empty()) {
    Rational f = a.back() / b.back();
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a = trim(std::move(a));
  }
  return a;
}

inline std::vector<Rational> poly_quot(std::vector<Rational> a, const std::vector<Rational>& b) {
  a = trim(std::move(a));
  if (a.size() < b.size()) return {};
  std::vector<Rational> q(a.size() - b.size() + 1);
  while (a.size() >= b.size() && !a.empty()) {
    Rational f = a.back() / b.back();
    std::size_t shift = a.size() - b.size();
    q[shift] = f;
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a = trim(std::move(a));
  }
  return q;
}

}  // namespace detail

/// Monic gcd of two univariate coefficient lists.
inline std::vector<Rational> univariate_gcd(std::vector<Rational> a, std::vector<Rational> b) {
  a = detail::trim(std::move(a));
  b = detail::trim(std::move(b));
  while (!b.empty()) {
    auto r = detail::poly_rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    Rational lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

}  // namespace nsa
