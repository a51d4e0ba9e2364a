#pragma once

// The term and predicate language:
//
//   term  := rational | n | m | x | y | omega | eps
//          | (+ term...) | (- term...) | (* term...) | (/ term term)
//          | (mod term k) | (piecewise var term...)
//          | (nu1 rational) | (nu2 term) | (starnu term)
//   pred  := true | false | (rel term term) | (not pred)
//          | (and pred...) | (or pred...)
//   rel   := = | != | < | <= | > | >=
//
// n and m are the inner and outer indices; `b` and `k` are accepted for x
// and y. omega is n and eps is 1/(n+1). Terms are printed back by
// SeqTerm::str and BoolTerm::str.

#include <string>
#include <string_view>
#include <variant>

#include "nsa/sexpr.hpp"
#include "nsa/term.hpp"

namespace nsa {

struct DslOptions {
  FreeSorts sorts{Sort::integer, Sort::integer};
};

namespace detail {

inline std::optional<Var> variable_symbol(std::string_view s) {
  if (s == "n") return Var::n;
  if (s == "m") return Var::m;
  if (s == "x" || s == "b") return Var::x;
  if (s == "y" || s == "k") return Var::y;
  return std::nullopt;
}

inline std::optional<Rel> relation_symbol(std::string_view s) {
  if (s == "=") return Rel::eq;
  if (s == "!=") return Rel::ne;
  if (s == "<") return Rel::lt;
  if (s == "<=") return Rel::le;
  if (s == ">") return Rel::gt;
  if (s == ">=") return Rel::ge;
  return std::nullopt;
}

}  // namespace detail

inline bool is_predicate_form(const Sexpr& e) {
  if (e.is_atom()) return e.atom == "true" || e.atom == "false";
  const std::string& h = e.head();
  return detail::relation_symbol(h) || h == "not" || h == "and" || h == "or";
}

inline SeqTerm parse_term(const Sexpr& e, const DslOptions& opt = {});

inline Rational parse_rational_atom(const Sexpr& e) {
  if (!e.is_atom()) e.fail("expected a rational literal");
  auto q = parse_rational(e.atom);
  if (!q) e.fail("expected a rational literal, got '" + e.atom + "'");
  return *q;
}

inline SeqTerm parse_term(const Sexpr& e, const DslOptions& opt) {
  if (e.is_atom()) {
    if (auto q = parse_rational(e.atom)) return SeqTerm::constant(*q);
    if (auto v = detail::variable_symbol(e.atom)) return SeqTerm::variable(*v, opt.sorts.of(*v));
    if (e.atom == "omega") return SeqTerm::index();
    if (e.atom == "eps") return SeqTerm::constant(1) / (SeqTerm::index() + SeqTerm::constant(1));
    e.fail("unknown symbol '" + e.atom + "'");
  }
  if (e.items.empty()) e.fail("empty term");
  const std::string& h = e.head();
  if (h.empty()) e.fail("term must start with an operator");
  const std::size_t argc = e.size() - 1;
  auto arg = [&](std::size_t i) { return parse_term(e[i], opt); };
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (argc < lo || argc > hi)
      e.fail("'" + h + "' takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + " or more") +
             " arguments");
  };

  if (h == "+" || h == "*") {
    need(1, SIZE_MAX);
    SeqTerm acc = arg(1);
    for (std::size_t i = 2; i <= argc; ++i) acc = h == "+" ? acc + arg(i) : acc * arg(i);
    return acc;
  }
  if (h == "-") {
    need(1, SIZE_MAX);
    if (argc == 1) return SeqTerm::constant(0) - arg(1);
    SeqTerm acc = arg(1);
    for (std::size_t i = 2; i <= argc; ++i) acc = acc - arg(i);
    return acc;
  }
  if (h == "/") {
    need(2, 2);
    return arg(1) / arg(2);
  }
  if (h == "mod") {
    need(2, 2);
    Rational k = parse_rational_atom(e[2]);
    if (!is_integer(k) || k <= 0) e[2].fail("modulus must be a positive integer");
    return SeqTerm::mod(arg(1), numerator(k));
  }
  if (h == "piecewise") {
    need(2, SIZE_MAX);
    if (!e[1].is_atom()) e[1].fail("piecewise selector must be a variable");
    auto v = detail::variable_symbol(e[1].atom);
    if (!v) e[1].fail("piecewise selector must be a variable");
    std::vector<SeqTerm> bs;
    for (std::size_t i = 2; i <= argc; ++i) bs.push_back(arg(i));
    return SeqTerm::piecewise(*v, std::move(bs));
  }
  if (h == "nu1") {
    need(1, 1);
    return SeqTerm::constant(parse_rational_atom(e[1]));
  }
  if (h == "nu2") {
    need(1, 1);
    SeqTerm t = arg(1);
    if (t.uses(Var::m)) e[1].fail("nu2 expects a level-1 term");
    return t;
  }
  if (h == "starnu") {
    need(1, 1);
    SeqTerm t = arg(1);
    if (t.uses(Var::m)) e[1].fail("starnu expects a level-1 term");
    return t.substitute(Var::n, SeqTerm::variable(Var::m));
  }
  e[0].fail("unknown operator '" + h + "'");
}

inline BoolTerm parse_predicate(const Sexpr& e, const DslOptions& opt = {}) {
  if (e.is_atom()) {
    if (e.atom == "true") return BoolTerm::literal(true);
    if (e.atom == "false") return BoolTerm::literal(false);
    e.fail("expected a predicate, got '" + e.atom + "'");
  }
  const std::string& h = e.head();
  if (auto r = detail::relation_symbol(h)) {
    if (e.size() != 3) e.fail("'" + h + "' takes 2 arguments");
    return BoolTerm::compare(parse_term(e[1], opt), *r, parse_term(e[2], opt));
  }
  if (h == "not") {
    if (e.size() != 2) e.fail("'not' takes 1 argument");
    return !parse_predicate(e[1], opt);
  }
  if (h == "and" || h == "or") {
    std::vector<BoolTerm> parts;
    for (std::size_t i = 1; i < e.size(); ++i) parts.push_back(parse_predicate(e[i], opt));
    return h == "and" ? BoolTerm::conjunction(std::move(parts)) : BoolTerm::disjunction(std::move(parts));
  }
  e.fail("expected a predicate");
}

using DslValue = std::variant<SeqTerm, BoolTerm>;

inline DslValue parse_dsl(const Sexpr& e, const DslOptions& opt = {}) {
  if (is_predicate_form(e)) return parse_predicate(e, opt);
  return parse_term(e, opt);
}

inline SeqTerm parse_term(std::string_view text, const DslOptions& opt = {}) { return parse_term(read_sexpr(text), opt); }
inline BoolTerm parse_predicate(std::string_view text, const DslOptions& opt = {}) {
  return parse_predicate(read_sexpr(text), opt);
}
inline DslValue parse_dsl(std::string_view text, const DslOptions& opt = {}) { return parse_dsl(read_sexpr(text), opt); }

}  // namespace nsa
