#pragma once

// First-order formulas over a many-sorted signature and their reader.
//
//   φ := true | false | (= t t) | (R t...) | (not φ) | (and φ...) | (or φ...)
//      | (implies φ φ) | (forall (x Sort) φ) | (exists (x Sort) φ)
//   t := x | (const a) | (f t...)

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsa/sexpr.hpp"

namespace nsa {

struct FTerm {
  enum class Kind : std::uint8_t { variable, constant, apply };
  Kind kind = Kind::variable;
  std::string name;
  std::vector<FTerm> args;

  static FTerm var(std::string v) { return {Kind::variable, std::move(v), {}}; }
  static FTerm constant(std::string a) { return {Kind::constant, std::move(a), {}}; }

  std::string str() const {
    switch (kind) {
      case Kind::variable: return name;
      case Kind::constant: return "(const " + name + ")";
      case Kind::apply: {
        std::string s = "(" + name;
        for (const auto& a : args) s += " " + a.str();
        return s + ")";
      }
    }
    return "?";
  }

  friend bool operator==(const FTerm&, const FTerm&) = default;
};

struct Formula {
  enum class Kind : std::uint8_t { truth, falsity, relation, equal, not_, and_, or_, implies, forall, exists };
  Kind kind = Kind::truth;
  std::string name;  // relation symbol or bound variable
  std::string sort;  // quantifier sort
  std::vector<FTerm> terms;
  std::vector<Formula> subs;

  static Formula truth() { return {Kind::truth, {}, {}, {}, {}}; }
  static Formula falsity() { return {Kind::falsity, {}, {}, {}, {}}; }
  static Formula rel(std::string r, std::vector<FTerm> ts) { return {Kind::relation, std::move(r), {}, std::move(ts), {}}; }
  static Formula eq(FTerm a, FTerm b) { return {Kind::equal, {}, {}, {std::move(a), std::move(b)}, {}}; }
  static Formula negation(Formula f) { return {Kind::not_, {}, {}, {}, {std::move(f)}}; }
  static Formula conj(std::vector<Formula> fs) { return {Kind::and_, {}, {}, {}, std::move(fs)}; }
  static Formula disj(std::vector<Formula> fs) { return {Kind::or_, {}, {}, {}, std::move(fs)}; }
  static Formula implies(Formula a, Formula b) { return {Kind::implies, {}, {}, {}, {std::move(a), std::move(b)}}; }
  static Formula forall(std::string v, std::string s, Formula f) {
    return {Kind::forall, std::move(v), std::move(s), {}, {std::move(f)}};
  }
  static Formula exists(std::string v, std::string s, Formula f) {
    return {Kind::exists, std::move(v), std::move(s), {}, {std::move(f)}};
  }

  int quantifier_depth() const {
    int d = 0;
    for (const auto& s : subs) d = std::max(d, s.quantifier_depth());
    return d + (kind == Kind::forall || kind == Kind::exists ? 1 : 0);
  }

  std::set<std::string> free_variables() const {
    std::set<std::string> out;
    collect_free(out, {});
    return out;
  }

  bool is_sentence() const { return free_variables().empty(); }

  std::string str() const {
    auto list = [&](const char* head) {
      std::string s = std::string("(") + head;
      for (const auto& f : subs) s += " " + f.str();
      return s + ")";
    };
    switch (kind) {
      case Kind::truth: return "true";
      case Kind::falsity: return "false";
      case Kind::relation: {
        std::string s = "(" + name;
        for (const auto& t : terms) s += " " + t.str();
        return s + ")";
      }
      case Kind::equal: return "(= " + terms[0].str() + " " + terms[1].str() + ")";
      case Kind::not_: return list("not");
      case Kind::and_: return list("and");
      case Kind::or_: return list("or");
      case Kind::implies: return list("implies");
      case Kind::forall: return "(forall (" + name + " " + sort + ") " + subs[0].str() + ")";
      case Kind::exists: return "(exists (" + name + " " + sort + ") " + subs[0].str() + ")";
    }
    return "?";
  }

  friend bool operator==(const Formula&, const Formula&) = default;

private:
  static void term_vars(const FTerm& t, std::set<std::string>& out, const std::set<std::string>& bound) {
    if (t.kind == FTerm::Kind::variable && !bound.count(t.name)) out.insert(t.name);
    for (const auto& a : t.args) term_vars(a, out, bound);
  }

  void collect_free(std::set<std::string>& out, std::set<std::string> bound) const {
    for (const auto& t : terms) term_vars(t, out, bound);
    if (kind == Kind::forall || kind == Kind::exists) bound.insert(name);
    for (const auto& s : subs) s.collect_free(out, bound);
  }
};

/// Sorts, relation and function symbols with their argument sorts.
struct Signature {
  std::set<std::string> sorts;
  std::map<std::string, std::vector<std::string>> relations;
  std::map<std::string, std::pair<std::vector<std::string>, std::string>> functions;
};

namespace detail {

inline bool reserved_formula_head(const std::string& h) {
  return h == "not" || h == "and" || h == "or" || h == "implies" || h == "forall" || h == "exists" || h == "=" ||
         h == "const";
}

class FormulaReader {
public:
  explicit FormulaReader(const Signature* sig) : sig_(sig) {}

  Formula formula(const Sexpr& e) {
    if (e.is_atom()) {
      if (e.atom == "true") return Formula::truth();
      if (e.atom == "false") return Formula::falsity();
      e.fail("expected a formula, got '" + e.atom + "'");
    }
    const std::string& h = e.head();
    if (h.empty()) e.fail("formula must start with a symbol");
    if (h == "not") {
      arity(e, 1);
      return Formula::negation(formula(e[1]));
    }
    if (h == "and" || h == "or") {
      std::vector<Formula> fs;
      for (std::size_t i = 1; i < e.size(); ++i) fs.push_back(formula(e[i]));
      return h == "and" ? Formula::conj(std::move(fs)) : Formula::disj(std::move(fs));
    }
    if (h == "implies") {
      arity(e, 2);
      Formula a = formula(e[1]);
      return Formula::implies(std::move(a), formula(e[2]));
    }
    if (h == "forall" || h == "exists") {
      arity(e, 2);
      const Sexpr& b = e[1];
      if (!b.is_list || b.size() != 2 || !b[0].is_atom() || !b[1].is_atom())
        b.fail("binder must look like (variable Sort)");
      const std::string &v = b[0].atom, &s = b[1].atom;
      if (sig_ && !sig_->sorts.count(s)) throw SortError("unknown sort '" + s + "'", v);
      auto saved = scope_.find(v) == scope_.end() ? std::nullopt : std::optional<std::string>(scope_[v]);
      scope_[v] = s;
      Formula body = formula(e[2]);
      if (saved)
        scope_[v] = *saved;
      else
        scope_.erase(v);
      return h == "forall" ? Formula::forall(v, s, std::move(body)) : Formula::exists(v, s, std::move(body));
    }
    if (h == "=") {
      arity(e, 2);
      FTerm a = term(e[1], std::nullopt);
      auto sa = sort_of(a);
      FTerm b = term(e[2], sa);
      if (!sa) {
        if (auto sb = sort_of(b)) a = term(e[1], sb);
      }
      return Formula::eq(std::move(a), std::move(b));
    }
    if (h == "const") e.fail("a constant is a term, not a formula");
    std::vector<FTerm> ts;
    const std::vector<std::string>* sorts = nullptr;
    if (sig_) {
      auto it = sig_->relations.find(h);
      if (it == sig_->relations.end()) throw SortError("unknown relation '" + h + "'", h);
      sorts = &it->second;
      if (sorts->size() != e.size() - 1) e.fail("'" + h + "' takes " + std::to_string(sorts->size()) + " arguments");
    }
    for (std::size_t i = 1; i < e.size(); ++i)
      ts.push_back(term(e[i], sorts ? std::optional<std::string>((*sorts)[i - 1]) : std::nullopt));
    return Formula::rel(h, std::move(ts));
  }

  const std::map<std::string, std::string>& free_sorts() const { return free_; }

private:
  static void arity(const Sexpr& e, std::size_t n) {
    if (e.size() != n + 1) e.fail("'" + e.head() + "' takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
  }

  std::optional<std::string> sort_of(const FTerm& t) const {
    if (t.kind == FTerm::Kind::variable) {
      if (auto it = scope_.find(t.name); it != scope_.end()) return it->second;
      if (auto it = free_.find(t.name); it != free_.end()) return it->second;
    }
    if (t.kind == FTerm::Kind::apply && sig_) {
      if (auto it = sig_->functions.find(t.name); it != sig_->functions.end()) return it->second.second;
    }
    return std::nullopt;
  }

  FTerm term(const Sexpr& e, const std::optional<std::string>& expected) {
    if (e.is_atom()) {
      if (e.atom.empty() || reserved_formula_head(e.atom)) e.fail("expected a term");
      FTerm t = FTerm::var(e.atom);
      if (sig_ && expected) {
        auto known = sort_of(t);
        if (known && *known != *expected)
          throw SortError("variable '" + e.atom + "' used at sorts " + *known + " and " + *expected, e.atom);
        if (!known) free_[e.atom] = *expected;
      }
      return t;
    }
    const std::string& h = e.head();
    if (h.empty()) e.fail("term must start with a symbol");
    if (h == "const") {
      if (e.size() != 2 || !e[1].is_atom()) e.fail("constant must look like (const name)");
      return FTerm::constant(e[1].atom);
    }
    if (reserved_formula_head(h) || h == "true" || h == "false") e.fail("expected a term");
    FTerm t{FTerm::Kind::apply, h, {}};
    const std::vector<std::string>* dom = nullptr;
    if (sig_) {
      auto it = sig_->functions.find(h);
      if (it == sig_->functions.end()) throw SortError("unknown function '" + h + "'", h);
      dom = &it->second.first;
      if (dom->size() != e.size() - 1) e.fail("'" + h + "' takes " + std::to_string(dom->size()) + " arguments");
      if (expected && it->second.second != *expected)
        throw SortError("function '" + h + "' has sort " + it->second.second + ", expected " + *expected, h);
    }
    for (std::size_t i = 1; i < e.size(); ++i)
      t.args.push_back(term(e[i], dom ? std::optional<std::string>((*dom)[i - 1]) : std::nullopt));
    return t;
  }

  const Signature* sig_;
  std::map<std::string, std::string> scope_;
  std::map<std::string, std::string> free_;
};

}  // namespace detail

/// Reads a formula. With a signature, sorts, arities and variable uses are
/// checked and SortError names the offending variable or symbol.
inline Formula parse_formula(const Sexpr& e, const Signature* sig = nullptr) {
  return detail::FormulaReader(sig).formula(e);
}

inline Formula parse_formula(std::string_view text, const Signature* sig = nullptr) {
  return parse_formula(read_sexpr(text), sig);
}

}  // namespace nsa
