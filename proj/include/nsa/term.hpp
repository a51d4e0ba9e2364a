#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nsa/polynomial.hpp"
#include "nsa/rational.hpp"

namespace nsa {

/// Value sorts ordered by inclusion: Nat ⊂ Int ⊂ Rat.
enum class Sort : std::uint8_t { nat = 0, integer = 1, rational = 2 };

inline Sort join(Sort a, Sort b) { return std::max(a, b); }

inline const char* sort_name(Sort s) {
  switch (s) {
    case Sort::nat: return "Nat";
    case Sort::integer: return "Int";
    case Sort::rational: return "Rat";
  }
  return "?";
}

inline Sort sort_of_constant(const Rational& c) {
  if (!is_integer(c)) return Sort::rational;
  return c >= 0 ? Sort::nat : Sort::integer;
}

/// Sorts assigned to the free variables x and y when a term is built.
/// The index variables n and m are always Nat.
struct FreeSorts {
  Sort x = Sort::rational;
  Sort y = Sort::rational;

  Sort of(Var v) const {
    switch (v) {
      case Var::x: return x;
      case Var::y: return y;
      default: return Sort::nat;
    }
  }
};

/// Immutable term over the index variables (and optionally x, y):
/// constants, variables, + - * /, `mod k` and index-periodic piecewise terms.
class SeqTerm {
public:
  enum class Op : std::uint8_t { constant, var, add, sub, mul, div, mod, piecewise };

  struct Node {
    Op op;
    Sort sort;
    Rational value;            // constant
    Var var = Var::n;          // var, and the selector of piecewise
    Integer modulus;           // mod
    std::vector<SeqTerm> args; // operands / branches
  };

  SeqTerm() : SeqTerm(constant(0)) {}

  static SeqTerm constant(const Rational& c) {
    return SeqTerm(Node{Op::constant, sort_of_constant(c), c, Var::n, 0, {}});
  }

  static SeqTerm variable(Var v, Sort s = Sort::nat) {
    if (v == Var::n || v == Var::m) s = Sort::nat;
    return SeqTerm(Node{Op::var, s, 0, v, 0, {}});
  }

  static SeqTerm index() { return variable(Var::n); }

  static SeqTerm add(SeqTerm a, SeqTerm b) {
    const Sort s = join(a.sort(), b.sort());
    return binary(Op::add, s, std::move(a), std::move(b));
  }
  static SeqTerm sub(SeqTerm a, SeqTerm b) {
    Sort s = join(join(a.sort(), b.sort()), Sort::integer);
    return binary(Op::sub, s, std::move(a), std::move(b));
  }
  static SeqTerm mul(SeqTerm a, SeqTerm b) {
    const Sort s = join(a.sort(), b.sort());
    return binary(Op::mul, s, std::move(a), std::move(b));
  }

  /// Division; the denominator must not vanish identically on any residue
  /// branch (checked via normalisation).
  static SeqTerm div(SeqTerm a, SeqTerm b);

  static SeqTerm mod(SeqTerm a, const Integer& k) {
    if (k <= 0) throw SortError("mod requires a positive integer modulus");
    if (a.sort() == Sort::rational) throw SortError("mod operand must have sort Nat or Int");
    SeqTerm t(Node{Op::mod, Sort::nat, 0, Var::n, k, {std::move(a)}});
    return t;
  }

  /// Branch i is selected when selector ≡ i (mod branches.size()).
  static SeqTerm piecewise(Var selector, std::vector<SeqTerm> branches) {
    if (branches.empty()) throw SortError("piecewise needs at least one branch");
    Sort s = Sort::nat;
    for (const auto& b : branches) s = join(s, b.sort());
    return SeqTerm(Node{Op::piecewise, s, 0, selector, 0, std::move(branches)});
  }

  Op op() const noexcept { return node_->op; }
  Sort sort() const noexcept { return node_->sort; }
  const Node& node() const noexcept { return *node_; }
  const std::vector<SeqTerm>& args() const noexcept { return node_->args; }

  bool uses(Var v) const {
    if (op() == Op::var) return node_->var == v;
    if (op() == Op::piecewise && node_->var == v && args().size() > 1) return true;
    return std::any_of(args().begin(), args().end(), [v](const SeqTerm& t) { return t.uses(v); });
  }

  /// Simultaneous substitution of variables by terms.
  SeqTerm substitute(const std::array<const SeqTerm*, kVarCount>& repl) const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::constant: return *this;
      case Op::var: return repl[idx(nd.var)] ? *repl[idx(nd.var)] : *this;
      case Op::add: return add(nd.args[0].substitute(repl), nd.args[1].substitute(repl));
      case Op::sub: return sub(nd.args[0].substitute(repl), nd.args[1].substitute(repl));
      case Op::mul: return mul(nd.args[0].substitute(repl), nd.args[1].substitute(repl));
      case Op::div: return div(nd.args[0].substitute(repl), nd.args[1].substitute(repl));
      case Op::mod: return mod(nd.args[0].substitute(repl), nd.modulus);
      case Op::piecewise: {
        std::vector<SeqTerm> bs;
        for (const auto& b : nd.args) bs.push_back(b.substitute(repl));
        if (repl[idx(nd.var)] && bs.size() > 1) {
          const SeqTerm& sel = *repl[idx(nd.var)];
          if (sel.op() == Op::var) return piecewise(sel.node().var, std::move(bs));
          SeqTerm reduced = mod(sel, Integer(bs.size()));
          return select_by_residue(reduced, std::move(bs));
        }
        return piecewise(nd.var, std::move(bs));
      }
    }
    return *this;
  }

  SeqTerm substitute(Var v, const SeqTerm& value) const {
    std::array<const SeqTerm*, kVarCount> repl{};
    repl[idx(v)] = &value;
    return substitute(repl);
  }

  /// Exact value at a point. Throws DivisionByZeroAt (carrying the value of
  /// n) when a denominator vanishes there.
  Rational evaluate(const Point& at) const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::constant: return nd.value;
      case Op::var:
        if (!at[idx(nd.var)]) throw UnsupportedTerm(std::string("unassigned variable ") + var_name(nd.var));
        return *at[idx(nd.var)];
      case Op::add: return nd.args[0].evaluate(at) + nd.args[1].evaluate(at);
      case Op::sub: return nd.args[0].evaluate(at) - nd.args[1].evaluate(at);
      case Op::mul: return nd.args[0].evaluate(at) * nd.args[1].evaluate(at);
      case Op::div: {
        Rational d = nd.args[1].evaluate(at);
        if (d == 0) throw DivisionByZeroAt(at[0] ? to_int64(floor_div(*at[0])) : -1);
        return nd.args[0].evaluate(at) / d;
      }
      case Op::mod: {
        Rational a = nd.args[0].evaluate(at);
        if (!is_integer(a)) throw UnsupportedTerm("mod of a non-integer value");
        return Rational{mod_floor(numerator(a), nd.modulus)};
      }
      case Op::piecewise: {
        if (nd.args.size() == 1) return nd.args[0].evaluate(at);
        if (!at[idx(nd.var)]) throw UnsupportedTerm(std::string("unassigned variable ") + var_name(nd.var));
        Rational s = *at[idx(nd.var)];
        if (!is_integer(s)) throw UnsupportedTerm("piecewise selector is not an integer");
        auto r = mod_floor(numerator(s), Integer(nd.args.size()));
        return nd.args[static_cast<std::size_t>(r)].evaluate(at);
      }
    }
    return 0;
  }

  Rational evaluate_at(long long n) const {
    Point p{};
    p[idx(Var::n)] = Rational(n);
    return evaluate(p);
  }

  /// Prints in the s-expression DSL; reparsing yields a fragment-equal term.
  std::string str() const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::constant: return to_string(nd.value);
      case Op::var: return var_name(nd.var);
      case Op::add: return "(+ " + nd.args[0].str() + " " + nd.args[1].str() + ")";
      case Op::sub: return "(- " + nd.args[0].str() + " " + nd.args[1].str() + ")";
      case Op::mul: return "(* " + nd.args[0].str() + " " + nd.args[1].str() + ")";
      case Op::div: return "(/ " + nd.args[0].str() + " " + nd.args[1].str() + ")";
      case Op::mod: return "(mod " + nd.args[0].str() + " " + nd.modulus.str() + ")";
      case Op::piecewise: {
        std::string s = std::string("(piecewise ") + var_name(nd.var);
        for (const auto& b : nd.args) s += " " + b.str();
        return s + ")";
      }
    }
    return "?";
  }

  /// Builds (branch[r] when s == r) for a selector s already reduced modulo
  /// p = branches.size(), as the sum of branch[r] times the Lagrange
  /// indicator of r on {0..p-1}.
  static SeqTerm select_by_residue(const SeqTerm& s, std::vector<SeqTerm> branches) {
    const long long p = static_cast<long long>(branches.size());
    SeqTerm sum = constant(0);
    for (long long r = 0; r < p; ++r) {
      SeqTerm ind = constant(1);
      for (long long j = 0; j < p; ++j) {
        if (j == r) continue;
        ind = mul(ind, div(sub(s, constant(j)), constant(r - j)));
      }
      sum = r == 0 ? mul(branches[0], ind) : add(sum, mul(branches[static_cast<std::size_t>(r)], ind));
    }
    return sum;
  }

private:
  explicit SeqTerm(Node nd) : node_(std::make_shared<const Node>(std::move(nd))) {}

  static SeqTerm binary(Op op, Sort s, SeqTerm a, SeqTerm b) {
    return SeqTerm(Node{op, s, 0, Var::n, 0, {std::move(a), std::move(b)}});
  }

  std::shared_ptr<const Node> node_;
};

inline SeqTerm operator+(SeqTerm a, SeqTerm b) { return SeqTerm::add(std::move(a), std::move(b)); }
inline SeqTerm operator-(SeqTerm a, SeqTerm b) { return SeqTerm::sub(std::move(a), std::move(b)); }
inline SeqTerm operator*(SeqTerm a, SeqTerm b) { return SeqTerm::mul(std::move(a), std::move(b)); }
inline SeqTerm operator/(SeqTerm a, SeqTerm b) { return SeqTerm::div(std::move(a), std::move(b)); }

enum class Rel : std::uint8_t { eq, ne, lt, le, gt, ge };

inline const char* rel_name(Rel r) {
  switch (r) {
    case Rel::eq: return "=";
    case Rel::ne: return "!=";
    case Rel::lt: return "<";
    case Rel::le: return "<=";
    case Rel::gt: return ">";
    case Rel::ge: return ">=";
  }
  return "?";
}

inline bool rel_holds(Rel r, int diff_sign) {
  switch (r) {
    case Rel::eq: return diff_sign == 0;
    case Rel::ne: return diff_sign != 0;
    case Rel::lt: return diff_sign < 0;
    case Rel::le: return diff_sign <= 0;
    case Rel::gt: return diff_sign > 0;
    case Rel::ge: return diff_sign >= 0;
  }
  return false;
}

inline Rel negate(Rel r) {
  switch (r) {
    case Rel::eq: return Rel::ne;
    case Rel::ne: return Rel::eq;
    case Rel::lt: return Rel::ge;
    case Rel::le: return Rel::gt;
    case Rel::gt: return Rel::le;
    case Rel::ge: return Rel::lt;
  }
  return r;
}

/// Comparisons of SeqTerms closed under not/and/or, plus the literals.
class BoolTerm {
public:
  enum class Op : std::uint8_t { literal, cmp, not_, and_, or_ };

  struct Node {
    Op op;
    bool value = false;
    Rel rel = Rel::eq;
    SeqTerm lhs, rhs;
    std::vector<BoolTerm> args;
  };

  static BoolTerm literal(bool v) { return BoolTerm(Node{Op::literal, v, Rel::eq, {}, {}, {}}); }

  static BoolTerm compare(SeqTerm a, Rel r, SeqTerm b) {
    return BoolTerm(Node{Op::cmp, false, r, std::move(a), std::move(b), {}});
  }

  static BoolTerm negation(BoolTerm b) { return BoolTerm(Node{Op::not_, false, Rel::eq, {}, {}, {std::move(b)}}); }

  static BoolTerm conjunction(std::vector<BoolTerm> bs) {
    if (bs.empty()) return literal(true);
    if (bs.size() == 1) return bs.front();
    return BoolTerm(Node{Op::and_, false, Rel::eq, {}, {}, std::move(bs)});
  }

  static BoolTerm disjunction(std::vector<BoolTerm> bs) {
    if (bs.empty()) return literal(false);
    if (bs.size() == 1) return bs.front();
    return BoolTerm(Node{Op::or_, false, Rel::eq, {}, {}, std::move(bs)});
  }

  Op op() const noexcept { return node_->op; }
  const Node& node() const noexcept { return *node_; }

  bool uses(Var v) const {
    const Node& nd = *node_;
    if (nd.op == Op::cmp) return nd.lhs.uses(v) || nd.rhs.uses(v);
    return std::any_of(nd.args.begin(), nd.args.end(), [v](const BoolTerm& b) { return b.uses(v); });
  }

  /// Calls f on every comparison node.
  template <class F>
  void for_each_comparison(F&& f) const {
    const Node& nd = *node_;
    if (nd.op == Op::cmp) {
      f(*this);
      return;
    }
    for (const auto& a : nd.args) a.for_each_comparison(f);
  }

  BoolTerm substitute(const std::array<const SeqTerm*, kVarCount>& repl) const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::literal: return *this;
      case Op::cmp: return compare(nd.lhs.substitute(repl), nd.rel, nd.rhs.substitute(repl));
      default: {
        std::vector<BoolTerm> as;
        for (const auto& a : nd.args) as.push_back(a.substitute(repl));
        return BoolTerm(Node{nd.op, false, Rel::eq, {}, {}, std::move(as)});
      }
    }
  }

  BoolTerm substitute(Var v, const SeqTerm& value) const {
    std::array<const SeqTerm*, kVarCount> repl{};
    repl[idx(v)] = &value;
    return substitute(repl);
  }

  /// Negation normal form: negations pushed into the comparisons.
  BoolTerm nnf(bool negated = false) const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::literal: return literal(nd.value != negated);
      case Op::cmp: return negated ? compare(nd.lhs, negate(nd.rel), nd.rhs) : *this;
      case Op::not_: return nd.args[0].nnf(!negated);
      case Op::and_:
      case Op::or_: {
        std::vector<BoolTerm> as;
        for (const auto& a : nd.args) as.push_back(a.nnf(negated));
        bool conj = (nd.op == Op::and_) != negated;
        return conj ? conjunction(std::move(as)) : disjunction(std::move(as));
      }
    }
    return *this;
  }

  /// Truth at a point; a comparison whose operands are undefined there
  /// (vanishing denominator) is false.
  bool evaluate(const Point& at) const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::literal: return nd.value;
      case Op::cmp: {
        try {
          Rational d = nd.lhs.evaluate(at) - nd.rhs.evaluate(at);
          return rel_holds(nd.rel, sign(d));
        } catch (const DivisionByZeroAt&) {
          return false;
        }
      }
      case Op::not_: return !nd.args[0].evaluate(at);
      case Op::and_:
        return std::all_of(nd.args.begin(), nd.args.end(), [&](const BoolTerm& b) { return b.evaluate(at); });
      case Op::or_:
        return std::any_of(nd.args.begin(), nd.args.end(), [&](const BoolTerm& b) { return b.evaluate(at); });
    }
    return false;
  }

  bool evaluate_at(long long n) const {
    Point p{};
    p[idx(Var::n)] = Rational(n);
    return evaluate(p);
  }

  std::string str() const {
    const Node& nd = *node_;
    switch (nd.op) {
      case Op::literal: return nd.value ? "true" : "false";
      case Op::cmp: return std::string("(") + rel_name(nd.rel) + " " + nd.lhs.str() + " " + nd.rhs.str() + ")";
      case Op::not_: return "(not " + nd.args[0].str() + ")";
      case Op::and_:
      case Op::or_: {
        std::string s = nd.op == Op::and_ ? "(and" : "(or";
        for (const auto& a : nd.args) s += " " + a.str();
        return s + ")";
      }
    }
    return "?";
  }

private:
  explicit BoolTerm(Node nd) : node_(std::make_shared<const Node>(std::move(nd))) {}
  std::shared_ptr<const Node> node_;
};

inline BoolTerm operator!(BoolTerm b) { return BoolTerm::negation(std::move(b)); }
inline BoolTerm operator&&(BoolTerm a, BoolTerm b) { return BoolTerm::conjunction({std::move(a), std::move(b)}); }
inline BoolTerm operator||(BoolTerm a, BoolTerm b) { return BoolTerm::disjunction({std::move(a), std::move(b)}); }

}  // namespace nsa

#include "nsa/normal_form.hpp"
