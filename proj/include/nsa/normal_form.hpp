#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "nsa/polynomial.hpp"
#include "nsa/term.hpp"

namespace nsa {

/// Quotient num/den of polynomials. Kept reduced when univariate;
/// equality is decided by cross-multiplication in general.
class RatFunc {
public:
  RatFunc() : num_(), den_(Polynomial::constant(1)) {}
  explicit RatFunc(Polynomial p) : num_(std::move(p)), den_(Polynomial::constant(1)) {}

  RatFunc(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw UnsupportedTerm("rational function with zero denominator");
    canonicalize();
  }

  const Polynomial& num() const noexcept { return num_; }
  const Polynomial& den() const noexcept { return den_; }

  bool is_polynomial() const { return den_.is_constant(); }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }
  bool uses(Var v) const { return num_.uses(v) || den_.uses(v); }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ + b.num_, a.den_);
    return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) {
    if (a.den_ == b.den_) return RatFunc(a.num_ - b.num_, a.den_);
    return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.num_.is_zero()) throw UnsupportedTerm("division by an identically zero branch");
    return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
  }

  friend bool operator==(const RatFunc& a, const RatFunc& b) {
    return a.num_ * b.den_ == b.num_ * a.den_;
  }

  /// nullopt where the denominator vanishes.
  std::optional<Rational> evaluate(const Point& at) const {
    Rational d = den_.evaluate(at);
    if (d == 0) return std::nullopt;
    return num_.evaluate(at) / d;
  }

  /// num·den: same sign as the function wherever it is defined, and its
  /// roots include every pole.
  Polynomial sign_polynomial() const { return num_ * den_; }

  RatFunc substitute(Var v, const Polynomial& value) const {
    return RatFunc(num_.substitute(v, value), den_.substitute(v, value));
  }

  std::string str() const {
    if (den_.is_constant()) return num_.str();
    return "(" + num_.str() + ") / (" + den_.str() + ")";
  }

private:
  void canonicalize() {
    if (num_.is_zero()) {
      den_ = Polynomial::constant(1);
      return;
    }
    if (den_.is_constant()) {
      num_ = num_.scaled(1 / den_.constant_value());
      den_ = Polynomial::constant(1);
      return;
    }
    auto vn = num_.sole_variable();
    auto vd = den_.sole_variable();
    if (vd && (num_.is_constant() || (vn && *vn == *vd))) {
      Var v = *vd;
      auto a = num_.univariate(v), b = den_.univariate(v);
      auto g = univariate_gcd(a, b);
      if (g.size() > 1) {
        num_ = Polynomial::from_univariate(v, detail::poly_quot(a, g));
        den_ = Polynomial::from_univariate(v, detail::poly_quot(b, g));
      }
      if (den_.is_constant()) {
        num_ = num_.scaled(1 / den_.constant_value());
        den_ = Polynomial::constant(1);
        return;
      }
    }
    Rational lead = den_.leading_coefficient();
    if (lead != 1) {
      num_ = num_.scaled(1 / lead);
      den_ = den_.scaled(1 / lead);
    }
  }

  Polynomial num_, den_;
};

/// Canonical form of a term: for every tuple of residues of the variables
/// (modulo a per-variable period) a rational function. Periods are kept
/// minimal, so two terms are fragment-equal iff their normal forms agree
/// branch by branch.
class NormalForm {
public:
  using Periods = std::array<std::uint32_t, kVarCount>;
  using Residues = std::array<std::uint32_t, kVarCount>;

  static constexpr std::size_t kMaxBranches = 1u << 14;

  NormalForm() : periods_{1, 1, 1, 1}, branches_{RatFunc()}, sort_(Sort::nat) {}

  NormalForm(Periods periods, std::vector<RatFunc> branches, Sort sort)
      : periods_(periods), branches_(std::move(branches)), sort_(sort) {
    if (branches_.size() != branch_count(periods_)) throw UnsupportedTerm("normal form: branch count mismatch");
    minimize();
  }

  static NormalForm constant(const Rational& c) {
    return NormalForm({1, 1, 1, 1}, {RatFunc(Polynomial::constant(c))}, sort_of_constant(c));
  }

  static NormalForm variable(Var v, Sort s) {
    return NormalForm({1, 1, 1, 1}, {RatFunc(Polynomial::variable(v))}, s);
  }

  const Periods& periods() const noexcept { return periods_; }
  std::uint32_t period(Var v) const noexcept { return periods_[idx(v)]; }
  const std::vector<RatFunc>& branches() const noexcept { return branches_; }
  Sort sort() const noexcept { return sort_; }

  static std::size_t branch_count(const Periods& p) {
    std::size_t c = 1;
    for (auto q : p) c *= q;
    return c;
  }

  std::size_t index_of(const Residues& r) const {
    std::size_t i = 0;
    for (std::size_t v = 0; v < kVarCount; ++v) i = i * periods_[v] + (r[v] % periods_[v]);
    return i;
  }

  Residues residues_of(std::size_t i) const {
    Residues r{};
    for (std::size_t v = kVarCount; v-- > 0;) {
      r[v] = static_cast<std::uint32_t>(i % periods_[v]);
      i /= periods_[v];
    }
    return r;
  }

  /// Branch selected by residues taken modulo this form's own periods.
  const RatFunc& branch(const Residues& r) const { return branches_[index_of(r)]; }

  bool uses(Var v) const {
    if (periods_[idx(v)] > 1) return true;
    for (const auto& b : branches_)
      if (b.uses(v)) return true;
    return false;
  }

  bool is_constant() const { return branches_.size() == 1 && branches_[0].is_constant(); }

  /// Value at a point; nullopt at a pole.
  std::optional<Rational> evaluate(const Point& at) const {
    Residues r{};
    for (std::size_t v = 0; v < kVarCount; ++v) {
      if (periods_[v] == 1) continue;
      if (!at[v] || !is_integer(*at[v])) throw UnsupportedTerm("periodic variable needs an integer value");
      r[v] = static_cast<std::uint32_t>(mod_floor(numerator(*at[v]), Integer(periods_[v])));
    }
    return branch(r).evaluate(at);
  }

  /// Pointwise combination on the common refinement of the two grids.
  static NormalForm combine(const NormalForm& a, const NormalForm& b, Sort s,
                            const std::function<RatFunc(const RatFunc&, const RatFunc&)>& f) {
    Periods p{};
    for (std::size_t v = 0; v < kVarCount; ++v) p[v] = std::lcm(a.periods_[v], b.periods_[v]);
    check_size(p);
    NormalForm grid = shape(p, s);
    std::vector<RatFunc> out;
    out.reserve(branch_count(p));
    for (std::size_t i = 0; i < branch_count(p); ++i) {
      auto r = grid.residues_of(i);
      out.push_back(f(a.branch(r), b.branch(r)));
    }
    return NormalForm(p, std::move(out), s);
  }

  friend bool operator==(const NormalForm& a, const NormalForm& b) {
    Periods p{};
    for (std::size_t v = 0; v < kVarCount; ++v) p[v] = std::lcm(a.periods_[v], b.periods_[v]);
    NormalForm grid = shape(p, Sort::nat);
    for (std::size_t i = 0; i < branch_count(p); ++i) {
      auto r = grid.residues_of(i);
      if (!(a.branch(r) == b.branch(r))) return false;
    }
    return true;
  }

  /// Integer remainder modulo k; every branch must be an integer-valued
  /// polynomial.
  NormalForm mod(const Integer& k) const {
    if (sort_ == Sort::rational) throw SortError("mod operand must have sort Nat or Int");
    if (k > 1000000) throw UnsupportedTerm("modulus too large");
    auto kk = static_cast<std::uint32_t>(k);
    Periods p = periods_;
    for (std::size_t v = 0; v < kVarCount; ++v) {
      bool used = false;
      for (const auto& b : branches_) used = used || b.uses(Var(v));
      if (used) p[v] = std::lcm(p[v], kk);
    }
    check_size(p);
    NormalForm grid = shape(p, Sort::nat);
    std::vector<RatFunc> out;
    for (std::size_t i = 0; i < branch_count(p); ++i) {
      auto r = grid.residues_of(i);
      const RatFunc& b = branch(r);
      if (!b.is_polynomial() || !b.num().has_integer_coefficients())
        throw UnsupportedTerm("mod of a term that is not an integer polynomial on every branch");
      Point at{};
      for (std::size_t v = 0; v < kVarCount; ++v) at[v] = Rational(r[v]);
      Rational value = b.num().evaluate(at);
      out.emplace_back(Polynomial::constant(Rational(mod_floor(numerator(value), k))));
    }
    return NormalForm(p, std::move(out), Sort::nat);
  }

  /// Pieces selected by the residue of `selector` modulo pieces.size().
  static NormalForm piecewise(Var selector, const std::vector<NormalForm>& pieces, Sort s) {
    Periods p{1, 1, 1, 1};
    p[idx(selector)] = static_cast<std::uint32_t>(pieces.size());
    for (const auto& q : pieces)
      for (std::size_t v = 0; v < kVarCount; ++v) p[v] = std::lcm(p[v], q.periods_[v]);
    check_size(p);
    NormalForm grid = shape(p, s);
    std::vector<RatFunc> out;
    for (std::size_t i = 0; i < branch_count(p); ++i) {
      auto r = grid.residues_of(i);
      out.push_back(pieces[r[idx(selector)] % pieces.size()].branch(r));
    }
    return NormalForm(p, std::move(out), s);
  }

  /// Periods over the union of the two forms, as used by the deciders.
  static Periods common_periods(const Periods& a, const Periods& b) {
    Periods p{};
    for (std::size_t v = 0; v < kVarCount; ++v) p[v] = std::lcm(a[v], b[v]);
    check_size(p);
    return p;
  }

  std::string str() const {
    if (branches_.size() == 1) return branches_[0].str();
    std::string out = "piecewise[";
    for (std::size_t v = 0; v < kVarCount; ++v)
      if (periods_[v] > 1) out += std::string(" ") + var_name(Var(v)) + "%" + std::to_string(periods_[v]);
    out += " ]{";
    for (std::size_t i = 0; i < branches_.size(); ++i) out += (i ? "; " : " ") + branches_[i].str();
    return out + " }";
  }

private:
  static void check_size(const Periods& p) {
    std::size_t c = 1;
    for (auto q : p) {
      c *= q;
      if (c > kMaxBranches) throw UnsupportedTerm("combined period too large");
    }
  }

  static NormalForm shape(const Periods& p, Sort s) {
    NormalForm f;
    f.periods_ = p;
    f.sort_ = s;
    return f;
  }

  // Shrinks each variable's period to the least divisor under which the
  // branch table is still invariant.
  void minimize() {
    for (std::size_t v = 0; v < kVarCount; ++v) {
      std::uint32_t p = periods_[v];
      if (p == 1) continue;
      for (std::uint32_t d = 1; d < p; ++d) {
        if (p % d != 0) continue;
        bool invariant = true;
        for (std::size_t i = 0; i < branches_.size() && invariant; ++i) {
          auto r = residues_of(i);
          if (r[v] < d) continue;
          auto base = r;
          base[v] = r[v] % d;
          invariant = branches_[i] == branches_[index_of(base)];
        }
        if (!invariant) continue;
        Periods np = periods_;
        np[v] = d;
        NormalForm reduced = shape(np, sort_);
        std::vector<RatFunc> out;
        out.reserve(branch_count(np));
        for (std::size_t i = 0; i < branch_count(np); ++i) out.push_back(branch(reduced.residues_of(i)));
        periods_ = np;
        branches_ = std::move(out);
        break;
      }
    }
  }

  Periods periods_;
  std::vector<RatFunc> branches_;
  Sort sort_;
};

inline NormalForm normalize(const SeqTerm& t) {
  using Op = SeqTerm::Op;
  const auto& nd = t.node();
  switch (nd.op) {
    case Op::constant: return NormalForm::constant(nd.value);
    case Op::var: return NormalForm::variable(nd.var, nd.sort);
    case Op::add:
      return NormalForm::combine(normalize(nd.args[0]), normalize(nd.args[1]), nd.sort,
                                 [](const RatFunc& a, const RatFunc& b) { return a + b; });
    case Op::sub:
      return NormalForm::combine(normalize(nd.args[0]), normalize(nd.args[1]), nd.sort,
                                 [](const RatFunc& a, const RatFunc& b) { return a - b; });
    case Op::mul:
      return NormalForm::combine(normalize(nd.args[0]), normalize(nd.args[1]), nd.sort,
                                 [](const RatFunc& a, const RatFunc& b) { return a * b; });
    case Op::div:
      return NormalForm::combine(normalize(nd.args[0]), normalize(nd.args[1]), nd.sort,
                                 [](const RatFunc& a, const RatFunc& b) { return a / b; });
    case Op::mod: return normalize(nd.args[0]).mod(nd.modulus);
    case Op::piecewise: {
      std::vector<NormalForm> pieces;
      for (const auto& b : nd.args) pieces.push_back(normalize(b));
      return NormalForm::piecewise(nd.var, pieces, nd.sort);
    }
  }
  throw UnsupportedTerm("unknown term");
}

inline SeqTerm SeqTerm::div(SeqTerm a, SeqTerm b) {
  NormalForm den = normalize(b);
  for (const auto& br : den.branches())
    if (br.is_zero()) throw UnsupportedTerm("denominator " + b.str() + " vanishes identically on a residue class");
  return binary(Op::div, Sort::rational, std::move(a), std::move(b));
}

/// Two terms are fragment-equal iff their normal forms agree on every branch.
inline bool fragment_equal(const SeqTerm& a, const SeqTerm& b) { return normalize(a) == normalize(b); }

}  // namespace nsa
