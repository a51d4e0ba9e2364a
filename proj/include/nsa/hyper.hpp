#pragma once

// Level-1 and level-2 ultrapower elements represented by definable
// sequences. A level-1 element is a term in the index n; a level-2 element
// is a term in the outer index m and the inner index n. Comparisons at
// level 2 are decided inner index first.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsa/seq_core.hpp"

namespace nsa {

namespace detail {

inline void require_only(const SeqTerm& t, std::initializer_list<Var> allowed, const char* what) {
  for (std::size_t v = 0; v < kVarCount; ++v)
    if (t.uses(Var(v)) && std::find(allowed.begin(), allowed.end(), Var(v)) == allowed.end())
      throw UnsupportedTerm(std::string(what) + " may not mention " + var_name(Var(v)));
}

// Whether a term fits a base sort; Int-sorted terms are accepted over Nat
// when they are eventually nonnegative on every residue class.
inline bool fits_base(const SeqTerm& t, Sort base) {
  if (join(t.sort(), base) == base) return true;
  if (base != Sort::nat || t.sort() != Sort::integer) return false;
  auto signs = eventual_signs(normalize(t));
  return std::all_of(signs.begin(), signs.end(), [](int s) { return s >= 0; });
}

}  // namespace detail

/// Element of the level-1 ultrapower: the class of a sequence n ↦ rep(n).
class Hyper1 {
public:
  explicit Hyper1(SeqTerm rep) : Hyper1(rep, rep.sort()) {}

  Hyper1(SeqTerm rep, Sort base) : rep_(std::move(rep)), base_(base) {
    detail::require_only(rep_, {Var::n}, "a level-1 representative");
    if (!detail::fits_base(rep_, base_))
      throw SortError(std::string("representative of sort ") + sort_name(rep_.sort()) + " over base " +
                      sort_name(base_));
  }

  const SeqTerm& rep() const noexcept { return rep_; }
  Sort base() const noexcept { return base_; }
  std::string str() const { return rep_.str(); }

  /// Equality in every ultrapower by a free ultrafilter.
  friend bool operator==(const Hyper1& a, const Hyper1& b) {
    return compare_mod_frechet(a.rep_, b.rep_, Rel::eq).is_true();
  }

private:
  SeqTerm rep_;
  Sort base_;
};

/// Element of the level-2 ultrapower: t(m, n) with outer index m.
class Hyper2 {
public:
  explicit Hyper2(SeqTerm rep) : Hyper2(rep, rep.sort()) {}

  Hyper2(SeqTerm rep, Sort base) : rep_(std::move(rep)), base_(base) {
    detail::require_only(rep_, {Var::n, Var::m}, "a level-2 representative");
    if (join(rep_.sort(), base_) != base_ && !(base_ == Sort::nat && rep_.sort() == Sort::integer))
      throw SortError(std::string("representative of sort ") + sort_name(rep_.sort()) + " over base " +
                      sort_name(base_));
  }

  const SeqTerm& rep() const noexcept { return rep_; }
  Sort base() const noexcept { return base_; }
  std::string str() const { return rep_.str(); }

private:
  SeqTerm rep_;
  Sort base_;
};

inline Hyper1 omega() { return Hyper1(SeqTerm::index()); }
inline Hyper1 epsilon() { return Hyper1(SeqTerm::constant(1) / (SeqTerm::index() + SeqTerm::constant(1))); }

/// *f applied to x: the class of f∘rep. f is a term in the variable x.
inline Hyper1 star_map1(const SeqTerm& f, const Hyper1& x) {
  detail::require_only(f, {Var::x}, "a standard function");
  SeqTerm composed = f.substitute(Var::x, x.rep());
  return Hyper1(composed, join(composed.sort(), x.base()));
}

inline Hyper1 nu1(const Rational& a) { return Hyper1(SeqTerm::constant(a)); }

/// ν: the constant outer family, t(m, n) = rep(n).
inline Hyper2 nu2(const Hyper1& x) { return Hyper2(x.rep(), x.base()); }

/// *ν: ν applied pointwise along the outer index, t(m, n) = rep(m).
inline Hyper2 star_nu(const Hyper1& x) { return Hyper2(x.rep().substitute(Var::n, SeqTerm::variable(Var::m)), x.base()); }

struct Level2Options {
  /// Largest outer bound below which the slices are decided one by one.
  long long max_outer_scan = 4000;
};

namespace detail {

// The slice of b at a fixed outer index. Comparisons whose terms have a
// denominator vanishing identically on the slice are false there.
inline BoolTerm outer_slice(const BoolTerm& b, long long m) {
  const SeqTerm value = SeqTerm::constant(m);
  return map_comparisons(b, [&](const BoolTerm& c) {
    try {
      return c.substitute(Var::m, value);
    } catch (const UnsupportedTerm&) {
      return BoolTerm::literal(false);
    }
  });
}

}  // namespace detail

/// Verdict of a boolean term in m and n in the iterated ultrapower: for each
/// outer index the inner question is decided, then the set of outer indices
/// with a True inner answer is classified. The result is True when the
/// inner answer is True for all but finitely many m and False when it is
/// False for all but finitely many m. The evidence classifies the set of m
/// with a True inner answer.
inline Verdict decide2(const BoolTerm& b, const Level2Options& opt = {}) {
  AtomTable atoms(b);
  const Var order[] = {Var::n, Var::m};
  EventualPattern pat = eventual_pattern(b, atoms, order);
  const std::uint32_t pm = pat.periods[idx(Var::m)], pn = pat.periods[idx(Var::n)];

  // Generic inner verdict for each outer residue class.
  std::vector<VerdictKind> inner(pm);
  for (std::uint32_t rm = 0; rm < pm; ++rm) {
    std::vector<bool> slice;
    for (std::uint32_t rn = 0; rn < pn; ++rn) {
      NormalForm::Residues r{};
      r[idx(Var::m)] = rm;
      r[idx(Var::n)] = rn;
      slice.push_back(pat.truth[pat.index_of(r)]);
    }
    inner[rm] = detail::pattern_verdict(slice);
  }
  std::vector<bool> tail(pm), false_tail(pm);
  for (std::uint32_t rm = 0; rm < pm; ++rm) {
    tail[rm] = inner[rm] == VerdictKind::True;
    false_tail[rm] = inner[rm] == VerdictKind::False;
  }
  VerdictKind kind = VerdictKind::Undetermined;
  if (detail::pattern_verdict(tail) == VerdictKind::True) kind = VerdictKind::True;
  if (detail::pattern_verdict(false_tail) == VerdictKind::True) kind = VerdictKind::False;
  tail.resize(detail::minimal_period(tail));

  // Beyond this bound no coefficient (in n) of any sign polynomial changes
  // sign in m, so every slice follows the generic pattern.
  Integer bound = 0;
  for (const auto& [key, f] : atoms.diffs)
    for (const auto& br : f.branches())
      for (const auto& c : br.sign_polynomial().coefficients(Var::n))
        bound = std::max(bound, cauchy_bound(c.univariate(Var::m)));
  if (bound > opt.max_outer_scan)
    return Verdict{kind, TruthSetClass::unknown("outer bound " + bound.str() + " exceeds scan limit")};
  const long long B = static_cast<long long>(bound);
  std::vector<bool> member(static_cast<std::size_t>(B));
  for (long long m = 0; m < B; ++m)
    member[static_cast<std::size_t>(m)] = eventual_verdict(detail::outer_slice(b, m)) == VerdictKind::True;
  return Verdict{kind, detail::assemble(member, tail, B)};
}

inline Verdict compare2(const Hyper2& a, const Hyper2& b, Rel rel, const Level2Options& opt = {}) {
  return decide2(BoolTerm::compare(a.rep(), rel, b.rep()), opt);
}

/// Unlimited iff the representative grows beyond every constant on each
/// residue class; not unlimited iff it is a constant.
inline Verdict is_unlimited(const Hyper1& x) {
  NormalForm f = normalize(x.rep());
  const Var order[] = {Var::n};
  bool grows = true;
  std::optional<Rational> lowest;
  for (const auto& br : f.branches()) {
    int lead = lex_sign(br.sign_polynomial(), order);
    grows = grows && lead > 0 && br.num().degree(Var::n) > br.den().degree(Var::n);
    if (br.is_constant()) lowest = lowest ? std::min(*lowest, br.constant_value()) : br.constant_value();
  }
  const SeqTerm& t = x.rep();
  if (grows) return Verdict{VerdictKind::True, classify_truth_set(BoolTerm::compare(t, Rel::gt, SeqTerm::constant(0)))};
  if (f.is_constant()) {
    auto c = SeqTerm::constant(f.branches()[0].constant_value());
    return Verdict{VerdictKind::False, classify_truth_set(BoolTerm::compare(t, Rel::eq, c))};
  }
  auto c = SeqTerm::constant(lowest.value_or(0));
  return Verdict{VerdictKind::Undetermined, classify_truth_set(BoolTerm::compare(t, Rel::gt, c))};
}

enum class Level2Class : std::uint8_t { StandardStandard, StarNuOfUnlimited, StarUnlimited };

inline const char* level2_class_name(Level2Class c) {
  switch (c) {
    case Level2Class::StandardStandard: return "StandardStandard";
    case Level2Class::StarNuOfUnlimited: return "StarNuOfUnlimited";
    case Level2Class::StarUnlimited: return "StarUnlimited";
  }
  return "?";
}

/// Probe elements used to locate a level-2 natural among the three parts.
inline std::vector<Hyper1> default_probes() {
  const SeqTerm n = SeqTerm::index();
  std::vector<Hyper1> out;
  for (long long a : {0, 1, 5, 100}) out.push_back(nu1(a));
  out.push_back(omega());
  out.push_back(Hyper1(n + SeqTerm::constant(1)));
  out.push_back(Hyper1(SeqTerm::constant(2) * n));
  out.push_back(Hyper1(n * n));
  return out;
}

/// Places x in one of the three parts of the level-2 naturals, by
/// structure for the standard part and by comparison with the probes
/// otherwise.
inline Level2Class partition_level2(const Hyper2& x, const std::vector<Hyper1>& probes = default_probes(),
                                    const Level2Options& opt = {}) {
  if (x.base() != Sort::nat) throw SortError("partition_level2 needs base Nat");
  NormalForm f = normalize(x.rep());
  if (f.is_constant()) return Level2Class::StandardStandard;

  std::vector<Hyper1> standard, unlimited;
  for (const auto& p : probes) {
    if (normalize(p.rep()).is_constant())
      standard.push_back(p);
    else if (is_unlimited(p).is_true())
      unlimited.push_back(p);
  }
  if (standard.empty() || unlimited.empty())
    throw InvalidInput("probe battery needs standard and unlimited elements");

  auto holds = [&](const Hyper2& a, Rel r, const Hyper2& b) { return compare2(a, b, r, opt).is_true(); };

  bool above_standard = std::all_of(standard.begin(), standard.end(),
                                    [&](const Hyper1& s) { return holds(x, Rel::gt, nu2(s)); });
  bool below_nu = std::all_of(unlimited.begin(), unlimited.end(),
                              [&](const Hyper1& u) { return holds(x, Rel::lt, nu2(u)); });
  if (above_standard && below_nu) return Level2Class::StarNuOfUnlimited;

  const Var order[] = {Var::n, Var::m};
  bool slices_unlimited = std::all_of(f.branches().begin(), f.branches().end(), [&](const RatFunc& br) {
    return lex_sign(br.sign_polynomial(), order) > 0 && br.num().degree(Var::n) > br.den().degree(Var::n);
  });
  bool above_star = std::all_of(probes.begin(), probes.end(),
                                [&](const Hyper1& p) { return holds(x, Rel::gt, star_nu(p)); });
  if (slices_unlimited && above_star) return Level2Class::StarUnlimited;
  throw UndecidedPartition("cannot place " + x.str() + " among the three parts");
}

namespace detail {

inline BoolTerm all_of_terms(std::vector<BoolTerm> parts) {
  std::vector<BoolTerm> kept;
  for (auto& p : parts) {
    if (p.op() == BoolTerm::Op::literal) {
      if (!p.node().value) return BoolTerm::literal(false);
      continue;
    }
    kept.push_back(std::move(p));
  }
  return BoolTerm::conjunction(std::move(kept));
}

inline BoolTerm any_of_terms(std::vector<BoolTerm> parts) {
  std::vector<BoolTerm> kept;
  for (auto& p : parts) {
    if (p.op() == BoolTerm::Op::literal) {
      if (p.node().value) return BoolTerm::literal(true);
      continue;
    }
    kept.push_back(std::move(p));
  }
  return BoolTerm::disjunction(std::move(kept));
}

inline BoolTerm not_term(const BoolTerm& b) {
  if (b.op() == BoolTerm::Op::literal) return BoolTerm::literal(!b.node().value);
  return !b;
}

inline SeqTerm polynomial_term(const Polynomial& p, const SeqTerm& x) {
  if (p.is_zero()) return SeqTerm::constant(0);
  std::optional<SeqTerm> sum;
  for (const auto& [mono, coeff] : p.terms()) {
    SeqTerm t = SeqTerm::constant(coeff);
    for (int e = 0; e < mono[idx(Var::x)]; ++e) t = t * x;
    sum = sum ? *sum + t : t;
  }
  return *sum;
}

// Sign condition of a polynomial in x: c(x) rel 0, folded when constant.
inline BoolTerm sign_condition(const Polynomial& c, Rel rel, const SeqTerm& x) {
  if (c.is_constant()) return BoolTerm::literal(rel_holds(rel, sign(c.constant_value())));
  return BoolTerm::compare(polynomial_term(c, x), rel, SeqTerm::constant(0));
}

// Condition on x under which the sign of p(x, n) is eventually `s` as n grows.
inline BoolTerm eventual_sign_condition(const std::vector<Polynomial>& cs, int s, const SeqTerm& x) {
  if (s == 0) {
    std::vector<BoolTerm> zero;
    for (const auto& c : cs) zero.push_back(sign_condition(c, Rel::eq, x));
    return all_of_terms(std::move(zero));
  }
  std::vector<BoolTerm> options;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    std::vector<BoolTerm> parts{sign_condition(cs[k], s > 0 ? Rel::gt : Rel::lt, x)};
    for (std::size_t j = k + 1; j < cs.size(); ++j) parts.push_back(sign_condition(cs[j], Rel::eq, x));
    options.push_back(all_of_terms(std::move(parts)));
  }
  return any_of_terms(std::move(options));
}

}  // namespace detail

/// The standard set {x : R(x, a) holds} as a pair of conditions on x: the
/// first implies R(x, a) holds in every ultrapower, the second that it fails
/// in every ultrapower. R is a boolean term in x and y; a fills the slot y.
struct DefinableSet {
  BoolTerm holds;
  BoolTerm fails;
};

inline DefinableSet definable_set(const BoolTerm& relation, const Hyper1& a) {
  if (relation.uses(Var::n) || relation.uses(Var::m)) throw UnsupportedTerm("relation may not mention the indices");
  BoolTerm inst = relation.substitute(Var::y, a.rep());
  AtomTable atoms(inst);
  const NormalForm::Periods periods = atoms.periods();
  const std::uint32_t px = periods[idx(Var::x)], pn = periods[idx(Var::n)];
  const SeqTerm x = SeqTerm::variable(Var::x, px > 1 ? Sort::integer : Sort::rational);

  std::vector<BoolTerm> holds, fails;
  for (std::uint32_t rx = 0; rx < px; ++rx) {
    std::vector<BoolTerm> slice_true, slice_false;
    for (std::uint32_t rn = 0; rn < pn; ++rn) {
      NormalForm::Residues r{};
      r[idx(Var::x)] = rx;
      r[idx(Var::n)] = rn;
      BoolTerm cond = map_comparisons(inst, [&](const BoolTerm& c) {
        const RatFunc& br = atoms.diff(c).branch(r);
        auto cs = br.sign_polynomial().coefficients(Var::n);
        std::vector<BoolTerm> defined;
        for (const auto& d : br.den().coefficients(Var::n)) defined.push_back(detail::sign_condition(d, Rel::ne, x));
        std::vector<BoolTerm> signs;
        for (int s : {-1, 0, 1})
          if (rel_holds(c.node().rel, s)) signs.push_back(detail::eventual_sign_condition(cs, s, x));
        return detail::all_of_terms({detail::any_of_terms(std::move(defined)), detail::any_of_terms(std::move(signs))});
      });
      slice_true.push_back(cond);
      slice_false.push_back(detail::not_term(cond));
    }
    std::vector<BoolTerm> guard;
    if (px > 1)
      guard.push_back(BoolTerm::compare(SeqTerm::mod(x, px), Rel::eq, SeqTerm::constant(rx)));
    auto guarded = [&](std::vector<BoolTerm> parts) {
      parts.insert(parts.begin(), guard.begin(), guard.end());
      return detail::all_of_terms(std::move(parts));
    };
    holds.push_back(guarded(std::move(slice_true)));
    fails.push_back(guarded(std::move(slice_false)));
  }
  return {detail::any_of_terms(std::move(holds)), detail::any_of_terms(std::move(fails))};
}

/// Whether R(*ν(b), ν(a)) holds at level 2, decided by asking whether b
/// lies in the extension of the standard set {x : R(x, a)}.
inline Verdict nunustar_check(const BoolTerm& relation, const Hyper1& a, const Hyper1& b,
                              const DecisionOptions& opt = {}) {
  DefinableSet d = definable_set(relation, a);
  Verdict in = decide(d.holds.substitute(Var::x, b.rep()), opt);
  if (in.is_true()) return in;
  Verdict out = decide(d.fails.substitute(Var::x, b.rep()), opt);
  if (out.is_true()) return Verdict{VerdictKind::False, std::move(out.evidence)};
  return Verdict{VerdictKind::Undetermined, std::move(in.evidence)};
}

/// The same question asked directly of the level-2 pair (*ν(b), ν(a)).
inline Verdict nunustar_direct(const BoolTerm& relation, const Hyper1& a, const Hyper1& b,
                               const Level2Options& opt = {}) {
  std::array<const SeqTerm*, kVarCount> repl{};
  const SeqTerm sb = star_nu(b).rep(), na = nu2(a).rep();
  repl[idx(Var::x)] = &sb;
  repl[idx(Var::y)] = &na;
  return decide2(relation.substitute(repl), opt);
}

/// Whether x belongs to the extension of the standard set {x : S(x)}.
inline Verdict induced_uf_membership(const Hyper1& x, const BoolTerm& set, const DecisionOptions& opt = {}) {
  return decide(set.substitute(Var::x, x.rep()), opt);
}

/// A countable standard set whose extension contains a given element.
struct ConfiningSet {
  enum class Kind : std::uint8_t { singleton, naturals, image };

  Kind kind;
  Rational point;     // singleton
  SeqTerm generator;  // image: the set {generator(k) : k in N}
  Verdict obligation; // membership of the element in the extension

  bool contains(const Rational& v) const {
    switch (kind) {
      case Kind::singleton: return v == point;
      case Kind::naturals: return is_integer(v) && v >= 0;
      case Kind::image: {
        NormalForm f = normalize(generator);
        Integer bound = f.period(Var::n);
        for (const auto& br : f.branches()) {
          RatFunc diff = br - RatFunc(Polynomial::constant(v));
          if (diff.is_zero()) return true;
          bound = std::max(bound, cauchy_bound(diff.sign_polynomial().univariate(Var::n)) + f.period(Var::n));
        }
        for (long long k = 0; k < static_cast<long long>(bound); ++k) {
          auto value = f.evaluate(Point{Rational(k), std::nullopt, std::nullopt, std::nullopt});
          if (value && *value == v) return true;
        }
        return false;
      }
    }
    return false;
  }

  std::string str() const {
    switch (kind) {
      case Kind::singleton: return "{" + to_string(point) + "}";
      case Kind::naturals: return "N";
      case Kind::image: return "{" + generator.substitute(Var::n, SeqTerm::variable(Var::y)).str() + " : y in N}";
    }
    return "?";
  }
};

inline ConfiningSet confining_set(const Hyper1& x) {
  NormalForm f = normalize(x.rep());
  if (f.is_constant()) {
    Rational a = f.branches()[0].constant_value();
    auto member = BoolTerm::compare(SeqTerm::variable(Var::x), Rel::eq, SeqTerm::constant(a));
    return {ConfiningSet::Kind::singleton, a, SeqTerm::constant(a), induced_uf_membership(x, member)};
  }
  if (fragment_equal(x.rep(), SeqTerm::index())) {
    const SeqTerm v = SeqTerm::variable(Var::x, Sort::integer);
    auto member = BoolTerm::compare(v, Rel::ge, SeqTerm::constant(0)) &&
                  BoolTerm::compare(SeqTerm::mod(v, 1), Rel::eq, SeqTerm::constant(0));
    return {ConfiningSet::Kind::naturals, 0, x.rep(), induced_uf_membership(x, member)};
  }
  // rep(n) is the image of k = n, so every index is a member.
  return {ConfiningSet::Kind::image, 0, x.rep(),
          Verdict{VerdictKind::True, TruthSetClass::cofinite({}, 0)}};
}

/// Where witnesses for a saturation chain are searched.
enum class WitnessDomain : std::uint8_t { naturals, integers, rationals };

struct SaturationOptions {
  WitnessDomain domain = WitnessDomain::naturals;
  /// Candidates tried per finite conjunction.
  long long search_bound = 100000;
  /// Witnesses computed before fitting a closed form.
  int fit_prefix = 12;
};

struct SaturationResult {
  Hyper1 element;
  std::vector<Rational> witnesses;  // least witness of c_0 ∧ … ∧ c_k
  std::vector<Verdict> verdicts;    // c_k(element) for each checked k
  bool all_true() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.is_true(); });
  }
};

namespace detail {

// k-th candidate of the witness enumeration for a domain.
class CandidateStream {
public:
  explicit CandidateStream(WitnessDomain d) : domain_(d) {}

  Rational next() {
    switch (domain_) {
      case WitnessDomain::naturals: return Rational(count_++);
      case WitnessDomain::integers: {
        long long i = count_++;
        return i == 0 ? Rational(0) : (i % 2 ? Rational((i + 1) / 2) : Rational(-(i / 2)));
      }
      case WitnessDomain::rationals: {
        while (queue_.empty()) fill_height(height_++);
        Rational r = queue_.front();
        queue_.erase(queue_.begin());
        return r;
      }
    }
    return 0;
  }

private:
  // Reduced p/q with max(|p|, q) == h, by absolute value then sign.
  void fill_height(long long h) {
    if (h == 0) {
      queue_.push_back(0);
      return;
    }
    std::vector<Rational> out;
    for (long long q = 1; q <= h; ++q)
      for (long long p = 1; p <= h; ++p)
        if (std::max(p, q) == h && std::gcd(p, q) == 1) out.emplace_back(p, q);
    std::sort(out.begin(), out.end());
    for (const auto& r : out) {
      queue_.push_back(r);
      queue_.push_back(-r);
    }
  }

  WitnessDomain domain_;
  long long count_ = 0;
  long long height_ = 0;
  std::vector<Rational> queue_;
};

// Interpolating polynomial through (k, values[k]) for k < points, checked
// against every value.
inline std::optional<std::vector<Rational>> fit_polynomial(const std::vector<Rational>& values, std::size_t points) {
  if (values.size() < points + 2) return std::nullopt;
  // Newton divided differences on the nodes 0..points-1.
  std::vector<Rational> coef(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(points));
  for (std::size_t j = 1; j < points; ++j)
    for (std::size_t i = points - 1; i >= j; --i) coef[i] = (coef[i] - coef[i - 1]) / Rational(static_cast<long long>(j));
  std::vector<Rational> poly{0};
  std::vector<Rational> basis{1};
  for (std::size_t i = 0; i < points; ++i) {
    if (poly.size() < basis.size()) poly.resize(basis.size());
    for (std::size_t d = 0; d < basis.size(); ++d) poly[d] += coef[i] * basis[d];
    std::vector<Rational> next(basis.size() + 1);
    for (std::size_t d = 0; d < basis.size(); ++d) {
      next[d + 1] += basis[d];
      next[d] -= basis[d] * Rational(static_cast<long long>(i));
    }
    basis = std::move(next);
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    Rational v = 0, pow = 1;
    for (const auto& c : poly) {
      v += c * pow;
      pow *= Rational(static_cast<long long>(k));
    }
    if (v != values[k]) return std::nullopt;
  }
  return trim(std::move(poly));
}

inline SeqTerm univariate_term(const std::vector<Rational>& cs) {
  return polynomial_term(Polynomial::from_univariate(Var::x, cs), SeqTerm::index());
}

inline std::optional<SeqTerm> fit_closed_form(const std::vector<Rational>& w) {
  for (std::size_t points = 1; points + 2 <= w.size() && points <= 4; ++points)
    if (auto p = fit_polynomial(w, points)) return univariate_term(*p);
  if (std::none_of(w.begin(), w.end(), [](const Rational& v) { return v == 0; })) {
    std::vector<Rational> inv;
    for (const auto& v : w) inv.push_back(1 / v);
    for (std::size_t points = 1; points + 2 <= inv.size() && points <= 4; ++points)
      if (auto p = fit_polynomial(inv, points)) {
        SeqTerm den = univariate_term(*p);
        try {
          return SeqTerm::constant(1) / den;
        } catch (const UnsupportedTerm&) {
          return std::nullopt;
        }
      }
  }
  return std::nullopt;
}

}  // namespace detail

/// Realises a countable chain of conditions c_k(x), given as one boolean
/// term in x and the parameter y = k: the diagonal element whose n-th entry
/// is the least witness of c_0 ∧ … ∧ c_n. The first `checks` conditions are
/// then verified for the resulting element.
inline SaturationResult saturate_chain(const BoolTerm& family, int checks, const SaturationOptions& opt = {}) {
  auto condition = [&](long long k) { return family.substitute(Var::y, SeqTerm::constant(k)); };
  std::vector<Rational> witnesses;
  std::vector<BoolTerm> prefix;
  for (int k = 0; k < opt.fit_prefix; ++k) {
    prefix.push_back(condition(k));
    detail::CandidateStream stream(opt.domain);
    std::optional<Rational> found;
    for (long long tries = 0; tries < opt.search_bound && !found; ++tries) {
      Rational cand = stream.next();
      Point at{};
      at[idx(Var::x)] = cand;
      if (std::all_of(prefix.begin(), prefix.end(), [&](const BoolTerm& c) { return c.evaluate(at); })) found = cand;
    }
    if (!found) throw WitnessSearchExhausted(static_cast<std::size_t>(k), static_cast<std::size_t>(opt.search_bound));
    witnesses.push_back(*found);
  }
  auto closed = detail::fit_closed_form(witnesses);
  if (!closed) throw NoClosedForm("no closed form fits the witnesses of " + family.str());
  Sort base = opt.domain == WitnessDomain::naturals ? Sort::nat
              : opt.domain == WitnessDomain::integers ? Sort::integer
                                                       : Sort::rational;
  SaturationResult out{Hyper1(*closed, join(closed->sort(), base)), std::move(witnesses), {}};
  for (int k = 0; k < checks; ++k) out.verdicts.push_back(induced_uf_membership(out.element, condition(k)));
  return out;
}

/// Realises a finite list of conditions: the diagonal element is eventually
/// the least witness of the full conjunction.
inline SaturationResult saturate_chain(const std::vector<BoolTerm>& conditions, const SaturationOptions& opt = {}) {
  if (conditions.empty()) throw InvalidInput("empty condition list");
  std::vector<Rational> witnesses;
  for (std::size_t k = 0; k < conditions.size(); ++k) {
    detail::CandidateStream stream(opt.domain);
    std::optional<Rational> found;
    for (long long tries = 0; tries < opt.search_bound && !found; ++tries) {
      Rational cand = stream.next();
      Point at{};
      at[idx(Var::x)] = cand;
      bool ok = true;
      for (std::size_t j = 0; j <= k && ok; ++j) ok = conditions[j].evaluate(at);
      if (ok) found = cand;
    }
    if (!found) throw WitnessSearchExhausted(k, static_cast<std::size_t>(opt.search_bound));
    witnesses.push_back(*found);
  }
  SaturationResult out{nu1(witnesses.back()), std::move(witnesses), {}};
  for (const auto& c : conditions) out.verdicts.push_back(induced_uf_membership(out.element, c));
  return out;
}

/// An order on a base set given by its ≤ relation as a term in x and y.
struct OrderSpec {
  std::string name;
  BoolTerm le;

  static OrderSpec naturals() {
    return {"N", BoolTerm::compare(SeqTerm::variable(Var::x, Sort::nat), Rel::le, SeqTerm::variable(Var::y, Sort::nat))};
  }
  static OrderSpec integers() {
    return {"Z", BoolTerm::compare(SeqTerm::variable(Var::x, Sort::integer), Rel::le,
                                   SeqTerm::variable(Var::y, Sort::integer))};
  }
};

struct WellOrderReport {
  enum class Conclusion : std::uint8_t { consistent, refuted, inconclusive };

  std::string order;
  std::vector<std::pair<Hyper1, Verdict>> entries;
  Conclusion conclusion = Conclusion::inconclusive;

  static const char* conclusion_name(Conclusion c) {
    switch (c) {
      case Conclusion::consistent: return "consistent with well-ordered";
      case Conclusion::refuted: return "witnessed non-well-ordered";
      case Conclusion::inconclusive: return "inconclusive";
    }
    return "?";
  }
};

/// For each element a, whether *ν(a) ≤ ν(a) holds at level 2.
inline WellOrderReport well_order_criterion(const OrderSpec& order, const std::vector<Hyper1>& battery,
                                            const Level2Options& opt = {}) {
  WellOrderReport report{order.name, {}, WellOrderReport::Conclusion::inconclusive};
  bool all_true = true, some_false = false;
  for (const auto& a : battery) {
    std::array<const SeqTerm*, kVarCount> repl{};
    const SeqTerm lhs = star_nu(a).rep(), rhs = nu2(a).rep();
    repl[idx(Var::x)] = &lhs;
    repl[idx(Var::y)] = &rhs;
    Verdict v = decide2(order.le.substitute(repl), opt);
    all_true = all_true && v.is_true();
    some_false = some_false || v.is_false();
    report.entries.emplace_back(a, std::move(v));
  }
  if (some_false)
    report.conclusion = WellOrderReport::Conclusion::refuted;
  else if (all_true)
    report.conclusion = WellOrderReport::Conclusion::consistent;
  return report;
}

}  // namespace nsa
