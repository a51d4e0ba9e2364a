#pragma once

// Decision procedure for the Fréchet fragment: truth sets of boolean terms
// over one index are classified as finite, cofinite or eventually periodic.
// Only the first two answers are independent of the free ultrafilter
// chosen to extend the Fréchet filter.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nsa/normal_form.hpp"
#include "nsa/term.hpp"

namespace nsa {

struct TruthSetClass {
  enum class Kind : std::uint8_t { finite, cofinite, periodic_tail, unknown };

  Kind kind = Kind::unknown;
  /// finite: the members; cofinite: the complement; periodic_tail: the
  /// members below the onset.
  std::vector<long long> indices;
  std::uint32_t period = 1;
  std::vector<std::uint32_t> residues;  // periodic_tail: true residues mod period
  long long onset = 0;                  // periodic_tail: pattern holds from here on
  long long bound = 0;                  // derived onset bound: all signs settled from here on
  std::string reason;                   // unknown

  static TruthSetClass finite(std::vector<long long> members, long long bound) {
    return {Kind::finite, std::move(members), 1, {}, 0, bound, {}};
  }
  static TruthSetClass cofinite(std::vector<long long> complement, long long bound) {
    return {Kind::cofinite, std::move(complement), 1, {}, 0, bound, {}};
  }
  static TruthSetClass periodic(std::uint32_t p, std::vector<std::uint32_t> res, long long onset,
                                std::vector<long long> prefix, long long bound) {
    return {Kind::periodic_tail, std::move(prefix), p, std::move(res), onset, bound, {}};
  }
  static TruthSetClass unknown(std::string why) { return {Kind::unknown, {}, 1, {}, 0, 0, std::move(why)}; }

  /// Membership of index n implied by the classification.
  bool contains(long long n) const {
    auto listed = [&] { return std::binary_search(indices.begin(), indices.end(), n); };
    switch (kind) {
      case Kind::finite: return listed();
      case Kind::cofinite: return !listed();
      case Kind::periodic_tail:
        if (n < onset) return listed();
        return std::binary_search(residues.begin(), residues.end(), static_cast<std::uint32_t>(n % period));
      case Kind::unknown: throw UnsupportedTerm("membership unknown: " + reason);
    }
    return false;
  }

  std::string str() const {
    auto list = [](const auto& xs) {
      std::string s = "{";
      for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
      return s + "}";
    };
    switch (kind) {
      case Kind::finite: return "Finite(" + list(indices) + ")";
      case Kind::cofinite: return "Cofinite(complement=" + list(indices) + ")";
      case Kind::periodic_tail:
        return "PeriodicTail(p=" + std::to_string(period) + ", residues=" + list(residues) +
               ", onset=" + std::to_string(onset) + ")";
      case Kind::unknown: return "Unknown(" + reason + ")";
    }
    return "?";
  }

  friend bool operator==(const TruthSetClass&, const TruthSetClass&) = default;
};

enum class VerdictKind : std::uint8_t { True, False, Undetermined };

inline const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::True: return "True";
    case VerdictKind::False: return "False";
    case VerdictKind::Undetermined: return "Undetermined";
  }
  return "?";
}

/// Result of a question modulo an ultrafilter extending the Fréchet filter.
/// True iff the truth set is cofinite, False iff finite; Undetermined
/// carries the classification that shows the answer depends on the choice.
struct Verdict {
  VerdictKind kind = VerdictKind::Undetermined;
  TruthSetClass evidence;

  bool is_true() const { return kind == VerdictKind::True; }
  bool is_false() const { return kind == VerdictKind::False; }
  bool decided() const { return kind != VerdictKind::Undetermined; }

  std::string str() const {
    if (kind == VerdictKind::Undetermined) return "Undetermined(" + evidence.str() + ")";
    return verdict_name(kind);
  }
};

/// Evaluates a boolean term with the comparisons valued by `atom`.
inline bool evaluate_with(const BoolTerm& b, const std::function<bool(const BoolTerm&)>& atom) {
  using Op = BoolTerm::Op;
  const auto& nd = b.node();
  switch (nd.op) {
    case Op::literal: return nd.value;
    case Op::cmp: return atom(b);
    case Op::not_: return !evaluate_with(nd.args[0], atom);
    case Op::and_:
      for (const auto& a : nd.args)
        if (!evaluate_with(a, atom)) return false;
      return true;
    case Op::or_:
      for (const auto& a : nd.args)
        if (evaluate_with(a, atom)) return true;
      return false;
  }
  return false;
}

/// Rebuilds b with every comparison replaced by f(comparison).
inline BoolTerm map_comparisons(const BoolTerm& b, const std::function<BoolTerm(const BoolTerm&)>& f) {
  using Op = BoolTerm::Op;
  const auto& nd = b.node();
  switch (nd.op) {
    case Op::literal: return b;
    case Op::cmp: return f(b);
    case Op::not_: return !map_comparisons(nd.args[0], f);
    case Op::and_:
    case Op::or_: {
      std::vector<BoolTerm> as;
      for (const auto& a : nd.args) as.push_back(map_comparisons(a, f));
      return nd.op == Op::and_ ? BoolTerm::conjunction(std::move(as)) : BoolTerm::disjunction(std::move(as));
    }
  }
  return b;
}

/// Comparisons of a boolean term, each with its difference normalised.
struct AtomTable {
  std::map<const void*, NormalForm> diffs;

  explicit AtomTable(const BoolTerm& b) {
    b.for_each_comparison([&](const BoolTerm& c) {
      const auto& nd = c.node();
      diffs.emplace(&nd, normalize(SeqTerm::sub(nd.lhs, nd.rhs)));
    });
  }

  const NormalForm& diff(const BoolTerm& c) const { return diffs.at(&c.node()); }

  NormalForm::Periods periods() const {
    NormalForm::Periods p{1, 1, 1, 1};
    for (const auto& [k, f] : diffs) p = NormalForm::common_periods(p, f.periods());
    return p;
  }

  bool uses(Var v) const {
    return std::any_of(diffs.begin(), diffs.end(), [v](const auto& kv) { return kv.second.uses(v); });
  }
};

/// Eventual truth of a boolean term on each residue class of the variables
/// in `order`, which tend to infinity with order[0] dominating.
struct EventualPattern {
  NormalForm::Periods periods{1, 1, 1, 1};
  std::vector<bool> truth;  // indexed like a NormalForm with these periods

  std::size_t index_of(const NormalForm::Residues& r) const {
    std::size_t i = 0;
    for (std::size_t v = 0; v < kVarCount; ++v) i = i * periods[v] + (r[v] % periods[v]);
    return i;
  }
  NormalForm::Residues residues_of(std::size_t i) const {
    NormalForm::Residues r{};
    for (std::size_t v = kVarCount; v-- > 0;) {
      r[v] = static_cast<std::uint32_t>(i % periods[v]);
      i /= periods[v];
    }
    return r;
  }
};

inline EventualPattern eventual_pattern(const BoolTerm& b, const AtomTable& atoms, std::span<const Var> order) {
  for (std::size_t v = 0; v < kVarCount; ++v)
    if (std::find(order.begin(), order.end(), Var(v)) == order.end() && atoms.uses(Var(v)))
      throw UnsupportedTerm(std::string("unexpected free variable ") + var_name(Var(v)));
  EventualPattern pat;
  pat.periods = atoms.periods();
  std::size_t count = NormalForm::branch_count(pat.periods);
  pat.truth.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto r = pat.residues_of(i);
    pat.truth[i] = evaluate_with(b, [&](const BoolTerm& c) {
      const RatFunc& br = atoms.diff(c).branch(r);
      return rel_holds(c.node().rel, lex_sign(br.sign_polynomial(), order));
    });
  }
  return pat;
}

struct DecisionOptions {
  /// Largest onset bound for which exception sets are enumerated.
  long long max_scan = 100'000;
};

namespace detail {

inline std::uint32_t minimal_period(const std::vector<bool>& pattern) {
  auto p = static_cast<std::uint32_t>(pattern.size());
  for (std::uint32_t d = 1; d < p; ++d) {
    if (p % d) continue;
    bool ok = true;
    for (std::uint32_t i = d; i < p && ok; ++i) ok = pattern[i] == pattern[i % d];
    if (ok) return d;
  }
  return p;
}

/// Builds the class of a set given its members below B and the periodic
/// pattern (of least period) it follows from B on.
inline TruthSetClass assemble(const std::vector<bool>& member, const std::vector<bool>& tail, long long B) {
  const auto p = static_cast<std::uint32_t>(tail.size());
  const bool all_true = std::all_of(tail.begin(), tail.end(), [](bool t) { return t; });
  const bool all_false = std::none_of(tail.begin(), tail.end(), [](bool t) { return t; });
  if (all_true || all_false) {
    std::vector<long long> listed;
    for (long long i = 0; i < B; ++i)
      if (member[static_cast<std::size_t>(i)] != all_true) listed.push_back(i);
    return all_true ? TruthSetClass::cofinite(std::move(listed), B) : TruthSetClass::finite(std::move(listed), B);
  }
  long long onset = 0;
  for (long long i = B; i-- > 0;)
    if (member[static_cast<std::size_t>(i)] != tail[static_cast<std::size_t>(i % p)]) {
      onset = i + 1;
      break;
    }
  std::vector<long long> prefix;
  for (long long i = 0; i < onset; ++i)
    if (member[static_cast<std::size_t>(i)]) prefix.push_back(i);
  std::vector<std::uint32_t> res;
  for (std::uint32_t r = 0; r < p; ++r)
    if (tail[r]) res.push_back(r);
  return TruthSetClass::periodic(p, std::move(res), onset, std::move(prefix), B);
}

inline VerdictKind pattern_verdict(const std::vector<bool>& tail) {
  if (std::all_of(tail.begin(), tail.end(), [](bool t) { return t; })) return VerdictKind::True;
  if (std::none_of(tail.begin(), tail.end(), [](bool t) { return t; })) return VerdictKind::False;
  return VerdictKind::Undetermined;
}

struct Classification {
  TruthSetClass cls;
  VerdictKind eventual;  // from the tail pattern alone
};

inline std::vector<bool> eventual_tail(const BoolTerm& b, const AtomTable& atoms) {
  const Var order[] = {Var::n};
  EventualPattern pat = eventual_pattern(b, atoms, order);
  std::vector<bool> tail(pat.truth);
  tail.resize(minimal_period(tail));
  return tail;
}

inline Classification classify(const BoolTerm& b, const DecisionOptions& opt) {
  AtomTable atoms(b);
  const std::vector<bool> tail = eventual_tail(b, atoms);

  Integer bound = 0;
  for (const auto& [key, f] : atoms.diffs)
    for (const auto& br : f.branches()) bound = std::max(bound, cauchy_bound(br.sign_polynomial().univariate(Var::n)));

  const VerdictKind eventual = pattern_verdict(tail);

  if (bound > opt.max_scan)
    return {TruthSetClass::unknown("onset bound " + bound.str() + " exceeds scan limit"), eventual};
  const long long B = static_cast<long long>(bound);

  std::vector<bool> member(static_cast<std::size_t>(B));
  for (long long i = 0; i < B; ++i) member[static_cast<std::size_t>(i)] = b.evaluate_at(i);
  return {assemble(member, tail, B), eventual};
}

}  // namespace detail

/// Exact value of t at index n.
inline Rational eval_at(const SeqTerm& t, long long n) {
  if (n < 0) throw UnsupportedTerm("negative index");
  return t.evaluate_at(n);
}

/// Classifies {n : b(n)}. Throws UnsupportedTerm when b mentions anything
/// other than the index n.
inline TruthSetClass classify_truth_set(const BoolTerm& b, const DecisionOptions& opt = {}) {
  return detail::classify(b, opt).cls;
}

/// Verdict of a one-index boolean term modulo the Fréchet filter.
inline Verdict decide(const BoolTerm& b, const DecisionOptions& opt = {}) {
  auto c = detail::classify(b, opt);
  return Verdict{c.eventual, std::move(c.cls)};
}

/// The verdict alone, without enumerating the exceptional indices.
inline VerdictKind eventual_verdict(const BoolTerm& b) {
  AtomTable atoms(b);
  return detail::pattern_verdict(detail::eventual_tail(b, atoms));
}

/// Whether a rel b holds modulo every ultrafilter extending the Fréchet filter.
inline Verdict compare_mod_frechet(const SeqTerm& a, const SeqTerm& b, Rel rel, const DecisionOptions& opt = {}) {
  return decide(BoolTerm::compare(a, rel, b), opt);
}

/// Eventual sign of a one-index term per residue class: the n-th value is
/// eventually nonnegative iff every branch has lex sign >= 0.
inline std::vector<int> eventual_signs(const NormalForm& f) {
  const Var order[] = {Var::n};
  std::vector<int> out;
  for (const auto& br : f.branches()) out.push_back(lex_sign(br.sign_polynomial(), order));
  return out;
}

}  // namespace nsa
