#pragma once

// Exhaustive and seeded check suites shared by the command-line tool and the
// acceptance runner. Each suite returns a SuiteReport; none of them prints.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nsa/dsl.hpp"
#include "nsa/folcheck.hpp"
#include "nsa/hyper.hpp"
#include "nsa/lr.hpp"
#include "nsa/stone.hpp"

namespace nsa {

struct SuiteReport {
  explicit SuiteReport(std::string command = {}) : name(std::move(command)) {}

  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::vector<std::string> details;  // summary lines, then failure descriptions

  bool passed() const noexcept { return failures == 0 && instances > 0; }

  void check(bool ok, const std::string& what) {
    ++instances;
    if (!ok) {
      ++failures;
      if (details.size() < 60) details.push_back("failed: " + what);
    }
  }
  void note(std::string line) { details.push_back(std::move(line)); }
};

// ------------------------------------------------------------- folcheck

inline SuiteReport functor_law_suite(std::size_t max_index, std::size_t k) {
  SuiteReport rep{"functor-laws"};
  const auto laws = check_functor_laws_all(max_index, k);
  rep.instances = laws.instances();
  rep.failures = laws.failure_count();
  for (const auto& [law, t] : laws.laws)
    rep.note(law + ": " + std::to_string(t.instances) + " instances, " + std::to_string(t.failures) + " failures");
  for (const auto& f : laws.failures) rep.note("failed: " + f);
  return rep;
}

inline SuiteReport transfer_suite(std::size_t max_carrier, std::size_t max_index) {
  SuiteReport rep{"transfer"};
  const auto r = run_transfer_battery(battery_models(max_carrier), transfer_battery(), max_index);
  rep.instances = r.instances;
  rep.failures = r.failures;
  rep.note(std::to_string(r.sentences) + " sentences over " + std::to_string(r.models) + " models");
  rep.note(std::to_string(r.empty_carrier_instances) + " instances with an empty carrier");
  if (r.empty_carrier_instances == 0) rep.check(false, "no empty-carrier instance was exercised");
  for (const auto& f : r.failure_details) rep.note("failed: " + f);
  return rep;
}

/// Transfer of one sentence over a model, every |S| ≤ max_index and point.
inline SuiteReport transfer_sentence(const FiniteModel& m, const Formula& sentence, std::size_t max_index) {
  SuiteReport rep{"transfer"};
  for (std::size_t s = 1; s <= max_index; ++s)
    for (std::size_t p = 0; p < s; ++p) {
      const auto r = check_transfer(m, s, p, sentence);
      std::ostringstream line;
      line << "|S|=" << s << " s0=" << p << ": standard " << (r.standard ? "true" : "false") << ", ultrapower "
           << (r.star ? "true" : "false");
      rep.note(line.str());
      rep.check(r.agree(), line.str());
    }
  return rep;
}

// ------------------------------------------------------ regression battery

/// One line `<sexpr> => <Expected>`. The s-expression is a predicate
/// (decided at level 2), `(level2 term)`, `(unlimited term)` or
/// `(nunustar relation a b)`.
struct RegressionEntry {
  std::size_t line = 0;
  Sexpr expr;
  std::string expected;
};

inline std::vector<RegressionEntry> parse_regression_battery(std::string_view text) {
  std::vector<RegressionEntry> out;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto c = line.find(';'); c != std::string_view::npos) line = line.substr(0, c);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto arrow = line.rfind("=>");
    if (arrow == std::string_view::npos) throw SyntaxError("expected '<expression> => <expected>'", 0, line_no, 1);
    std::string expected(line.substr(arrow + 2));
    expected.erase(0, expected.find_first_not_of(" \t"));
    expected.erase(expected.find_last_not_of(" \t\r") + 1);
    if (expected.empty()) throw SyntaxError("missing expected value", 0, line_no, arrow + 3);
    Sexpr e;
    try {
      e = read_sexpr(line.substr(0, arrow));
    } catch (const SyntaxError& err) {
      throw SyntaxError(err.message(), err.position(), line_no, err.column());
    }
    out.push_back({line_no, std::move(e), std::move(expected)});
  }
  return out;
}

namespace detail {

inline Hyper1 level1_element(const Sexpr& e) {
  SeqTerm t = parse_term(e);
  if (t.uses(Var::m)) e.fail("expected a level-1 term");
  return Hyper1(std::move(t));
}

}  // namespace detail

struct RegressionOutcome {
  RegressionOutcome(std::string result) : actual(std::move(result)) {}

  std::string actual;
  std::optional<std::string> disagreement;  // criterion against direct evaluation
};

inline RegressionOutcome evaluate_regression(const Sexpr& e) {
  const std::string& h = e.head();
  if (h == "level2") {
    if (e.size() != 2) e.fail("'level2' takes 1 argument");
    try {
      return {level2_class_name(partition_level2(Hyper2(parse_term(e[1]))))};
    } catch (const UndecidedPartition&) {
      return {"Undecided"};
    }
  }
  if (h == "unlimited") {
    if (e.size() != 2) e.fail("'unlimited' takes 1 argument");
    return {verdict_name(is_unlimited(detail::level1_element(e[1])).kind)};
  }
  if (h == "nunustar") {
    if (e.size() != 4) e.fail("'nunustar' takes a relation and 2 arguments");
    const BoolTerm rel = parse_predicate(e[1]);
    const Hyper1 a = detail::level1_element(e[2]), b = detail::level1_element(e[3]);
    const Verdict crit = nunustar_check(rel, a, b), direct = nunustar_direct(rel, a, b);
    RegressionOutcome out{verdict_name(crit.kind)};
    if (crit.decided() && direct.decided() && crit.kind != direct.kind)
      out.disagreement = std::string("direct evaluation gives ") + verdict_name(direct.kind);
    return out;
  }
  return {verdict_name(decide2(parse_predicate(e)).kind)};
}

inline SuiteReport run_regression(const std::vector<RegressionEntry>& entries) {
  SuiteReport rep{"regress"};
  for (const auto& en : entries) {
    const auto out = evaluate_regression(en.expr);
    std::string line = "line " + std::to_string(en.line) + ": " + en.expr.str() + " => " + out.actual;
    rep.check(out.actual == en.expected, line + " (expected " + en.expected + ")");
    if (out.disagreement) rep.check(false, line + ", " + *out.disagreement);
  }
  return rep;
}

// --------------------------------------------------------------- hyper

inline std::vector<Hyper1> infinitesimal_battery() {
  const SeqTerm n = SeqTerm::index();
  auto c = [](long long v) { return SeqTerm::constant(v); };
  return {epsilon(), Hyper1(c(1) / (n + c(2))), Hyper1(c(1) / (n * n + c(1))), Hyper1(c(3) / (c(2) * n + c(1)))};
}

inline std::vector<Hyper1> nunustar_elements() {
  const SeqTerm n = SeqTerm::index();
  auto c = [](long long v) { return SeqTerm::constant(v); };
  std::vector<Hyper1> out{omega(), Hyper1(n + c(1)), Hyper1(c(2) * n), Hyper1(n * n), Hyper1(c(0) - n),
                          Hyper1(SeqTerm::mod(n, 3))};
  for (auto& e : infinitesimal_battery()) out.push_back(e);
  for (long long a : {0, 1, 3, 7}) out.push_back(nu1(a));
  return out;
}

inline std::vector<BoolTerm> nunustar_relations() {
  const SeqTerm x = SeqTerm::variable(Var::x, Sort::integer), y = SeqTerm::variable(Var::y, Sort::integer);
  auto cmp = [](SeqTerm a, Rel r, SeqTerm b) { return BoolTerm::compare(std::move(a), r, std::move(b)); };
  std::vector<BoolTerm> out;
  for (Rel r : {Rel::eq, Rel::ne, Rel::lt, Rel::le, Rel::gt, Rel::ge}) out.push_back(cmp(x, r, y));
  out.push_back(cmp(x * x, Rel::gt, y));
  out.push_back(cmp(x + y, Rel::gt, SeqTerm::constant(10)));
  out.push_back(cmp(SeqTerm::mod(x, 2), Rel::eq, SeqTerm::constant(0)) || cmp(x, Rel::lt, y));
  out.push_back(cmp(SeqTerm::constant(2) * x, Rel::le, y + SeqTerm::constant(1)));
  return out;
}

/// The (★) criterion against direct level-2 evaluation over every relation
/// and element pair of the built-in battery plus the given entries. Only
/// pairs where both sides are decided count as instances.
inline SuiteReport nunustar_suite(const std::vector<RegressionEntry>& extra = {}) {
  SuiteReport rep{"nunustar"};
  std::size_t undecided = 0, ill_sorted = 0;
  auto run = [&](const BoolTerm& r, const Hyper1& a, const Hyper1& b) {
    Verdict crit, direct;
    try {
      crit = nunustar_check(r, a, b);
      direct = nunustar_direct(r, a, b);
    } catch (const SortError&) {
      ++ill_sorted;
      return;
    }
    if (!crit.decided() || !direct.decided()) {
      ++undecided;
      return;
    }
    rep.check(crit.kind == direct.kind, r.str() + " a=" + a.str() + " b=" + b.str() + ": criterion " +
                                            verdict_name(crit.kind) + ", direct " + verdict_name(direct.kind));
  };
  const auto elems = nunustar_elements();
  for (const auto& r : nunustar_relations())
    for (const auto& a : elems)
      for (const auto& b : elems) run(r, a, b);
  for (const auto& en : extra) {
    if (en.expr.head() != "nunustar" || en.expr.size() != 4) continue;
    run(parse_predicate(en.expr[1]), detail::level1_element(en.expr[2]), detail::level1_element(en.expr[3]));
  }
  rep.note(std::to_string(undecided) + " triples left undecided by one side, " + std::to_string(ill_sorted) +
           " ill-sorted");
  return rep;
}

/// The ordering and embedding facts for the level-2 naturals and rationals.
inline SuiteReport level2_facts_suite() {
  SuiteReport rep{"level2-facts"};
  auto holds = [](const Hyper2& a, Rel r, const Hyper2& b) { return compare2(a, b, r).is_true(); };
  for (long long a : {0, 1, 5})
    rep.check(holds(nu2(nu1(a)), Rel::eq, star_nu(nu1(a))), "nu2(nu1(" + std::to_string(a) + ")) = starnu(nu1(" +
                                                                std::to_string(a) + "))");
  rep.check(holds(star_nu(omega()), Rel::lt, nu2(omega())), "starnu(omega) < nu2(omega)");
  rep.check(holds(star_nu(omega()), Rel::ne, nu2(omega())), "starnu(omega) != nu2(omega)");
  for (const auto& d : infinitesimal_battery())
    for (const auto& e : infinitesimal_battery())
      rep.check(holds(nu2(d), Rel::lt, star_nu(e)), "nu2(" + d.str() + ") < starnu(" + e.str() + ")");
  rep.check(partition_level2(nu2(nu1(5))) == Level2Class::StandardStandard, "nu2(nu1(5)) is standard");
  rep.check(partition_level2(star_nu(omega())) == Level2Class::StarNuOfUnlimited, "starnu(omega) in the middle part");
  rep.check(partition_level2(nu2(omega())) == Level2Class::StarUnlimited, "nu2(omega) in the top part");
  return rep;
}

inline SuiteReport well_order_suite() {
  SuiteReport rep{"well-order"};
  const SeqTerm n = SeqTerm::index();
  auto c = [](long long v) { return SeqTerm::constant(v); };
  const auto nat = well_order_criterion(OrderSpec::naturals(), {nu1(0), nu1(3), omega(), Hyper1(n + c(1)),
                                                                Hyper1(c(2) * n), Hyper1(n * n)});
  for (const auto& [a, v] : nat.entries) rep.check(v.is_true(), "N: starnu(a) <= nu2(a) at a=" + a.str());
  rep.check(nat.conclusion == WellOrderReport::Conclusion::consistent, "N order judged consistent");
  rep.note(std::string("N: ") + WellOrderReport::conclusion_name(nat.conclusion));

  const Hyper1 minus_omega(c(0) - n);
  const auto integers = well_order_criterion(OrderSpec::integers(), {nu1(-2), omega(), minus_omega});
  bool witness = false;
  for (const auto& [a, v] : integers.entries)
    if (v.is_false() && fragment_equal(a.rep(), minus_omega.rep())) witness = true;
  rep.check(witness, "Z: False witness at -omega");
  rep.check(integers.conclusion == WellOrderReport::Conclusion::refuted, "Z order judged non-well-ordered");
  rep.note(std::string("Z: ") + WellOrderReport::conclusion_name(integers.conclusion));
  return rep;
}

inline SuiteReport saturation_suite(int chain_length) {
  SuiteReport rep{"saturation"};
  const SeqTerm x = SeqTerm::variable(Var::x, Sort::integer), y = SeqTerm::variable(Var::y, Sort::integer);
  const auto res = saturate_chain(BoolTerm::compare(x, Rel::gt, y), chain_length);
  rep.note("element " + res.element.str());
  for (std::size_t k = 0; k < res.verdicts.size(); ++k)
    rep.check(res.verdicts[k].is_true(), "x > " + std::to_string(k) + " holds for the element");
  rep.check(res.verdicts.size() == static_cast<std::size_t>(chain_length), "every condition was checked");
  rep.check(is_unlimited(res.element).is_true(), "the element is unlimited");
  return rep;
}

// ------------------------------------------------------------------ lr

namespace detail {

inline std::vector<std::string> names(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

inline std::string describe(const LocalRelator& lr) {
  std::string s = "|B|=" + std::to_string(lr.base_size()) + " E={";
  for (std::size_t i = 0; i < lr.index.size(); ++i) s += (i ? "," : "") + lr.index[i];
  s += "} L=";
  if (lr.L.is_principal()) {
    s += "principal(";
    bool first = true;
    for (const auto& [e, b] : lr.L.point()) {
      s += (first ? "" : ",") + e + "=" + lr.base[b];
      first = false;
    }
    return s + ")";
  }
  return s + "table";
}

}  // namespace detail

inline void roundtrip_instance(SuiteReport& rep, const LocalRelator& lr, std::size_t x_size) {
  const auto r = alpha_gamma_roundtrip_check(lr, x_size);
  rep.check(r.passed(), detail::describe(lr) + " |X|=" + std::to_string(x_size) + ": " + std::to_string(r.classes) +
                            " classes, " + std::to_string(r.alpha_gamma_fixed) + "/" +
                            std::to_string(r.gamma_alpha_fixed) + " fixed, " +
                            std::to_string(r.gamma_choice_conflicts) + " conflicts");
}

/// Every principal L with |B| ≤ max_base, 1 ≤ |E| ≤ max_index, |X| ≤
/// max_x, then table-backed copies of the same points.
inline SuiteReport roundtrip_suite(std::size_t max_base, std::size_t max_index, std::size_t max_x) {
  SuiteReport rep{"lr-roundtrip"};
  std::size_t tables = 0;
  for (std::size_t base = 1; base <= max_base; ++base)
    for (std::size_t n = 1; n <= max_index; ++n) {
      const auto bnames = detail::names("b", base), idx = detail::names("e", n);
      for (const auto& p : all_points(base, idx))
        for (std::size_t x = 1; x <= max_x; ++x) {
          roundtrip_instance(rep, LocalRelator(bnames, idx, CylUF::principal(base, p)), x);
          if (detail::int_pow(base, n) <= max_table_points) {
            roundtrip_instance(rep, LocalRelator(bnames, idx, CylUF::table_at(base, idx, p)), x);
            ++tables;
          }
        }
    }
  rep.note(std::to_string(rep.instances - tables) + " principal and " + std::to_string(tables) +
           " table-backed instances");
  return rep;
}

inline SuiteReport lr_file_suite(const LocalRelator& lr, std::size_t max_x, std::size_t max_family) {
  SuiteReport rep{"lr-run"};
  rep.note(detail::describe(lr));
  rep.note(std::string("separated: ") + (is_separated(lr) ? "yes" : "no"));
  for (std::size_t x = 1; x <= max_x; ++x) roundtrip_instance(rep, lr, x);
  const auto ex = exactness_report(lr, max_family);
  rep.note("exactness: " + std::to_string(ex.realized) + " of " + std::to_string(ex.instances) + " steps realized");
  for (const auto& u : ex.unrealized) rep.note("unrealized: " + u);
  return rep;
}

struct ExtensionTally {
  std::size_t generated = 0;
  std::size_t preconditions_held = 0;
};

/// Seeded random extension instances. L is principal or a table copy of
/// a point; U is compatible with L along η half of the time and random
/// otherwise. When the preconditions hold the step must succeed and both
/// verifications must pass; when they fail the step must refuse.
inline SuiteReport extension_suite(std::uint64_t seed, std::size_t count, const LocalRelator* fixed = nullptr,
                                   std::size_t max_base = 3, std::size_t max_index = 4, std::size_t max_family = 2) {
  SuiteReport rep{"extend"};
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  ExtensionTally tally;
  for (std::size_t t = 0; t < count; ++t) {
    std::optional<LocalRelator> made;
    if (!fixed) {
      const std::size_t base = 1 + pick(max_base), n = 1 + pick(max_index);
      const auto idx = detail::names("e", n);
      IndexPoint p;
      for (const auto& e : idx) p[e] = pick(base);
      const bool table = pick(2) == 0 && detail::int_pow(base, n) <= max_table_points;
      made.emplace(detail::names("b", base), idx, table ? CylUF::table_at(base, idx, p) : CylUF::principal(base, p));
    }
    const LocalRelator& lr = fixed ? *fixed : *made;
    const auto universe = detail::sorted_unique(lr.L.universe());
    if (universe.empty()) throw InvalidInput("extension needs an ultrafilter with a nonempty universe");
    const IndexPoint atom = lr.L.atom(universe);
    const std::size_t base = lr.base_size();

    IndexMap eta;
    IndexPoint up;
    const bool compatible = pick(2) == 0;
    const std::size_t k = pick(max_family + 1);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string i = "i" + std::to_string(j + 1);
      eta[i] = universe[pick(universe.size())];
      up[i] = compatible ? atom.at(eta[i]) : pick(base);
    }
    up["z"] = pick(base);
    const CylUF u = CylUF::principal(base, up);
    ++tally.generated;

    std::string what = detail::describe(lr) + " eta={";
    for (const auto& [i, e] : eta) what += i + "->" + e + " ";
    what += "}";
    bool held = true;
    try {
      check_compatible(lr.L, eta, u, "z");
    } catch (const IncompatibleUltrafilters&) {
      held = false;
    }
    if (!held) {
      bool refused = false;
      try {
        extend_ultrafilter_step(lr, eta, "z", u);
      } catch (const IncompatibleUltrafilters&) {
        refused = true;
      }
      rep.check(refused, what + ": incompatible U was accepted");
      continue;
    }
    ++tally.preconditions_held;
    try {
      const auto res = extend_ultrafilter_step(lr, eta, "z", u);
      rep.check(res.projects_to_L, what + ": extension does not project to L");
      rep.check(res.pulls_back_to_U, what + ": extension does not pull back to U");
      rep.check(res.lr.index.size() == lr.index.size() + 1, what + ": index set did not grow by one");
    } catch (const Error& err) {
      rep.check(false, what + ": " + err.what());
    }
  }
  rep.details.insert(rep.details.begin(), std::to_string(tally.generated) + " instances, " +
                                              std::to_string(tally.preconditions_held) + " with preconditions holding");
  return rep;
}

// --------------------------------------------------------------- stone

inline SuiteReport stone_suite(std::size_t max_set, std::size_t max_dual, std::size_t max_beta) {
  SuiteReport rep{"stone"};
  for (std::size_t n = 0; n <= max_set; ++n) {
    const auto brute = brute_force_ultrafilters(n);
    const auto listed = enumerate_ultrafilters(n);
    std::set<SetFamily> a(brute.begin(), brute.end()), b;
    for (auto p : listed) b.insert(principal_family(n, p));
    rep.check(listed.size() == n && a == b, "|A|=" + std::to_string(n) + ": " + std::to_string(listed.size()) +
                                                " listed, " + std::to_string(brute.size()) + " found by search");
  }
  for (std::size_t n = 0; n <= max_dual; ++n) {
    const auto d = dual_span_check(n, max_dual);
    rep.check(d.full_rank() && d.homomorphisms,
              "|B|=" + std::to_string(n) + ": evaluation functionals have rank " + std::to_string(d.rank));
  }
  for (std::size_t a = 0; a <= max_beta; ++a)
    for (std::size_t b = 0; b <= max_beta; ++b)
      rep.check(beta_product_compare(a, b).bijective(),
                "beta(" + std::to_string(a) + "x" + std::to_string(b) + ") -> beta(A) x beta(B) is not bijective");
  return rep;
}

}  // namespace nsa
