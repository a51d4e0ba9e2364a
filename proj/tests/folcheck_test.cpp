#include <gtest/gtest.h>

#include <random>

#include "nsa/folcheck.hpp"

using namespace nsa;

namespace {

FiniteModel order_model(bool strict) {
  FiniteModel m;
  m.add_carrier("A", {"0", "1"});
  std::set<Tuple> r;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      if (strict ? i < j : i <= j) r.insert({i, j});
  m.add_relation(strict ? "<" : "<=", {"A", "A"}, r);
  return m;
}

// Plain recursive interpreter used as the oracle for the compiled evaluator.
bool naive_eval(const FiniteModel& m, const Formula& f, std::map<std::string, std::size_t>& env) {
  using K = Formula::Kind;
  auto val = [&](const FTerm& t) { return env.at(t.name); };
  switch (f.kind) {
    case K::truth: return true;
    case K::falsity: return false;
    case K::relation: {
      Tuple t;
      for (const auto& a : f.terms) t.push_back(val(a));
      return m.relations.at(f.name).tuples.count(t) > 0;
    }
    case K::equal: return val(f.terms[0]) == val(f.terms[1]);
    case K::not_: return !naive_eval(m, f.subs[0], env);
    case K::and_: {
      bool r = true;
      for (const auto& s : f.subs) r = naive_eval(m, s, env) && r;
      return r;
    }
    case K::or_: {
      bool r = false;
      for (const auto& s : f.subs) r = naive_eval(m, s, env) || r;
      return r;
    }
    case K::implies: return !naive_eval(m, f.subs[0], env) || naive_eval(m, f.subs[1], env);
    case K::forall:
    case K::exists: {
      auto saved = env.count(f.name) ? std::optional(env[f.name]) : std::nullopt;
      std::size_t hits = 0, size = m.size(f.sort);
      for (std::size_t v = 0; v < size; ++v) {
        env[f.name] = v;
        hits += naive_eval(m, f.subs[0], env);
      }
      if (saved)
        env[f.name] = *saved;
      else
        env.erase(f.name);
      return f.kind == K::forall ? hits == size : hits > 0;
    }
  }
  return false;
}

Formula random_formula(std::mt19937& rng, int depth, std::vector<std::string> scope) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  if (depth == 0 || pick(4) == 0) {
    if (scope.empty()) return pick(2) ? Formula::truth() : Formula::falsity();
    auto v = [&] { return FTerm::var(scope[pick(scope.size())]); };
    if (pick(3) == 0) return Formula::eq(v(), v());
    return Formula::rel("R", {v(), v()});
  }
  switch (pick(6)) {
    case 0: return Formula::negation(random_formula(rng, depth - 1, scope));
    case 1: return Formula::conj({random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope)});
    case 2: return Formula::disj({random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope)});
    case 3: return Formula::implies(random_formula(rng, depth - 1, scope), random_formula(rng, depth - 1, scope));
    default: {
      std::string v = "v" + std::to_string(pick(3));
      scope.push_back(v);
      Formula body = random_formula(rng, depth - 1, scope);
      return pick(2) ? Formula::forall(v, "A", body) : Formula::exists(v, "A", body);
    }
  }
}

}  // namespace

TEST(Formula, ParseExamples) {
  auto f = parse_formula("(exists (x A) (forall (y A) (<= x y)))");
  EXPECT_EQ(f.quantifier_depth(), 2);
  EXPECT_TRUE(f.is_sentence());
  auto g = parse_formula("(and (R x y) (not (= x y)))");
  EXPECT_EQ(g.free_variables(), (std::set<std::string>{"x", "y"}));
  EXPECT_EQ(g.quantifier_depth(), 0);
  EXPECT_THROW(parse_formula("(exists (x A) (Q x"), SyntaxError);
  EXPECT_EQ(parse_formula(f.str()), f);
}

TEST(Formula, SortErrorsWithSignature) {
  Signature sig;
  sig.sorts = {"A", "B"};
  sig.relations["R"] = {"A", "B"};
  EXPECT_NO_THROW(parse_formula("(forall (x A) (exists (y B) (R x y)))", &sig));
  try {
    parse_formula("(forall (x A) (R x x))", &sig);
    FAIL();
  } catch (const SortError& e) {
    EXPECT_EQ(e.variable(), "x");
  }
  EXPECT_THROW(parse_formula("(forall (x C) true)", &sig), SortError);
  EXPECT_THROW(parse_formula("(S x)", &sig), SortError);
  EXPECT_THROW(parse_formula("(R x)", &sig), SyntaxError);
}

TEST(Folcheck, EvalExamples) {
  EXPECT_TRUE(eval_standard(order_model(false), parse_formula("(exists (x A) (forall (y A) (<= x y)))")));
  EXPECT_FALSE(eval_standard(order_model(true), parse_formula("(exists (x A) (< x x))")));
  FiniteModel empty;
  empty.add_empty_carrier("A");
  EXPECT_FALSE(eval_standard(empty, parse_formula("(exists (x A) true)")));
  EXPECT_TRUE(eval_standard(empty, parse_formula("(forall (x A) false)")));
  EXPECT_TRUE(eval_standard(order_model(true), parse_formula("(< x y)"), {{"x", "0"}, {"y", "1"}}));
  EXPECT_THROW(eval_standard(order_model(true), parse_formula("(exists (x A) (Q x))")), SignatureMismatch);
  EXPECT_THROW(eval_standard(order_model(true), parse_formula("(exists (x B) true)")), SignatureMismatch);
}

TEST(Folcheck, FunctionsAndConstants) {
  auto m = parse_model("(model (carrier A a b c) (relation P (A) (a)) (function f (A) A (a b) (b c) (c a)))");
  EXPECT_TRUE(eval_standard(m, parse_formula("(= (f (f (f (const a)))) (const a))")));
  EXPECT_TRUE(eval_standard(m, parse_formula("(forall (x A) (not (= (f x) x)))")));
  EXPECT_TRUE(eval_standard(m, parse_formula("(P (f (f (const b))))")));
  auto r = check_transfer(m, 3, 1, parse_formula("(exists (x A) (and (P x) (= (f x) (const b))))"));
  EXPECT_TRUE(r.standard);
  EXPECT_TRUE(r.agree());
}

TEST(Folcheck, ModelFileErrors) {
  EXPECT_THROW(parse_model("(model (carrier A a) (relation R (A) (b)))"), SyntaxError);
  EXPECT_THROW(parse_model("(model (carrier A a b) (function f (A) A (a b)))"), SyntaxError);
  EXPECT_THROW(parse_model("(model (carrier A a a))"), SyntaxError);
  auto m = parse_model("(model (carrier E) (relation R (E E)))");
  EXPECT_EQ(m.size("E"), 0u);
  FiniteModel bad;
  bad.carriers["A"] = {};
  EXPECT_THROW(bad.validate(), SignatureMismatch);
  EXPECT_THROW(FiniteModel().add_carrier("A", std::vector<std::string>{}), InvalidInput);
}

TEST(Folcheck, UltrapowerQuotient) {
  FiniteModel m;
  m.add_carrier("A", 2);
  m.add_relation("L", {"A", "A"}, {{0, 0}, {0, 1}, {1, 1}});
  for (std::size_t s0 = 0; s0 < 3; ++s0) {
    auto u = build_finite_ultrapower(m, 3, s0);
    ASSERT_EQ(u.model.size("A"), 2u);
    // Oracle: group the 8 families by their value at s0.
    std::map<std::size_t, std::set<Tuple>> groups;
    for (const auto& fam : all_tuples({2, 2, 2})) groups[fam[s0]].insert(fam);
    EXPECT_EQ(groups.size(), 2u);
    for (const auto& fam : all_tuples({2, 2, 2}))
      EXPECT_EQ(u.representatives["A"][u.class_of("A", fam)][s0], fam[s0]);
    for (const auto& [c1, c2] : std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}) {
      const bool lifted = u.model.relations["L"].tuples.count({c1, c2}) > 0;
      EXPECT_EQ(lifted, u.representatives["A"][c1][s0] <= u.representatives["A"][c2][s0]);
    }
    std::set<std::size_t> image(u.nu["A"].begin(), u.nu["A"].end());
    EXPECT_EQ(image.size(), 2u);
  }
  EXPECT_THROW(build_finite_ultrapower(m, 2, 2), InvalidInput);
}

TEST(Folcheck, TransferExamples) {
  FiniteModel one;
  one.add_carrier("A", {"a"});
  auto r = check_transfer(one, 3, 2, parse_formula("(exists (x A) (not (= x (const a))))"));
  EXPECT_FALSE(r.standard);
  EXPECT_FALSE(r.star);
  auto t = check_transfer(order_model(true), 2, 0, parse_formula("(forall (x A) (or (< x x) (not (< x x))))"));
  EXPECT_TRUE(t.standard);
  EXPECT_TRUE(t.star);
  EXPECT_THROW(check_transfer(one, 2, 0, parse_formula("(= x x)")), InvalidInput);
}

TEST(Folcheck, FunctorLawExamples) {
  auto rep = check_functor_laws(2, 1, 2);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.laws["product"].instances, 9u);

  FiniteModel m;
  m.add_carrier("A", 2).add_carrier("B", 2).add_carrier("P", 4);
  m.add_function("p1", {"P"}, "A", {{{0}, 0}, {{1}, 0}, {{2}, 1}, {{3}, 1}});
  m.add_function("p2", {"P"}, "B", {{{0}, 0}, {{1}, 1}, {{2}, 0}, {{3}, 1}});
  auto u = build_finite_ultrapower(m, 2, 0);
  EXPECT_EQ(u.model.size("P"), 4u);
  EXPECT_EQ(u.model.size("A") * u.model.size("B"), 4u);
}

TEST(Folcheck, EqualizerCorners) {
  // Constant maps to different points: the equalizer is empty, and so is its *.
  FiniteModel m;
  m.add_carrier("C", 3).add_carrier("D", 2).add_empty_carrier("E");
  m.add_function("f1", {"C"}, "D", {{{0}, 0}, {{1}, 0}, {{2}, 0}});
  m.add_function("f2", {"C"}, "D", {{{0}, 1}, {{1}, 1}, {{2}, 1}});
  m.add_function("i", {"E"}, "C", {});
  auto u = build_finite_ultrapower(m, 3, 1);
  EXPECT_EQ(u.model.size("E"), 0u);
  // f with itself: every element of *C is equalized.
  auto same = build_finite_ultrapower(m, 3, 1);
  std::size_t hits = 0;
  for (std::size_t x = 0; x < same.model.size("C"); ++x)
    hits += same.model.functions["f1"].graph.at({x}) == same.model.functions["f1"].graph.at({x});
  EXPECT_EQ(hits, same.model.size("C"));
}

TEST(Folcheck, ExistsCommutationExamples) {
  FiniteModel m;
  m.add_carrier("A", 3);
  m.add_relation("Eq", {"A", "A"}, {{0, 0}, {1, 1}, {2, 2}});
  m.add_relation("None", {"A", "A"}, {});
  auto eq = check_exists_commutation(m, 3, 0, "Eq");
  EXPECT_TRUE(eq.passed());
  EXPECT_EQ(eq.lhs.size(), 3u);
  auto none = check_exists_commutation(m, 3, 0, "None");
  EXPECT_TRUE(none.passed());
  EXPECT_TRUE(none.lhs.empty());
  EXPECT_TRUE(none.rhs.empty());
  EXPECT_THROW(check_exists_commutation(m, 3, 0, "Missing"), SignatureMismatch);
}

// Property: random relations over A1 × A2 with |A1| = |A2| = 3, and random
// ternary ones with an empty first factor, commute with ∃.
TEST(FolcheckProperty, ExistsCommutationRandom) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    FiniteModel m;
    m.add_carrier("A", 3).add_carrier("B", 3);
    std::set<Tuple> r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (rng() % 3 == 0) r.insert({i, j});
    m.add_relation("R", {"A", "B"}, r);
    const std::size_t s = 1 + rng() % 3;
    auto rep = check_exists_commutation(m, s, rng() % s, "R");
    EXPECT_TRUE(rep.passed());
    // Oracle: the projection of R, read through ν.
    std::set<std::size_t> proj;
    for (const auto& t : r) proj.insert(t[1]);
    EXPECT_EQ(rep.lhs.size(), proj.size());
  }
  FiniteModel m;
  m.add_empty_carrier("E").add_carrier("A", 2);
  m.add_relation("R", {"E", "A", "A"}, {});
  EXPECT_TRUE(check_exists_commutation(m, 2, 1, "R").passed());
}

// Property: the compiled evaluator agrees with a plain interpreter.
TEST(FolcheckProperty, CompiledMatchesInterpreter) {
  std::mt19937 rng(5);
  auto models = battery_models(2);
  const Signature sig = battery_signature();
  for (int trial = 0; trial < 400; ++trial) {
    Formula f = random_formula(rng, 4, {});
    const auto& m = models[rng() % models.size()];
    std::map<std::string, std::size_t> env;
    EXPECT_EQ(CompiledFormula(f, sig).evaluate(ModelTables(m, sig), {}), naive_eval(m, f, env)) << f.str();
  }
}

TEST(FolcheckProperty, StarOfEmptyAndNonempty) {
  for (std::size_t a = 0; a <= 3; ++a)
    for (std::size_t s = 1; s <= 3; ++s)
      for (std::size_t p = 0; p < s; ++p) {
        FiniteModel m;
        m.add_carrier("A", a);
        auto u = build_finite_ultrapower(m, s, p);
        EXPECT_EQ(u.model.size("A") == 0, a == 0);
        EXPECT_EQ(u.model.size("A"), a);
      }
}

TEST(FolcheckProperty, DiagonalAndMonotone) {
  auto rep = check_functor_laws_all(3, 3);
  EXPECT_EQ(rep.laws["diagonal"].failures, 0u);
  EXPECT_EQ(rep.laws["monotone"].failures, 0u);
  EXPECT_GT(rep.laws["monotone"].instances, 0u);
  EXPECT_TRUE(rep.passed()) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(Battery, MatrixCounts) {
  std::vector<Formula> atoms;
  for (std::size_t i = 0; i < 5; ++i) atoms.push_back(detail::battery_atom(i));
  EXPECT_EQ(detail::distinct_matrices(atoms, 3).size(), 2942u);
  EXPECT_EQ(detail::distinct_matrices({atoms[2], atoms[4]}, 3).size(), 15u);
  auto battery = transfer_battery();
  EXPECT_EQ(battery.size(), 12372u);
  for (const auto& s : battery) {
    EXPECT_TRUE(s.is_sentence());
    EXPECT_LE(s.quantifier_depth(), 2);
  }
  EXPECT_EQ(battery_models(3).size(), 531u);
}

TEST(Battery, SmallTransferRun) {
  auto rep = run_transfer_battery(battery_models(2), transfer_battery(), 2);
  EXPECT_TRUE(rep.passed());
  EXPECT_GT(rep.empty_carrier_instances, 0u);
}

// The harness notices a broken lifting: flipping one lifted tuple makes some
// battery sentence disagree.
TEST(Battery, DetectsTamperedUltrapower) {
  FiniteModel m;
  m.add_carrier("A", 2);
  m.add_relation("R", {"A", "A"}, {{0, 1}});
  auto u = build_finite_ultrapower(m, 2, 0);
  u.model.relations["R"].tuples.insert({1, 1});
  const Signature sig = battery_signature();
  const ModelTables standard(m, sig), star(u.model, sig);
  std::size_t disagreements = 0;
  for (const auto& s : transfer_battery()) disagreements += !transfer_values(CompiledFormula(s, sig), m, standard, u, star).agree();
  EXPECT_GT(disagreements, 0u);
}
