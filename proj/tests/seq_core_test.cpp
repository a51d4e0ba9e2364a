#include <gtest/gtest.h>

#include <cstdint>

#include "generators.hpp"
#include "nsa/seq_core.hpp"

using namespace nsa;

namespace {

SeqTerm n() { return SeqTerm::index(); }
SeqTerm c(long long v) { return SeqTerm::constant(v); }
SeqTerm q(long long p, long long d) { return SeqTerm::constant(Rational(p, d)); }

}  // namespace

TEST(EvalAt, DirectArithmetic) {
  EXPECT_EQ(eval_at(n() * n() + c(1), 3), Rational(10));
  EXPECT_EQ(eval_at(c(7), 100), Rational(7));
  EXPECT_EQ(eval_at(c(1) / (n() + c(1)), 4), Rational(1, 5));
}

TEST(EvalAt, DivisionByZeroCarriesIndex) {
  auto t = c(1) / (n() - c(3));
  try {
    eval_at(t, 3);
    FAIL() << "expected DivisionByZeroAt";
  } catch (const DivisionByZeroAt& e) {
    EXPECT_EQ(e.index(), 3);
  }
  EXPECT_EQ(eval_at(t, 4), Rational(1));
}

TEST(SeqTerm, ConstructionChecks) {
  EXPECT_THROW(c(1) / (n() - n()), UnsupportedTerm);
  // Vanishes on the even residues only: still rejected.
  EXPECT_THROW(c(1) / SeqTerm::mod(n(), 2), UnsupportedTerm);
  EXPECT_THROW(SeqTerm::mod(c(1) / (n() + c(1)), 2), SortError);
  EXPECT_THROW(SeqTerm::mod(n(), 0), SortError);
  EXPECT_EQ((n() - c(1)).sort(), Sort::integer);
  EXPECT_EQ((n() * n()).sort(), Sort::nat);
  EXPECT_EQ((c(1) / (n() + c(1))).sort(), Sort::rational);
}

TEST(NormalForm, CanonicalFormsMatchFragmentEquality) {
  EXPECT_TRUE(fragment_equal((n() + c(1)) * (n() + c(1)), n() * n() + c(2) * n() + c(1)));
  EXPECT_TRUE(fragment_equal((n() * n() - c(1)) / (n() - c(1)), n() + c(1)));
  EXPECT_FALSE(fragment_equal(n(), n() + c(1)));
  // mod 4 then mod 2 has least period 2.
  auto f = normalize(SeqTerm::mod(SeqTerm::mod(n(), 4), 2));
  EXPECT_EQ(f.period(Var::n), 2u);
  EXPECT_TRUE(fragment_equal(SeqTerm::mod(SeqTerm::mod(n(), 4), 2), SeqTerm::mod(n(), 2)));
  // piecewise with equal branches collapses.
  auto g = normalize(SeqTerm::piecewise(Var::n, {n(), n(), n()}));
  EXPECT_EQ(g.period(Var::n), 1u);
  // mod of a degree-2 polynomial: n^2 mod 2 == n mod 2.
  EXPECT_TRUE(fragment_equal(SeqTerm::mod(n() * n(), 2), SeqTerm::mod(n(), 2)));
}

TEST(NormalForm, AgreesWithDirectEvaluation) {
  testgen::TermGen gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    SeqTerm t = gen.rat_term(3);
    NormalForm f = normalize(t);
    for (long long i = 0; i < 40; ++i) {
      Point p{};
      p[0] = Rational(i);
      auto nf = f.evaluate(p);
      std::optional<Rational> direct;
      try {
        direct = t.evaluate(p);
      } catch (const DivisionByZeroAt&) {
      }
      if (direct && nf) EXPECT_EQ(*direct, *nf) << t.str() << " at " << i;
    }
  }
}

TEST(Classify, Forced) {
  auto cls = classify_truth_set(BoolTerm::compare(n(), Rel::gt, c(5)));
  EXPECT_EQ(cls.kind, TruthSetClass::Kind::cofinite);
  EXPECT_EQ(cls.indices, (std::vector<long long>{0, 1, 2, 3, 4, 5}));
}

TEST(Classify, ParityIsPeriodicFromZero) {
  // Oracle: direct evaluation of the first 2·p·(degree+1) = 8 indices.
  const std::uint32_t p = 2;
  std::vector<bool> oracle;
  for (long long i = 0; i < 8; ++i) oracle.push_back(i % 2 == 0);
  for (long long i = p; i < 8; ++i) ASSERT_EQ(oracle[i], oracle[i - p]);

  auto cls = classify_truth_set(BoolTerm::compare(SeqTerm::mod(n(), 2), Rel::eq, c(0)));
  ASSERT_EQ(cls.kind, TruthSetClass::Kind::periodic_tail);
  EXPECT_EQ(cls.period, p);
  EXPECT_EQ(cls.residues, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(cls.onset, 0);
  for (long long i = 0; i < 8; ++i) EXPECT_EQ(cls.contains(i), oracle[i]);
}

TEST(Classify, QuadraticBeatsLinearAfterThousand) {
  // Oracle: brute force n <= 1001 in machine integers.
  std::vector<long long> fails;
  for (std::int64_t i = 0; i <= 1001; ++i)
    if (!(i * i > 1000 * i)) fails.push_back(i);
  ASSERT_EQ(fails.size(), 1001u);
  ASSERT_EQ(fails.back(), 1000);

  auto cls = classify_truth_set(BoolTerm::compare(n() * n(), Rel::gt, c(1000) * n()));
  ASSERT_EQ(cls.kind, TruthSetClass::Kind::cofinite);
  EXPECT_EQ(cls.indices, fails);
}

TEST(Classify, PolesAreOutsideTheTruthSet) {
  // 1/(n-2) > 0 is false at the pole n = 2 and for n < 2.
  auto cls = classify_truth_set(BoolTerm::compare(c(1) / (n() - c(2)), Rel::gt, c(0)));
  ASSERT_EQ(cls.kind, TruthSetClass::Kind::cofinite);
  EXPECT_EQ(cls.indices, (std::vector<long long>{0, 1, 2}));
}

TEST(Classify, RejectsOtherVariables) {
  auto b = BoolTerm::compare(SeqTerm::variable(Var::m), Rel::lt, n());
  EXPECT_THROW(classify_truth_set(b), UnsupportedTerm);
}

TEST(Compare, Examples) {
  EXPECT_EQ(compare_mod_frechet(n(), c(1000), Rel::lt).kind, VerdictKind::False);
  EXPECT_EQ(compare_mod_frechet(n() + c(1), n() + c(1), Rel::eq).kind, VerdictKind::True);
  auto v = compare_mod_frechet(SeqTerm::mod(n(), 2), c(0), Rel::eq);
  EXPECT_EQ(v.kind, VerdictKind::Undetermined);
  EXPECT_EQ(v.evidence.kind, TruthSetClass::Kind::periodic_tail);
  EXPECT_EQ(v.evidence.period, 2u);
}

TEST(Compare, InfinitesimalIsBelowEveryStandardPositive) {
  auto eps = c(1) / (n() + c(1));
  for (long long d : {1, 10, 1000})
    EXPECT_TRUE(compare_mod_frechet(eps, q(1, d), Rel::lt).is_true());
  EXPECT_TRUE(compare_mod_frechet(eps, c(0), Rel::gt).is_true());
}

// Property: classification matches brute-force evaluation on the first
// 10·bound indices, and the tail is periodic with the claimed period.
TEST(ClassifyProperty, MatchesBruteForce) {
  testgen::TermGen gen(2024);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    BoolTerm b = gen.bool_term(2);
    TruthSetClass cls;
    try {
      cls = classify_truth_set(b);
    } catch (const UnsupportedTerm&) {
      continue;
    }
    if (cls.kind == TruthSetClass::Kind::unknown) continue;
    long long limit = std::max<long long>(10 * cls.bound, 60);
    limit = std::min<long long>(limit, 20000);
    for (long long i = 0; i < limit; ++i) ASSERT_EQ(cls.contains(i), b.evaluate_at(i)) << b.str() << " at " << i;
    ++checked;
  }
  EXPECT_GT(checked, 300);
}

TEST(ClassifyProperty, CongruenceAndNegation) {
  testgen::TermGen gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    SeqTerm a = gen.rat_term(2), other = gen.rat_term(2);
    // a + 0 and (a * 2) / 2 are fragment-equal rewrites of a.
    SeqTerm a2 = (a * c(2)) / c(2) + (n() - n());
    ASSERT_TRUE(fragment_equal(a, a2));
    Rel r = gen.rel();
    Verdict v1 = compare_mod_frechet(a, other, r), v2 = compare_mod_frechet(a2, other, r);
    EXPECT_EQ(v1.kind, v2.kind);

    BoolTerm b = BoolTerm::compare(a, r, other);
    Verdict vb = decide(b), vn = decide(!b);
    if (vb.kind == VerdictKind::True) EXPECT_EQ(vn.kind, VerdictKind::False);
    if (vb.kind == VerdictKind::False) EXPECT_EQ(vn.kind, VerdictKind::True);
    if (vb.kind == VerdictKind::Undetermined) {
      ASSERT_EQ(vn.kind, VerdictKind::Undetermined);
      if (vb.evidence.kind == TruthSetClass::Kind::periodic_tail) {
        EXPECT_EQ(vb.evidence.period, vn.evidence.period);
        std::vector<std::uint32_t> complement;
        for (std::uint32_t i = 0; i < vb.evidence.period; ++i)
          if (!std::binary_search(vb.evidence.residues.begin(), vb.evidence.residues.end(), i))
            complement.push_back(i);
        EXPECT_EQ(vn.evidence.residues, complement);
      }
    }
  }
}

TEST(ClassifyProperty, PropositionalOperations) {
  testgen::TermGen gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    BoolTerm a = gen.bool_term(1), b = gen.bool_term(1);
    Verdict va = decide(a), vb = decide(b);
    if (va.is_true() && vb.is_true()) EXPECT_TRUE(decide(a && b).is_true());
    if (va.is_true() || vb.is_true()) EXPECT_TRUE(decide(a || b).is_true());
    if (va.is_false() || vb.is_false()) EXPECT_TRUE(decide(a && b).is_false());
    if (va.is_false() && vb.is_false()) EXPECT_TRUE(decide(a || b).is_false());
  }
}
