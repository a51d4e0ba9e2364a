#include <gtest/gtest.h>

#include <random>

#include "nsa/stone.hpp"

using namespace nsa;

TEST(Stone, UltrafilterCounts) {
  EXPECT_EQ(enumerate_ultrafilters(3).size(), 3u);
  EXPECT_EQ(enumerate_ultrafilters(1).size(), 1u);
  for (std::size_t n = 0; n <= 4; ++n) {
    auto brute = brute_force_ultrafilters(n);
    auto listed = enumerate_ultrafilters(n);
    ASSERT_EQ(brute.size(), listed.size()) << n;
    std::set<SetFamily> a(brute.begin(), brute.end()), b;
    for (auto p : listed) b.insert(principal_family(n, p));
    EXPECT_EQ(a, b);
  }
  EXPECT_THROW(brute_force_ultrafilters(5), InvalidInput);
}

TEST(Stone, BetaProduct) {
  auto two = beta_product_compare(2, 2);
  EXPECT_TRUE(two.bijective());
  EXPECT_EQ(two.domain, 4u);
  EXPECT_TRUE(beta_product_compare(1, 3).bijective());
  auto r = beta_product_compare(3, 2);
  EXPECT_EQ(r.domain, 6u);
  EXPECT_EQ(r.codomain, 6u);
  for (std::size_t a = 0; a <= 3; ++a)
    for (std::size_t b = 0; b <= 3; ++b) EXPECT_TRUE(beta_product_compare(a, b).bijective()) << a << "x" << b;
}

TEST(Stone, DualSpan) {
  EXPECT_EQ(dual_span_check(3).rank, 3u);
  EXPECT_EQ(dual_span_check(1).rank, 1u);
  for (std::size_t n = 0; n <= 6; ++n) {
    auto rep = dual_span_check(n);
    EXPECT_TRUE(rep.full_rank());
    EXPECT_TRUE(rep.homomorphisms);
  }
  EXPECT_THROW(dual_span_check(7), InvalidInput);
}

TEST(GF2, AnnihilatorExamples) {
  auto m = GF2Matrix::from_rows({{1, 0, 0}, {0, 1, 0}});
  auto w = annihilator_witness(m);
  ASSERT_TRUE(w);
  EXPECT_EQ(*w, (GF2Vector{0, 0, 1}));
  EXPECT_FALSE(annihilator_witness(GF2Matrix::from_rows({{1, 1, 0}, {0, 1, 0}, {1, 1, 1}})));
}

TEST(GF2, RankExamples) {
  EXPECT_EQ(GF2Matrix::from_rows({{1, 1}, {1, 1}}).rank(), 1u);
  EXPECT_EQ(GF2Matrix(3, 4).rank(), 0u);
  EXPECT_EQ(GF2Matrix::from_rows({{1, 0, 1}, {0, 1, 1}, {1, 1, 0}}).rank(), 2u);
}

// Property: on random rank-deficient 5×5 matrices the witness is nonzero and
// annihilates every row, and rank + kernel dimension = 5.
TEST(GF2Property, WitnessAnnihilates) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<GF2Vector> rows(5, GF2Vector(5));
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 5; ++c) rows[r][c] = rng() % 2;
    const std::size_t a = rng() % 4, b = rng() % 4;
    for (std::size_t c = 0; c < 5; ++c) rows[4][c] = rows[a][c] != rows[b][c];
    std::shuffle(rows.begin(), rows.end(), rng);
    auto m = GF2Matrix::from_rows(rows);
    ASSERT_LT(m.rank(), 5u);
    auto w = annihilator_witness(m);
    ASSERT_TRUE(w);
    EXPECT_NE(std::count(w->begin(), w->end(), true), 0);
    for (bool bit : m.multiply(*w)) EXPECT_FALSE(bit);
    EXPECT_EQ(m.rank() + m.kernel_basis().size(), 5u);
  }
}
