#pragma once

// Seeded random term generators for the property tests.

#include <random>

#include "nsa/term.hpp"

namespace nsa::testgen {

class TermGen {
public:
  explicit TermGen(std::uint64_t seed, std::vector<Var> leaves = {Var::n}) : rng_(seed), leaves_(std::move(leaves)) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Integer-sorted polynomial-ish terms with occasional mod/piecewise.
  SeqTerm int_term(int depth) {
    if (depth == 0 || pick(0, 3) == 0) {
      if (pick(0, 1)) return leaf();
      return SeqTerm::constant(pick(-6, 6));
    }
    switch (pick(0, 5)) {
      case 0: return int_term(depth - 1) + int_term(depth - 1);
      case 1: return int_term(depth - 1) - int_term(depth - 1);
      case 2: return int_term(depth - 1) * int_term(depth - 1);
      case 3: return SeqTerm::mod(int_term(depth - 1), pick(1, 4));
      case 4: {
        std::vector<SeqTerm> bs;
        int p = pick(1, 3);
        for (int i = 0; i < p; ++i) bs.push_back(int_term(depth - 1));
        return SeqTerm::piecewise(leaves_[static_cast<std::size_t>(pick(0, static_cast<int>(leaves_.size()) - 1))],
                                  std::move(bs));
      }
      default: return leaf() * SeqTerm::constant(pick(-3, 3));
    }
  }

  /// Rational terms: integer terms divided by (n + c) now and then.
  SeqTerm rat_term(int depth) {
    SeqTerm t = int_term(depth);
    if (pick(0, 2) == 0) t = t / (leaf() + SeqTerm::constant(pick(1, 4)));
    return t;
  }

  Rel rel() { return static_cast<Rel>(pick(0, 5)); }

  BoolTerm bool_term(int depth) {
    if (depth == 0 || pick(0, 2) == 0) return BoolTerm::compare(rat_term(2), rel(), rat_term(2));
    switch (pick(0, 2)) {
      case 0: return !bool_term(depth - 1);
      case 1: return bool_term(depth - 1) && bool_term(depth - 1);
      default: return bool_term(depth - 1) || bool_term(depth - 1);
    }
  }

  SeqTerm leaf() {
    Var v = leaves_[static_cast<std::size_t>(pick(0, static_cast<int>(leaves_.size()) - 1))];
    return SeqTerm::variable(v, Sort::integer);
  }

private:
  std::mt19937_64 rng_;
  std::vector<Var> leaves_;
};

}  // namespace nsa::testgen
