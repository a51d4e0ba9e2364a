#pragma once

// Ultrafilters on finite sets, the β comparison for products, and linear
// algebra over GF(2).
//
// On a finite set every ultrafilter is principal, and β(A×B) → βA × βB is a
// bijection; the interesting behaviour of both only appears for infinite
// sets. What survives at finite size is checked here exhaustively, along with
// the linear-algebra step: the evaluation functionals span the dual of 2^B,
// and a proper subspace has a nonzero annihilating vector.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsa/error.hpp"

namespace nsa {

// ------------------------------------------------------------ ultrafilters

/// A family of subsets of an n-element set, as membership by subset mask.
using SetFamily = std::vector<bool>;

inline SetFamily principal_family(std::size_t n, std::size_t point) {
  if (point >= n) throw InvalidInput("point outside the set");
  SetFamily f(std::size_t{1} << n);
  for (std::size_t m = 0; m < f.size(); ++m) f[m] = (m >> point) & 1;
  return f;
}

/// The ultrafilters on an n-element set, one per point.
inline std::vector<std::size_t> enumerate_ultrafilters(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < n; ++a) out.push_back(a);
  return out;
}

inline bool is_proper_filter(const SetFamily& f) {
  const std::size_t full = f.size() - 1;
  if (f[0] || !f[full]) return false;
  for (std::size_t a = 0; a <= full; ++a) {
    if (!f[a]) continue;
    for (std::size_t b = 0; b <= full; ++b) {
      if (f[b] && !f[a & b]) return false;
      if ((a & b) == a && !f[b]) return false;
    }
  }
  return true;
}

/// All maximal proper filters on an n-element set, found by searching every
/// family of subsets (n ≤ 4).
inline std::vector<SetFamily> brute_force_ultrafilters(std::size_t n) {
  if (n > 4) throw InvalidInput("brute-force filter search is limited to sets of size 4");
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<SetFamily> filters;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << subsets); ++code) {
    SetFamily f(subsets);
    for (std::size_t m = 0; m < subsets; ++m) f[m] = (code >> m) & 1;
    if (is_proper_filter(f)) filters.push_back(std::move(f));
  }
  std::vector<SetFamily> maximal;
  for (const auto& f : filters) {
    bool dominated = false;
    for (const auto& g : filters) {
      if (g == f) continue;
      bool contains = true;
      for (std::size_t m = 0; m < subsets && contains; ++m)
        if (f[m] && !g[m]) contains = false;
      if (contains) {
        dominated = true;
        break;
      }
    }
    if (!dominated) maximal.push_back(f);
  }
  return maximal;
}

struct BetaProductReport {
  std::size_t domain = 0;    // |β(A×B)|
  std::size_t codomain = 0;  // |βA × βB|
  bool injective = false;
  bool surjective = false;
  bool bijective() const noexcept { return injective && surjective; }
};

/// The map β(A×B) → βA × βB sending U to its two projections, each read off
/// as the point whose singleton the pushed family contains.
inline BetaProductReport beta_product_compare(std::size_t a, std::size_t b) {
  if (a * b > 16) throw InvalidInput("product too large for subset enumeration");
  BetaProductReport rep;
  const std::size_t n = a * b;
  auto push = [&](const SetFamily& u, bool first) {
    const std::size_t side = first ? a : b;
    std::optional<std::size_t> point;
    for (std::size_t x = 0; x < side; ++x) {
      std::size_t preimage = 0;
      for (std::size_t p = 0; p < n; ++p)
        if ((first ? p / b : p % b) == x) preimage |= std::size_t{1} << p;
      if (u[preimage]) point = x;
    }
    if (!point) throw InvalidInput("pushed family contains no singleton");
    return *point;
  };
  std::set<std::pair<std::size_t, std::size_t>> image;
  const auto points = enumerate_ultrafilters(n);
  for (auto p : points) {
    const SetFamily u = principal_family(n, p);
    image.insert({push(u, true), push(u, false)});
  }
  rep.domain = points.size();
  rep.codomain = enumerate_ultrafilters(a).size() * enumerate_ultrafilters(b).size();
  rep.injective = image.size() == rep.domain;
  rep.surjective = image.size() == rep.codomain;
  return rep;
}

// ---------------------------------------------------------------- GF(2)

using GF2Vector = std::vector<bool>;

class GF2Matrix {
public:
  GF2Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), bits_(rows, GF2Vector(cols)) {}

  static GF2Matrix from_rows(const std::vector<GF2Vector>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    GF2Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) throw InvalidInput("rows of different lengths");
      m.bits_[r] = rows[r];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool get(std::size_t r, std::size_t c) const { return bits_.at(r).at(c); }
  void set(std::size_t r, std::size_t c, bool v) { bits_.at(r).at(c) = v; }
  const GF2Vector& row(std::size_t r) const { return bits_.at(r); }

  /// M·w.
  GF2Vector multiply(const GF2Vector& w) const {
    if (w.size() != cols_) throw InvalidInput("vector length does not match the column count");
    GF2Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      bool acc = false;
      for (std::size_t c = 0; c < cols_; ++c) acc ^= bits_[r][c] && w[c];
      out[r] = acc;
    }
    return out;
  }

  /// Reduced row echelon form, pivots taken leftmost-first and the
  /// lowest available row; returns the pivot columns.
  std::vector<std::size_t> reduce() {
    std::vector<std::size_t> pivots;
    std::size_t next = 0;
    for (std::size_t c = 0; c < cols_ && next < rows_; ++c) {
      std::size_t p = next;
      while (p < rows_ && !bits_[p][c]) ++p;
      if (p == rows_) continue;
      std::swap(bits_[p], bits_[next]);
      for (std::size_t r = 0; r < rows_; ++r)
        if (r != next && bits_[r][c])
          for (std::size_t k = 0; k < cols_; ++k) bits_[r][k] = bits_[r][k] != bits_[next][k];
      pivots.push_back(c);
      ++next;
    }
    return pivots;
  }

  std::size_t rank() const {
    GF2Matrix copy = *this;
    return copy.reduce().size();
  }

  /// A basis of {w : M·w = 0}, one vector per free column.
  std::vector<GF2Vector> kernel_basis() const {
    GF2Matrix red = *this;
    const auto pivots = red.reduce();
    std::vector<bool> is_pivot(cols_);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<GF2Vector> basis;
    for (std::size_t f = 0; f < cols_; ++f) {
      if (is_pivot[f]) continue;
      GF2Vector w(cols_);
      w[f] = true;
      for (std::size_t i = 0; i < pivots.size(); ++i) w[pivots[i]] = red.bits_[i][f];
      basis.push_back(std::move(w));
    }
    return basis;
  }

  std::string str() const {
    std::string s;
    for (const auto& r : bits_) {
      for (bool b : r) s += b ? '1' : '0';
      s += '\n';
    }
    return s;
  }

private:
  std::size_t rows_, cols_;
  std::vector<GF2Vector> bits_;
};

/// A nonzero w with M·w = 0 when the rows span a proper subspace, else none.
inline std::optional<GF2Vector> annihilator_witness(const GF2Matrix& m) {
  auto basis = m.kernel_basis();
  if (basis.empty()) return std::nullopt;
  return basis.front();
}

struct DualSpanReport {
  std::size_t dimension = 0;
  std::size_t rank = 0;
  bool homomorphisms = false;  // every e_b preserves ∧ on 2^B
  bool full_rank() const noexcept { return rank == dimension; }
};

/// The evaluation functionals e_b(v) = v_b on 2^B, written in the basis of
/// singleton indicators, and the rank of the matrix they form.
inline DualSpanReport dual_span_check(std::size_t n, std::size_t bound = 6) {
  if (n > bound) throw InvalidInput("set larger than the configured bound");
  DualSpanReport rep;
  rep.dimension = n;
  auto evaluate = [](std::size_t b, std::uint64_t v) { return ((v >> b) & 1) != 0; };
  GF2Matrix m(n, n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t j = 0; j < n; ++j) m.set(b, j, evaluate(b, std::uint64_t{1} << j));
  rep.rank = m.rank();
  rep.homomorphisms = true;
  const std::uint64_t vectors = std::uint64_t{1} << n;
  for (std::size_t b = 0; b < n; ++b)
    for (std::uint64_t v = 0; v < vectors; ++v)
      for (std::uint64_t w = 0; w < vectors; ++w)
        if (evaluate(b, v & w) != (evaluate(b, v) && evaluate(b, w)) ||
            evaluate(b, v ^ w) != (evaluate(b, v) != evaluate(b, w)))
          rep.homomorphisms = false;
  return rep;
}

}  // namespace nsa
