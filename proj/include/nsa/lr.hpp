#pragma once

// Local relators over a finite base B: an index set E together with an
// ultrafilter L on the cylinder algebra of B^E.
//
// Indices are named by strings, base elements by their position in B.
// With E finite the cylinder algebra is the whole power set of B^E, and every
// ultrafilter on it contains exactly one point ("atom"). Table-backed
// ultrafilters store their membership for every subset of B^U, U the declared
// universe, so their axioms can be checked by enumeration.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "nsa/error.hpp"
#include "nsa/sexpr.hpp"

namespace nsa {

/// Assignment of base elements to named indices.
using IndexPoint = std::map<std::string, std::size_t>;
/// A map between index sets, I → E.
using IndexMap = std::map<std::string, std::string>;

namespace detail {

inline std::size_t int_pow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

/// Digits of `code` in base `base`, most significant first.
inline std::vector<std::size_t> digits(std::size_t code, std::size_t base, std::size_t width) {
  std::vector<std::size_t> d(width);
  for (std::size_t i = width; i-- > 0;) {
    d[i] = code % base;
    code /= base;
  }
  return d;
}

inline std::size_t encode(const std::vector<std::size_t>& d, std::size_t base) {
  std::size_t code = 0;
  for (auto x : d) code = code * base + x;
  return code;
}

inline std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace detail

/// A subset of B^E that depends on finitely many coordinates, kept with a
/// minimal sorted support.
class Cylinder {
public:
  /// `allowed[code]` for every tuple of B^support, first coordinate most
  /// significant. The support is sorted and minimized.
  Cylinder(std::size_t base, std::vector<std::string> support, std::vector<bool> allowed)
      : base_(base), support_(std::move(support)), allowed_(std::move(allowed)) {
    if (base_ == 0) throw InvalidInput("cylinders need a nonempty base");
    if (allowed_.size() != detail::int_pow(base_, support_.size()))
      throw InvalidInput("cylinder table has the wrong size");
    if (detail::sorted_unique(support_).size() != support_.size()) throw InvalidInput("support repeats an index");
    sort_support();
    minimize();
  }

  template <class Pred>
  static Cylinder build(std::size_t base, std::vector<std::string> support, Pred&& holds) {
    support = detail::sorted_unique(std::move(support));
    std::vector<bool> allowed(detail::int_pow(base, support.size()));
    for (std::size_t c = 0; c < allowed.size(); ++c) {
      const auto d = detail::digits(c, base, support.size());
      IndexPoint p;
      for (std::size_t i = 0; i < support.size(); ++i) p[support[i]] = d[i];
      allowed[c] = holds(p);
    }
    return Cylinder(base, std::move(support), std::move(allowed));
  }

  static Cylinder full(std::size_t base) { return Cylinder(base, {}, {true}); }
  static Cylinder empty(std::size_t base) { return Cylinder(base, {}, {false}); }

  /// {ψ : (ψ(e₁), …, ψ(eₙ)) ∈ R}; indices may repeat.
  static Cylinder from_relation(std::size_t base, const std::set<std::vector<std::size_t>>& r,
                                const std::vector<std::string>& indices) {
    return build(base, indices, [&](const IndexPoint& p) {
      std::vector<std::size_t> t;
      for (const auto& e : indices) t.push_back(p.at(e));
      return r.count(t) > 0;
    });
  }

  /// {ψ : ψ(e) = b}.
  static Cylinder coordinate(std::size_t base, const std::string& e, std::size_t b) {
    return build(base, {e}, [&](const IndexPoint& p) { return p.at(e) == b; });
  }

  std::size_t base() const noexcept { return base_; }
  const std::vector<std::string>& support() const noexcept { return support_; }
  const std::vector<bool>& allowed() const noexcept { return allowed_; }
  bool is_empty() const { return support_.empty() && !allowed_[0]; }
  bool is_full() const { return support_.empty() && allowed_[0]; }

  /// Whether a point (covering the support) lies in the cylinder.
  bool contains(const IndexPoint& p) const {
    std::size_t code = 0;
    for (const auto& e : support_) {
      auto it = p.find(e);
      if (it == p.end()) throw SupportOutOfUniverse("point does not assign index " + e);
      code = code * base_ + it->second;
    }
    return allowed_[code];
  }

  Cylinder complement() const {
    std::vector<bool> a(allowed_.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = !allowed_[i];
    return Cylinder(base_, support_, std::move(a));
  }

  Cylinder intersect(const Cylinder& o) const { return combine(o, [](bool a, bool b) { return a && b; }); }
  Cylinder unite(const Cylinder& o) const { return combine(o, [](bool a, bool b) { return a || b; }); }

  /// Preimage under ψ ↦ ψ∘η of this cylinder over B^I.
  Cylinder pullback(const IndexMap& eta) const {
    std::vector<std::string> target;
    for (const auto& i : support_) {
      auto it = eta.find(i);
      if (it == eta.end()) throw InvalidInput("map does not cover index " + i);
      target.push_back(it->second);
    }
    return build(base_, target, [&](const IndexPoint& p) {
      IndexPoint q;
      for (const auto& i : support_) q[i] = p.at(eta.at(i));
      return contains(q);
    });
  }

  std::string str(const std::vector<std::string>& names = {}) const {
    auto name = [&](std::size_t b) { return b < names.size() ? names[b] : std::to_string(b); };
    std::string s = "(cyl (";
    for (std::size_t i = 0; i < support_.size(); ++i) s += (i ? " " : "") + support_[i];
    s += ")";
    for (std::size_t c = 0; c < allowed_.size(); ++c) {
      if (!allowed_[c]) continue;
      s += " (";
      const auto d = detail::digits(c, base_, support_.size());
      for (std::size_t i = 0; i < d.size(); ++i) s += (i ? " " : "") + name(d[i]);
      s += ")";
    }
    return s + ")";
  }

  friend bool operator==(const Cylinder& a, const Cylinder& b) {
    return a.base_ == b.base_ && a.support_ == b.support_ && a.allowed_ == b.allowed_;
  }

private:
  template <class Op>
  Cylinder combine(const Cylinder& o, Op op) const {
    if (o.base_ != base_) throw InvalidInput("cylinders over different bases");
    std::vector<std::string> sup = support_;
    sup.insert(sup.end(), o.support_.begin(), o.support_.end());
    return build(base_, sup, [&](const IndexPoint& p) { return op(contains(p), o.contains(p)); });
  }

  void sort_support() {
    if (std::is_sorted(support_.begin(), support_.end())) return;
    std::vector<std::size_t> order(support_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return support_[a] < support_[b]; });
    std::vector<bool> a(allowed_.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
      const auto d = detail::digits(c, base_, support_.size());
      std::vector<std::size_t> nd;
      for (auto k : order) nd.push_back(d[k]);
      a[detail::encode(nd, base_)] = allowed_[c];
    }
    std::vector<std::string> s;
    for (auto k : order) s.push_back(support_[k]);
    support_ = std::move(s);
    allowed_ = std::move(a);
  }

  void minimize() {
    for (std::size_t j = support_.size(); j-- > 0;) {
      const std::size_t k = support_.size();
      bool insensitive = true;
      for (std::size_t c = 0; c < allowed_.size() && insensitive; ++c) {
        auto d = detail::digits(c, base_, k);
        for (std::size_t v = 0; v < base_; ++v) {
          d[j] = v;
          if (allowed_[detail::encode(d, base_)] != allowed_[c]) {
            insensitive = false;
            break;
          }
        }
      }
      if (!insensitive) continue;
      std::vector<bool> a(detail::int_pow(base_, k - 1));
      for (std::size_t c = 0; c < a.size(); ++c) {
        auto d = detail::digits(c, base_, k - 1);
        d.insert(d.begin() + static_cast<std::ptrdiff_t>(j), 0);
        a[c] = allowed_[detail::encode(d, base_)];
      }
      support_.erase(support_.begin() + static_cast<std::ptrdiff_t>(j));
      allowed_ = std::move(a);
    }
  }

  std::size_t base_;
  std::vector<std::string> support_;
  std::vector<bool> allowed_;
};

/// Points of B^J for sorted J, in code order.
inline std::vector<IndexPoint> all_points(std::size_t base, const std::vector<std::string>& indices) {
  const auto sorted = detail::sorted_unique(indices);
  std::vector<IndexPoint> out;
  const std::size_t n = detail::int_pow(base, sorted.size());
  for (std::size_t c = 0; c < n; ++c) {
    const auto d = detail::digits(c, base, sorted.size());
    IndexPoint p;
    for (std::size_t i = 0; i < sorted.size(); ++i) p[sorted[i]] = d[i];
    out.push_back(std::move(p));
  }
  return out;
}

struct AxiomReport {
  bool proper = false;
  bool complement_complete = false;
  bool intersection_closed = false;
  bool ok() const noexcept { return proper && complement_complete && intersection_closed; }
};

/// Largest |B^U| a table-backed ultrafilter may have.
inline constexpr std::size_t max_table_points = 16;

/// An ultrafilter on the cylinders of B^E: either principal at a point or
/// given by a membership table over the subsets of B^U.
class CylUF {
public:
  static CylUF principal(std::size_t base, IndexPoint point) {
    if (base == 0) throw InvalidInput("empty base has no ultrafilters");
    for (const auto& [e, b] : point)
      if (b >= base) throw InvalidInput("point value out of range at " + e);
    CylUF u;
    u.base_ = base;
    u.data_ = std::move(point);
    return u;
  }

  /// `members[mask]` for every subset of B^U (bit k = k-th point in
  /// all_points order). Throws InvalidInput unless it is an ultrafilter.
  static CylUF table(std::size_t base, std::vector<std::string> universe, std::vector<bool> members) {
    if (base == 0) throw InvalidInput("empty base has no ultrafilters");
    universe = detail::sorted_unique(std::move(universe));
    const std::size_t points = detail::int_pow(base, universe.size());
    if (points > max_table_points) throw InvalidInput("table universe too large");
    if (members.size() != (std::size_t{1} << points)) throw InvalidInput("table has the wrong size");
    CylUF u;
    u.base_ = base;
    u.data_ = Table{std::move(universe), points, std::move(members)};
    if (!u.verify().ok()) throw InvalidInput("table is not an ultrafilter");
    return u;
  }

  /// The filter generated by `generators` over B^U, required to be an
  /// ultrafilter.
  static CylUF generated(std::size_t base, std::vector<std::string> universe, const std::vector<Cylinder>& generators) {
    universe = detail::sorted_unique(std::move(universe));
    const auto pts = all_points(base, universe);
    if (pts.size() > max_table_points) throw InvalidInput("table universe too large");
    std::uint32_t kernel = pts.size() == 32 ? 0xffffffffu : (std::uint32_t{1} << pts.size()) - 1;
    for (const auto& g : generators) {
      for (const auto& e : g.support())
        if (!std::binary_search(universe.begin(), universe.end(), e))
          throw SupportOutOfUniverse("generator uses index " + e + " outside the universe");
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (!g.contains(pts[k])) kernel &= ~(std::uint32_t{1} << k);
    }
    std::vector<bool> members(std::size_t{1} << pts.size());
    for (std::size_t m = 0; m < members.size(); ++m) members[m] = (m & kernel) == kernel;
    return table(base, std::move(universe), std::move(members));
  }

  /// Table-backed copy of a principal ultrafilter restricted to U.
  static CylUF table_at(std::size_t base, const std::vector<std::string>& universe, const IndexPoint& point) {
    const auto pts = all_points(base, universe);
    std::vector<bool> members(std::size_t{1} << pts.size());
    for (std::size_t m = 0; m < members.size(); ++m)
      for (std::size_t k = 0; k < pts.size(); ++k)
        if ((m >> k & 1) && std::all_of(pts[k].begin(), pts[k].end(),
                                         [&](const auto& kv) { return point.at(kv.first) == kv.second; }))
          members[m] = true;
    return table(base, universe, std::move(members));
  }

  std::size_t base() const noexcept { return base_; }
  bool is_principal() const noexcept { return std::holds_alternative<IndexPoint>(data_); }
  const IndexPoint& point() const { return std::get<IndexPoint>(data_); }

  /// Indices membership can be asked about: the point's domain or the universe.
  std::vector<std::string> universe() const {
    if (is_principal()) {
      std::vector<std::string> out;
      for (const auto& [e, _] : point()) out.push_back(e);
      return out;
    }
    return std::get<Table>(data_).universe;
  }

  /// Cylinder membership. The support must lie in universe().
  bool contains(const Cylinder& c) const {
    if (c.base() != base_) throw InvalidInput("cylinder over a different base");
    if (is_principal()) return c.contains(point());
    const auto& t = std::get<Table>(data_);
    for (const auto& e : c.support())
      if (!std::binary_search(t.universe.begin(), t.universe.end(), e))
        throw SupportOutOfUniverse("index " + e + " is outside the declared universe");
    const auto pts = all_points(base_, t.universe);
    std::size_t mask = 0;
    for (std::size_t k = 0; k < pts.size(); ++k)
      if (c.contains(pts[k])) mask |= std::size_t{1} << k;
    return t.members[mask];
  }

  /// The unique point p of B^J with {p} in the ultrafilter, found by
  /// membership queries.
  IndexPoint atom(const std::vector<std::string>& indices) const {
    std::optional<IndexPoint> found;
    for (const auto& p : all_points(base_, indices)) {
      auto single = Cylinder::build(base_, indices, [&](const IndexPoint& q) { return q == p; });
      if (contains(single)) {
        if (found) throw InvalidInput("two atoms in one ultrafilter");
        found = p;
      }
    }
    if (!found) throw InvalidInput("no atom in ultrafilter");
    return *found;
  }

  /// Properness, complement-completeness and closure under intersection.
  /// Tables are checked on every subset of B^U; a principal ultrafilter is
  /// checked on the coordinate cylinders of its domain.
  AxiomReport verify() const {
    AxiomReport r;
    if (is_principal()) {
      r.proper = contains(Cylinder::full(base_)) && !contains(Cylinder::empty(base_));
      r.complement_complete = true;
      r.intersection_closed = true;
      std::vector<Cylinder> in;
      for (const auto& [e, _] : point())
        for (std::size_t b = 0; b < base_; ++b) {
          const auto c = Cylinder::coordinate(base_, e, b);
          const bool a = contains(c), na = contains(c.complement());
          if (a == na) r.complement_complete = false;
          if (a) in.push_back(c);
        }
      for (const auto& a : in)
        for (const auto& b : in)
          if (!contains(a.intersect(b))) r.intersection_closed = false;
      return r;
    }
    const auto& t = std::get<Table>(data_);
    const std::size_t full = (std::size_t{1} << t.points) - 1;
    r.proper = !t.members[0] && t.members[full];
    r.complement_complete = true;
    for (std::size_t m = 0; m <= full; ++m)
      if (t.members[m] == t.members[full ^ m]) r.complement_complete = false;
    // On a finite algebra a family closed under intersection contains the
    // intersection of all its members and then is the up-set of it.
    std::size_t kernel = full;
    for (std::size_t m = 0; m <= full; ++m)
      if (t.members[m]) kernel &= m;
    r.intersection_closed = t.members[kernel];
    for (std::size_t m = 0; m <= full && r.intersection_closed; ++m)
      if (t.members[m] != ((m & kernel) == kernel)) r.intersection_closed = false;
    if (t.points <= 8 && r.intersection_closed)
      for (std::size_t a = 0; a <= full; ++a)
        for (std::size_t b = 0; b <= full; ++b)
          if (t.members[a] && t.members[b] && !t.members[a & b]) r.intersection_closed = false;
    return r;
  }

private:
  struct Table {
    std::vector<std::string> universe;
    std::size_t points = 0;
    std::vector<bool> members;
  };

  std::size_t base_ = 0;
  std::variant<IndexPoint, Table> data_;
};

inline bool uf_member(const CylUF& l, const Cylinder& c) { return l.contains(c); }

/// Whether two ultrafilters agree on every cylinder with support in J.
/// Small J are compared subset by subset; otherwise by their atoms, which
/// determine an ultrafilter on a finite power set.
inline bool same_ultrafilter(const CylUF& a, const CylUF& b, const std::vector<std::string>& indices) {
  if (a.base() != b.base()) return false;
  const auto pts = all_points(a.base(), indices);
  if (pts.size() <= 12) {
    const auto j = detail::sorted_unique(indices);
    for (std::size_t m = 0; m < (std::size_t{1} << pts.size()); ++m) {
      auto c = Cylinder::build(a.base(), j, [&](const IndexPoint& p) {
        for (std::size_t k = 0; k < pts.size(); ++k)
          if (pts[k] == p) return ((m >> k) & 1) != 0;
        return false;
      });
      if (a.contains(c) != b.contains(c)) return false;
    }
    return true;
  }
  return a.atom(indices) == b.atom(indices);
}

/// The ultrafilter on B^I of cylinders D whose preimage under ψ ↦ ψ∘η is in L.
inline CylUF push_forward(const CylUF& l, const IndexMap& eta) {
  std::vector<std::string> domain;
  for (const auto& [i, _] : eta) domain.push_back(i);
  if (l.is_principal()) {
    IndexPoint p;
    for (const auto& [i, e] : eta) {
      auto it = l.point().find(e);
      if (it == l.point().end()) throw SupportOutOfUniverse("index " + e + " is outside the point's domain");
      p[i] = it->second;
    }
    return CylUF::principal(l.base(), std::move(p));
  }
  const auto pts = all_points(l.base(), domain);
  if (pts.size() > max_table_points) {
    IndexPoint p;
    const auto img = l.atom([&] {
      std::vector<std::string> t;
      for (const auto& [_, e] : eta) t.push_back(e);
      return t;
    }());
    for (const auto& [i, e] : eta) p[i] = img.at(e);
    return CylUF::principal(l.base(), std::move(p));
  }
  std::vector<bool> members(std::size_t{1} << pts.size());
  for (std::size_t m = 0; m < members.size(); ++m) {
    auto d = Cylinder::build(l.base(), domain, [&](const IndexPoint& p) {
      for (std::size_t k = 0; k < pts.size(); ++k)
        if (pts[k] == p) return ((m >> k) & 1) != 0;
      return false;
    });
    members[m] = l.contains(d.pullback(eta));
  }
  return CylUF::table(l.base(), domain, std::move(members));
}

struct LocalRelator {
  std::vector<std::string> base;   // B
  std::vector<std::string> index;  // E
  CylUF L = CylUF::principal(1, {});
  std::size_t fresh_counter = 0;

  LocalRelator(std::vector<std::string> b, std::vector<std::string> e, CylUF l, std::size_t counter = 0)
      : base(std::move(b)), index(std::move(e)), L(std::move(l)), fresh_counter(counter) {
    if (base.empty()) throw InvalidInput("base must be nonempty");
    if (L.base() != base.size()) throw InvalidInput("ultrafilter over a different base");
    if (detail::sorted_unique(index).size() != index.size()) throw InvalidInput("index set repeats a name");
    for (const auto& u : L.universe())
      if (std::find(index.begin(), index.end(), u) == index.end())
        throw InvalidInput("ultrafilter refers to unknown index " + u);
    if (L.is_principal() && L.universe().size() != index.size())
      throw InvalidInput("principal point must assign every index");
  }

  std::size_t base_size() const noexcept { return base.size(); }
  std::size_t base_index(const std::string& b) const {
    auto it = std::find(base.begin(), base.end(), b);
    if (it == base.end()) throw InvalidInput("'" + b + "' is not a base element");
    return static_cast<std::size_t>(it - base.begin());
  }
};

/// Whether (ψ(e₁),…,ψ(eₙ)) ∈ R holds modulo L.
inline bool transfer_relation(const LocalRelator& lr, const std::set<std::vector<std::size_t>>& r,
                              const std::vector<std::string>& indices) {
  return lr.L.contains(Cylinder::from_relation(lr.base_size(), r, indices));
}

inline std::set<std::vector<std::size_t>> diagonal_relation(std::size_t base) {
  std::set<std::vector<std::size_t>> d;
  for (std::size_t b = 0; b < base; ++b) d.insert({b, b});
  return d;
}

inline bool coincide(const LocalRelator& lr, const std::string& e1, const std::string& e2) {
  return transfer_relation(lr, diagonal_relation(lr.base_size()), {e1, e2});
}

/// Diagonal transfer holds only on equal indices.
inline bool is_separated(const LocalRelator& lr) {
  for (std::size_t i = 0; i < lr.index.size(); ++i)
    for (std::size_t j = i + 1; j < lr.index.size(); ++j)
      if (coincide(lr, lr.index[i], lr.index[j])) return false;
  return true;
}

/// E modulo coincidence, each class represented by its first index; the
/// ultrafilter is the restriction of L.
inline LocalRelator separation_quotient(const LocalRelator& lr) {
  std::vector<std::string> reps;
  for (const auto& e : lr.index) {
    bool known = false;
    for (const auto& r : reps)
      if (coincide(lr, r, e)) {
        known = true;
        break;
      }
    if (!known) reps.push_back(e);
  }
  if (lr.L.is_principal()) {
    IndexPoint p;
    for (const auto& r : reps) p[r] = lr.L.point().at(r);
    return LocalRelator(lr.base, reps, CylUF::principal(lr.base_size(), std::move(p)), lr.fresh_counter);
  }
  IndexMap id;
  for (const auto& r : reps) id[r] = r;
  return LocalRelator(lr.base, reps, push_forward(lr.L, id), lr.fresh_counter);
}

// ------------------------------------------------- cylindrical ultrapower

/// A map B^E → X depending on the coordinates in `support`, stored as a
/// table over B^support.
struct CylUltraElem {
  std::vector<std::string> support;
  std::vector<std::size_t> table;
  std::size_t codomain = 0;

  std::size_t at(const IndexPoint& p, std::size_t base) const {
    std::vector<std::size_t> d;
    for (const auto& e : support) d.push_back(p.at(e));
    return table[detail::encode(d, base)];
  }
};

/// Equality modulo L: the agreement cylinder is in L.
inline bool cyl_equal(const LocalRelator& lr, const CylUltraElem& x, const CylUltraElem& y) {
  std::vector<std::string> sup = x.support;
  sup.insert(sup.end(), y.support.begin(), y.support.end());
  const auto agree = Cylinder::build(lr.base_size(), sup, [&](const IndexPoint& p) {
    return x.at(p, lr.base_size()) == y.at(p, lr.base_size());
  });
  return lr.L.contains(agree);
}

/// The class of the projection ψ ↦ ψ(e).
inline CylUltraElem gamma_b(const LocalRelator& lr, const std::string& e) {
  CylUltraElem x{{e}, {}, lr.base_size()};
  for (std::size_t b = 0; b < lr.base_size(); ++b) x.table.push_back(b);
  return x;
}

/// *f applied to x: compose a representative with f : X → Y.
inline CylUltraElem cyl_ultrapower_star(const LocalRelator&, const std::vector<std::size_t>& f, std::size_t y_size,
                                        const CylUltraElem& x) {
  if (f.size() != x.codomain) throw InvalidInput("map domain does not match element codomain");
  CylUltraElem out{x.support, {}, y_size};
  for (auto v : x.table) out.table.push_back(f.at(v));
  return out;
}

/// *f for f : B^n → X (table over B^n) applied to n elements over B.
inline CylUltraElem cyl_star_n(const LocalRelator& lr, const std::vector<std::size_t>& f, std::size_t x_size,
                               const std::vector<CylUltraElem>& args) {
  const std::size_t base = lr.base_size();
  if (f.size() != detail::int_pow(base, args.size())) throw InvalidInput("map table has the wrong size");
  std::vector<std::string> sup;
  for (const auto& a : args) sup.insert(sup.end(), a.support.begin(), a.support.end());
  sup = detail::sorted_unique(std::move(sup));
  CylUltraElem out{sup, {}, x_size};
  for (const auto& p : all_points(base, sup)) {
    std::vector<std::size_t> vals;
    for (const auto& a : args) vals.push_back(a.at(p, base));
    out.table.push_back(f[detail::encode(vals, base)]);
  }
  return out;
}

/// One representative per class of the cylindrical ultrapower of a set of
/// size x_size, from maps supported on the ultrafilter's universe.
inline std::vector<CylUltraElem> cyl_ultrapower_classes(const LocalRelator& lr, std::size_t x_size) {
  const auto sup = detail::sorted_unique(lr.L.universe());
  const std::size_t points = detail::int_pow(lr.base_size(), sup.size());
  std::size_t total = 1;
  for (std::size_t i = 0; i < points; ++i) {
    total *= x_size;
    if (total > (std::size_t{1} << 20)) throw InvalidInput("cylindrical ultrapower too large to enumerate");
  }
  if (x_size == 0) total = 0;
  std::vector<CylUltraElem> classes;
  for (std::size_t code = 0; code < total; ++code) {
    CylUltraElem x{sup, detail::digits(code, x_size, points), x_size};
    bool known = false;
    for (const auto& c : classes)
      if (cyl_equal(lr, c, x)) {
        known = true;
        break;
      }
    if (!known) classes.push_back(std::move(x));
  }
  return classes;
}

struct RoundtripReport {
  std::size_t classes = 0;
  std::size_t alpha_gamma_fixed = 0;
  std::size_t gamma_alpha_fixed = 0;
  std::size_t gamma_choices = 0;          // (f, e) coordinates examined
  std::size_t gamma_choice_conflicts = 0; // coordinates giving a different class
  bool passed() const noexcept {
    return alpha_gamma_fixed == classes && gamma_alpha_fixed == classes && gamma_choice_conflicts == 0;
  }
};

/// α and γ between the cylindrical ultrapower of X and the analysis the lr
/// induces, E identified with *B through γ_B. α sends the class of
/// ψ ↦ f(ψ(e₁),…,ψ(eₙ)) to (*f)(γ_B(e₁),…,γ_B(eₙ)); γ finds f : B → X and
/// e with x = (*f)(γ_B(e)) and returns ψ ↦ f(ψ(e)). Every such (f, e) is
/// checked to give the same class.
inline RoundtripReport alpha_gamma_roundtrip_check(const LocalRelator& lr, std::size_t x_size) {
  if (lr.index.empty()) throw InvalidInput("roundtrip needs a nonempty index set");
  const std::size_t base = lr.base_size();
  const auto universe = detail::sorted_unique(lr.L.universe());
  if (universe.empty()) throw InvalidInput("roundtrip needs a nonempty universe");

  auto alpha = [&](const CylUltraElem& x) {
    std::vector<CylUltraElem> args;
    for (const auto& e : x.support) args.push_back(gamma_b(lr, e));
    return cyl_star_n(lr, x.table, x.codomain, args);
  };

  RoundtripReport rep;
  auto gamma = [&](const CylUltraElem& x) -> std::optional<CylUltraElem> {
    std::optional<CylUltraElem> first;
    const std::size_t maps = detail::int_pow(x_size, base);
    for (std::size_t code = 0; code < maps; ++code) {
      const auto f = detail::digits(code, x_size, base);
      for (const auto& e : universe) {
        if (!cyl_equal(lr, cyl_ultrapower_star(lr, f, x_size, gamma_b(lr, e)), x)) continue;
        CylUltraElem g{{e}, f, x_size};
        ++rep.gamma_choices;
        if (!first)
          first = g;
        else if (!cyl_equal(lr, *first, g))
          ++rep.gamma_choice_conflicts;
      }
    }
    return first;
  };

  const auto classes = cyl_ultrapower_classes(lr, x_size);
  rep.classes = classes.size();
  for (const auto& x : classes) {
    if (auto g = gamma(x); g && cyl_equal(lr, alpha(*g), x)) ++rep.alpha_gamma_fixed;
    if (auto g = gamma(alpha(x)); g && cyl_equal(lr, *g, x)) ++rep.gamma_alpha_fixed;
  }
  return rep;
}

// ------------------------------------------------------ exactness, extension

inline void check_compatible(const CylUF& l, const IndexMap& eta, const CylUF& u, const std::string& i) {
  IndexMap incl;
  std::vector<std::string> dom;
  for (const auto& [j, _] : eta) {
    incl[j] = j;
    dom.push_back(j);
  }
  if (eta.count(i)) throw InvalidInput("new index already in the family's domain");
  if (!same_ultrafilter(push_forward(u, incl), push_forward(l, eta), dom))
    throw IncompatibleUltrafilters("U does not project to the pullback of L along the family");
}

/// Searches E (in order) for an image of i such that L pulled back along the
/// extended family is U.
inline std::optional<std::string> exactness_step_check(const LocalRelator& lr, const IndexMap& eta,
                                                       const std::string& i, const CylUF& u) {
  check_compatible(lr.L, eta, u, i);
  std::vector<std::string> dom;
  for (const auto& [j, _] : eta) dom.push_back(j);
  dom.push_back(i);
  for (const auto& e : lr.L.universe()) {
    IndexMap ext = eta;
    ext[i] = e;
    if (same_ultrafilter(push_forward(lr.L, ext), u, dom)) return e;
  }
  return std::nullopt;
}

struct ExtensionResult {
  LocalRelator lr;
  std::string new_index;
  bool projects_to_L = false;  // (a)
  bool pulls_back_to_U = false;  // (b)
  bool verified() const noexcept { return projects_to_L && pulls_back_to_U; }
};

/// Adjoins a fresh index realizing U over the family η. The cylinders L′
/// must contain (L and the pullbacks of U) are intersected over
/// B^{E ∪ {new}}; the remaining cylinders are decided greedily in the
/// order (support size, support, allowed set), keeping the family's
/// intersection nonempty. Both properties are then checked.
inline ExtensionResult extend_ultrafilter_step(const LocalRelator& lr, const IndexMap& eta, const std::string& i,
                                               const CylUF& u) {
  check_compatible(lr.L, eta, u, i);
  std::size_t counter = lr.fresh_counter;
  std::string fresh;
  do fresh = "new" + std::to_string(++counter);
  while (std::find(lr.index.begin(), lr.index.end(), fresh) != lr.index.end());

  std::vector<std::string> extended = lr.index;
  extended.push_back(fresh);
  const std::size_t base = lr.base_size();
  const auto universe_l = detail::sorted_unique(lr.L.universe());

  // Members of L and U are up-sets of their atoms, so the family's
  // intersection is cut out by those two atoms.
  const IndexPoint atom_l = lr.L.atom(universe_l);
  std::vector<std::string> udom;
  for (const auto& [j, _] : eta) udom.push_back(j);
  udom.push_back(i);
  const IndexPoint atom_u = u.atom(udom);
  IndexMap ext = eta;
  ext[i] = fresh;

  std::vector<IndexPoint> state;
  for (const auto& p : all_points(base, extended)) {
    bool in = true;
    for (const auto& [e, b] : atom_l) in = in && p.at(e) == b;
    for (const auto& [j, b] : atom_u) in = in && p.at(ext.at(j)) == b;
    if (in) state.push_back(p);
  }
  if (state.empty()) throw ExtensionInfeasible("the required cylinders have empty intersection");

  // Nonempty subsets of B ordered by their sorted element lists.
  std::vector<std::size_t> subsets;
  for (std::size_t mask = 1; mask < (std::size_t{1} << base); ++mask) subsets.push_back(mask);
  auto elements = [&](std::size_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < base; ++b)
      if (mask >> b & 1) out.push_back(b);
    return out;
  };
  std::sort(subsets.begin(), subsets.end(), [&](auto a, auto b) { return elements(a) < elements(b); });

  for (const auto& e : detail::sorted_unique(extended)) {
    for (std::size_t mask : subsets) {
      if (state.size() == 1) break;
      std::vector<IndexPoint> kept;
      for (const auto& p : state)
        if (mask >> p.at(e) & 1) kept.push_back(p);
      if (!kept.empty()) {
        state = std::move(kept);
      } else {
        std::erase_if(state, [&](const IndexPoint& p) { return (mask >> p.at(e) & 1) != 0; });
      }
    }
  }
  const IndexPoint chosen = state.front();

  ExtensionResult res{LocalRelator(lr.base, extended, CylUF::principal(base, chosen), counter), fresh};
  IndexMap incl;
  for (const auto& e : universe_l) incl[e] = e;
  res.projects_to_L = same_ultrafilter(push_forward(res.lr.L, incl), lr.L, universe_l);
  res.pulls_back_to_U = same_ultrafilter(push_forward(res.lr.L, ext), u, udom);
  return res;
}

struct ExactnessReport {
  std::size_t instances = 0;
  std::size_t realized = 0;
  std::vector<std::string> unrealized;  // up to 20 descriptions
};

/// Exactness for I → I ∪ {i} over every family η : I → universe with
/// |I| ≤ max_family and every compatible principal U.
inline ExactnessReport exactness_report(const LocalRelator& lr, std::size_t max_family) {
  ExactnessReport rep;
  const auto universe = detail::sorted_unique(lr.L.universe());
  const std::size_t base = lr.base_size();
  for (std::size_t k = 0; k <= max_family; ++k) {
    const std::size_t families = detail::int_pow(universe.size(), k);
    for (std::size_t code = 0; code < families; ++code) {
      const auto picks = detail::digits(code, universe.size(), k);
      IndexMap eta;
      for (std::size_t j = 0; j < k; ++j) eta["i" + std::to_string(j)] = universe[picks[j]];
      const CylUF pulled = push_forward(lr.L, eta);
      IndexPoint base_point = pulled.atom([&] {
        std::vector<std::string> d;
        for (const auto& [j, _] : eta) d.push_back(j);
        return d;
      }());
      for (std::size_t b = 0; b < base; ++b) {
        IndexPoint p = base_point;
        p["new"] = b;
        ++rep.instances;
        if (exactness_step_check(lr, eta, "new", CylUF::principal(base, p))) {
          ++rep.realized;
        } else if (rep.unrealized.size() < 20) {
          std::string d = "{";
          for (const auto& [j, e] : eta) d += j + "->" + e + " ";
          rep.unrealized.push_back(d + "} new=" + lr.base[b]);
        }
      }
    }
  }
  return rep;
}

/// The sub-lr over B′ ⊆ B: indices that belong to B′ modulo L, with L
/// restricted. Base elements of B′ are renumbered in B order.
inline LocalRelator sub_lr(const LocalRelator& lr, const std::vector<std::size_t>& sub_base) {
  std::set<std::size_t> keep(sub_base.begin(), sub_base.end());
  if (keep.empty()) throw InvalidInput("sub-base must be nonempty");
  std::set<std::vector<std::size_t>> member;
  std::vector<std::string> names;
  std::map<std::size_t, std::size_t> renumber;
  for (auto b : keep) {
    if (b >= lr.base_size()) throw InvalidInput("sub-base element out of range");
    member.insert({b});
    renumber[b] = names.size();
    names.push_back(lr.base[b]);
  }
  std::vector<std::string> sub_index;
  for (const auto& e : lr.L.universe())
    if (transfer_relation(lr, member, {e})) sub_index.push_back(e);
  const IndexPoint full = lr.L.atom(lr.L.universe());
  IndexPoint p;
  for (const auto& e : sub_index) p[e] = renumber.at(full.at(e));
  return LocalRelator(names, sub_index, CylUF::principal(names.size(), std::move(p)), lr.fresh_counter);
}

// ------------------------------------------------------------- lr files

/// Reads
///   (lr (base a b) (index e1 e2 e3)
///       (principal ((e1 a) (e2 b) (e3 a))))
/// or with `(table (universe e1 e2) (members (cyl (e1) (a)) ...))`, the
/// table being the filter generated by the listed cylinders.
inline LocalRelator parse_lr(const Sexpr& e) {
  if (e.head() != "lr") e.fail("expected (lr ...)");
  std::vector<std::string> base, index;
  const Sexpr* ufs = nullptr;
  auto atoms = [](const Sexpr& list, std::size_t from) {
    std::vector<std::string> out;
    for (std::size_t i = from; i < list.size(); ++i) {
      if (!list[i].is_atom()) list[i].fail("expected a name");
      out.push_back(list[i].atom);
    }
    return out;
  };
  for (std::size_t i = 1; i < e.size(); ++i) {
    const auto& d = e[i];
    if (d.head() == "base")
      base = atoms(d, 1);
    else if (d.head() == "index")
      index = atoms(d, 1);
    else if (d.head() == "principal" || d.head() == "table")
      ufs = &d;
    else
      d.fail("expected base, index, principal or table");
  }
  if (base.empty()) e.fail("missing or empty (base ...)");
  if (!ufs) e.fail("missing ultrafilter");
  auto base_of = [&](const Sexpr& a) {
    if (!a.is_atom()) a.fail("expected a base element");
    auto it = std::find(base.begin(), base.end(), a.atom);
    if (it == base.end()) a.fail("'" + a.atom + "' is not a base element");
    return static_cast<std::size_t>(it - base.begin());
  };
  auto make = [&](CylUF l) {
    try {
      return LocalRelator(base, index, std::move(l));
    } catch (const InvalidInput& err) {
      ufs->fail(err.what());
    }
  };
  if (ufs->head() == "principal") {
    if (ufs->size() != 2 || !(*ufs)[1].is_list) ufs->fail("expected (principal ((index value) ...))");
    IndexPoint p;
    for (const auto& kv : (*ufs)[1].items) {
      if (!kv.is_list || kv.size() != 2 || !kv[0].is_atom()) kv.fail("expected (index value)");
      p[kv[0].atom] = base_of(kv[1]);
    }
    return make(CylUF::principal(base.size(), std::move(p)));
  }
  std::vector<std::string> universe;
  std::vector<Cylinder> gens;
  for (std::size_t i = 1; i < ufs->size(); ++i) {
    const auto& d = (*ufs)[i];
    if (d.head() == "universe") {
      universe = atoms(d, 1);
    } else if (d.head() == "members") {
      for (std::size_t k = 1; k < d.size(); ++k) {
        const auto& c = d[k];
        if (c.head() != "cyl" || c.size() < 2 || !c[1].is_list) c.fail("expected (cyl (index...) (value...)...)");
        std::vector<std::string> sup = atoms(c[1], 0);
        std::set<std::vector<std::size_t>> tuples;
        for (std::size_t t = 2; t < c.size(); ++t) {
          if (!c[t].is_list || c[t].size() != sup.size()) c[t].fail("tuple of wrong arity");
          std::vector<std::size_t> tu;
          for (const auto& a : c[t].items) tu.push_back(base_of(a));
          tuples.insert(tu);
        }
        gens.push_back(Cylinder::from_relation(base.size(), tuples, sup));
      }
    } else {
      d.fail("expected (universe ...) or (members ...)");
    }
  }
  try {
    return make(CylUF::generated(base.size(), universe, gens));
  } catch (const InvalidInput& err) {
    ufs->fail(err.what());
  } catch (const SupportOutOfUniverse& err) {
    ufs->fail(err.what());
  }
}

inline LocalRelator parse_lr(std::string_view text) { return parse_lr(read_sexpr(text)); }

}  // namespace nsa
