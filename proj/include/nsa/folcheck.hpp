#pragma once

// Finite first-order structures, their finite-index ultrapowers and the
// transfer / functor-law harnesses.
//
// Every ultrafilter on a finite index set is principal, so the ultrapower of
// a finite model is isomorphic to the model itself. The harnesses here check
// that the construction (quotient, pointwise lifting, ν) is implemented
// correctly; they do not produce nonstandard elements. Those live in hyper.hpp.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nsa/error.hpp"
#include "nsa/formula.hpp"
#include "nsa/sexpr.hpp"

namespace nsa {

using Tuple = std::vector<std::size_t>;

struct FiniteModel {
  struct Carrier {
    std::vector<std::string> elements;
    bool declared_empty = false;
  };
  struct Relation {
    std::vector<std::string> sorts;
    std::set<Tuple> tuples;
  };
  struct Function {
    std::vector<std::string> domain;
    std::string codomain;
    std::map<Tuple, std::size_t> graph;
  };

  std::map<std::string, Carrier> carriers;
  std::map<std::string, Relation> relations;
  std::map<std::string, Function> functions;

  FiniteModel& add_carrier(const std::string& name, std::vector<std::string> elements) {
    if (elements.empty()) throw InvalidInput("carrier '" + name + "' is empty; declare it empty explicitly");
    if (std::set<std::string>(elements.begin(), elements.end()).size() != elements.size())
      throw InvalidInput("carrier '" + name + "' repeats an element");
    carriers[name] = Carrier{std::move(elements), false};
    return *this;
  }

  /// Carrier with elements named "0", "1", ...; size 0 declares it empty.
  FiniteModel& add_carrier(const std::string& name, std::size_t size) {
    if (size == 0) return add_empty_carrier(name);
    std::vector<std::string> es;
    for (std::size_t i = 0; i < size; ++i) es.push_back(std::to_string(i));
    return add_carrier(name, std::move(es));
  }

  FiniteModel& add_empty_carrier(const std::string& name) {
    carriers[name] = Carrier{{}, true};
    return *this;
  }

  FiniteModel& add_relation(const std::string& name, std::vector<std::string> sorts, std::set<Tuple> tuples) {
    relations[name] = Relation{std::move(sorts), std::move(tuples)};
    return *this;
  }

  FiniteModel& add_function(const std::string& name, std::vector<std::string> domain, std::string codomain,
                            std::map<Tuple, std::size_t> graph) {
    functions[name] = Function{std::move(domain), std::move(codomain), std::move(graph)};
    return *this;
  }

  std::size_t size(const std::string& carrier) const { return carrier_ref(carrier).elements.size(); }

  std::size_t index_of(const std::string& carrier, const std::string& element) const {
    const auto& es = carrier_ref(carrier).elements;
    auto it = std::find(es.begin(), es.end(), element);
    if (it == es.end()) throw SignatureMismatch("'" + element + "' is not an element of " + carrier);
    return static_cast<std::size_t>(it - es.begin());
  }

  const std::string& element_name(const std::string& carrier, std::size_t i) const {
    return carrier_ref(carrier).elements.at(i);
  }

  Signature signature() const {
    Signature s;
    for (const auto& [c, _] : carriers) s.sorts.insert(c);
    for (const auto& [r, rel] : relations) s.relations[r] = rel.sorts;
    for (const auto& [f, fn] : functions) s.functions[f] = {fn.domain, fn.codomain};
    return s;
  }

  /// Throws SignatureMismatch when a relation or function refers to a
  /// missing carrier, a tuple is out of range or a function is not total.
  void validate() const {
    for (const auto& [c, car] : carriers)
      if (car.elements.empty() && !car.declared_empty)
        throw SignatureMismatch("carrier '" + c + "' is empty but not declared empty");
    auto check_tuple = [&](const std::string& what, const std::vector<std::string>& sorts, const Tuple& t) {
      if (t.size() != sorts.size()) throw SignatureMismatch(what + ": tuple of wrong arity");
      for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= size(sorts[i])) throw SignatureMismatch(what + ": element out of range");
    };
    for (const auto& [r, rel] : relations) {
      for (const auto& s : rel.sorts) carrier_ref(s);
      for (const auto& t : rel.tuples) check_tuple("relation " + r, rel.sorts, t);
    }
    for (const auto& [f, fn] : functions) {
      for (const auto& s : fn.domain) carrier_ref(s);
      const std::size_t cod = size(fn.codomain);
      for (const auto& [arg, val] : fn.graph) {
        check_tuple("function " + f, fn.domain, arg);
        if (val >= cod) throw SignatureMismatch("function " + f + ": value out of range");
      }
      std::size_t total = 1;
      for (const auto& s : fn.domain) total *= size(s);
      if (fn.graph.size() != total) throw SignatureMismatch("function " + f + " is not total");
    }
  }

private:
  const Carrier& carrier_ref(const std::string& c) const {
    auto it = carriers.find(c);
    if (it == carriers.end()) throw SignatureMismatch("no carrier named '" + c + "'");
    return it->second;
  }
};

/// Every tuple of the product of the given sizes, in lexicographic order.
inline std::vector<Tuple> all_tuples(const std::vector<std::size_t>& sizes) {
  std::vector<Tuple> out;
  for (auto s : sizes)
    if (s == 0) return out;
  Tuple t(sizes.size(), 0);
  for (;;) {
    out.push_back(t);
    std::size_t i = sizes.size();
    while (i > 0) {
      --i;
      if (++t[i] < sizes[i]) break;
      t[i] = 0;
      if (i == 0) return out;
    }
    if (sizes.empty()) return out;
  }
}

// ---------------------------------------------------------------- model DSL

/// Reads a model file:
///
///   (model
///     (carrier A a b c)
///     (carrier E)                       ; declared empty
///     (relation R (A A) (a b) (b c))
///     (function f (A) A (a b) (b c) (c a)))   ; each entry lists args then value
inline FiniteModel parse_model(const Sexpr& e) {
  if (e.head() != "model") e.fail("expected (model ...)");
  FiniteModel m;
  std::vector<const Sexpr*> rels, fns;
  for (std::size_t i = 1; i < e.size(); ++i) {
    const Sexpr& d = e[i];
    const std::string& h = d.head();
    if (h == "carrier") {
      if (d.size() < 2 || !d[1].is_atom()) d.fail("expected (carrier Name element...)");
      std::vector<std::string> es;
      for (std::size_t j = 2; j < d.size(); ++j) {
        if (!d[j].is_atom()) d[j].fail("carrier elements are atoms");
        es.push_back(d[j].atom);
      }
      try {
        if (es.empty())
          m.add_empty_carrier(d[1].atom);
        else
          m.add_carrier(d[1].atom, std::move(es));
      } catch (const InvalidInput& err) {
        d.fail(err.what());
      }
    } else if (h == "relation") {
      rels.push_back(&d);
    } else if (h == "function") {
      fns.push_back(&d);
    } else {
      d.fail("expected carrier, relation or function");
    }
  }
  auto sorts_of = [&](const Sexpr& list) {
    if (!list.is_list) list.fail("expected a list of sorts");
    std::vector<std::string> ss;
    for (const auto& s : list.items) {
      if (!s.is_atom() || !m.carriers.count(s.atom)) s.fail("unknown carrier");
      ss.push_back(s.atom);
    }
    return ss;
  };
  auto element = [&](const std::string& sort, const Sexpr& a) {
    if (!a.is_atom()) a.fail("expected an element");
    try {
      return m.index_of(sort, a.atom);
    } catch (const SignatureMismatch& err) {
      a.fail(err.what());
    }
  };
  for (const Sexpr* dp : rels) {
    const Sexpr& d = *dp;
    if (d.size() < 3 || !d[1].is_atom()) d.fail("expected (relation Name (Sort...) (element...)...)");
    auto sorts = sorts_of(d[2]);
    std::set<Tuple> tuples;
    for (std::size_t j = 3; j < d.size(); ++j) {
      const Sexpr& t = d[j];
      if (!t.is_list || t.size() != sorts.size()) t.fail("tuple of wrong arity");
      Tuple tu;
      for (std::size_t k = 0; k < sorts.size(); ++k) tu.push_back(element(sorts[k], t[k]));
      tuples.insert(tu);
    }
    m.add_relation(d[1].atom, std::move(sorts), std::move(tuples));
  }
  for (const Sexpr* dp : fns) {
    const Sexpr& d = *dp;
    if (d.size() < 4 || !d[1].is_atom() || !d[3].is_atom() || !m.carriers.count(d[3].atom))
      d.fail("expected (function Name (Sort...) Sort (args... value)...)");
    auto dom = sorts_of(d[2]);
    std::map<Tuple, std::size_t> graph;
    for (std::size_t j = 4; j < d.size(); ++j) {
      const Sexpr& t = d[j];
      if (!t.is_list || t.size() != dom.size() + 1) t.fail("graph entry of wrong arity");
      Tuple tu;
      for (std::size_t k = 0; k < dom.size(); ++k) tu.push_back(element(dom[k], t[k]));
      if (graph.count(tu)) t.fail("function defined twice at this argument");
      graph[tu] = element(d[3].atom, t[dom.size()]);
    }
    m.add_function(d[1].atom, std::move(dom), d[3].atom, std::move(graph));
  }
  try {
    m.validate();
  } catch (const SignatureMismatch& err) {
    e.fail(err.what());
  }
  return m;
}

inline FiniteModel parse_model(std::string_view text) { return parse_model(read_sexpr(text)); }

// --------------------------------------------------------- compiled formulas

/// A model flattened against a signature: carriers, relations and functions
/// become numbered tables so formulas can be evaluated without lookups.
class ModelTables {
public:
  ModelTables(const FiniteModel& m, const Signature& sig) {
    for (const auto& s : sig.sorts) {
      sort_id_[s] = sizes_.size();
      if (!m.carriers.count(s)) throw SignatureMismatch("model has no carrier " + s);
      sizes_.push_back(m.size(s));
    }
    for (const auto& [name, sorts] : sig.relations) {
      auto it = m.relations.find(name);
      if (it == m.relations.end()) throw SignatureMismatch("model has no relation " + name);
      if (it->second.sorts != sorts) throw SignatureMismatch("relation " + name + " has different sorts");
      Table t = table_for(sorts);
      t.cells.assign(t.volume, 0);
      for (const auto& tu : it->second.tuples) t.cells[t.offset(tu)] = 1;
      rel_id_[name] = relations_.size();
      relations_.push_back(std::move(t));
    }
    for (const auto& [name, sig_fn] : sig.functions) {
      auto it = m.functions.find(name);
      if (it == m.functions.end()) throw SignatureMismatch("model has no function " + name);
      if (it->second.domain != sig_fn.first || it->second.codomain != sig_fn.second)
        throw SignatureMismatch("function " + name + " has different sorts");
      Table t = table_for(sig_fn.first);
      t.cells.assign(t.volume, 0);
      for (const auto& [arg, v] : it->second.graph) t.cells[t.offset(arg)] = v;
      fn_id_[name] = functions_.size();
      functions_.push_back(std::move(t));
    }
  }

  struct Table {
    std::vector<std::size_t> strides;
    std::size_t volume = 1;
    std::vector<std::size_t> cells;
    std::size_t offset(const Tuple& t) const {
      std::size_t o = 0;
      for (std::size_t i = 0; i < t.size(); ++i) o += t[i] * strides[i];
      return o;
    }
  };

  std::size_t carrier_size(std::size_t sort) const { return sizes_[sort]; }
  const Table& relation(std::size_t id) const { return relations_[id]; }
  const Table& function(std::size_t id) const { return functions_[id]; }

private:
  Table table_for(const std::vector<std::string>& sorts) const {
    Table t;
    t.strides.assign(sorts.size(), 0);
    for (std::size_t i = sorts.size(); i-- > 0;) {
      t.strides[i] = t.volume;
      t.volume *= sizes_[sort_id_.at(sorts[i])];
    }
    return t;
  }

  std::map<std::string, std::size_t> sort_id_, rel_id_, fn_id_;
  std::vector<std::size_t> sizes_;
  std::vector<Table> relations_, functions_;
};

/// A formula resolved against a signature. Free variables and constants
/// become numbered slots; evaluation takes their values per model.
class CompiledFormula {
public:
  struct Slot {
    std::string name;
    std::string sort;
  };

  /// `sort_hints` supplies sorts for free variables whose use does not fix one.
  CompiledFormula(const Formula& phi, const Signature& sig, const std::map<std::string, std::string>& sort_hints = {})
      : sig_(sig) {
    for (const auto& s : sig.sorts) sort_ids_[s] = sort_ids_.size();
    for (const auto& [r, _] : sig.relations) rel_ids_[r] = rel_ids_.size();
    for (const auto& [f, _] : sig.functions) fn_ids_[f] = fn_ids_.size();

    std::map<std::string, std::string> free_sorts;
    infer_free(phi, {}, free_sorts);
    for (const auto& v : phi.free_variables()) {
      if (!free_sorts.count(v)) {
        auto h = sort_hints.find(v);
        if (h == sort_hints.end()) throw SortError("cannot determine the sort of free variable '" + v + "'", v);
        free_sorts[v] = h->second;
      }
      if (!sort_ids_.count(free_sorts[v])) throw SignatureMismatch("unknown sort " + free_sorts[v]);
      scope_[v] = {free_.size(), free_sorts[v]};
      free_.push_back({v, free_sorts[v]});
    }
    slot_count_ = free_.size();
    root_ = node(phi);
  }

  const std::vector<Slot>& free_variables() const noexcept { return free_; }
  /// (sort, element name) for every constant, in slot order.
  const std::vector<Slot>& constants() const noexcept { return constants_; }
  std::size_t slot_count() const noexcept { return slot_count_; }

  /// `free_values` are element indices in free_variables() order,
  /// `constant_values` in constants() order.
  bool evaluate(const ModelTables& m, const std::vector<std::size_t>& constant_values,
                const std::vector<std::size_t>& free_values = {}) const {
    std::vector<std::size_t> env(slot_count_, 0);
    std::copy(free_values.begin(), free_values.end(), env.begin());
    return eval(root_, m, constant_values, env);
  }

private:
  struct CTerm {
    enum class Kind : std::uint8_t { slot, constant, apply } kind;
    std::size_t id;
    std::vector<CTerm> args;
  };
  struct CNode {
    Formula::Kind kind;
    std::size_t id = 0;    // relation id or bound slot
    std::size_t sort = 0;  // quantifier sort
    std::vector<CTerm> terms;
    std::vector<CNode> subs;
  };

  std::optional<std::string> known_sort(const FTerm& t, const std::map<std::string, std::string>& bound,
                                        const std::map<std::string, std::string>& free_sorts) const {
    if (t.kind == FTerm::Kind::variable) {
      if (auto it = bound.find(t.name); it != bound.end()) return it->second;
      if (auto it = free_sorts.find(t.name); it != free_sorts.end()) return it->second;
    } else if (t.kind == FTerm::Kind::apply) {
      if (auto it = sig_.functions.find(t.name); it != sig_.functions.end()) return it->second.second;
    }
    return std::nullopt;
  }

  void note(const FTerm& t, const std::string& sort, const std::map<std::string, std::string>& bound,
            std::map<std::string, std::string>& free_sorts) const {
    if (t.kind == FTerm::Kind::variable && !bound.count(t.name) && !free_sorts.count(t.name))
      free_sorts[t.name] = sort;
    if (t.kind == FTerm::Kind::apply) infer_term(t, bound, free_sorts);
  }

  void infer_term(const FTerm& t, const std::map<std::string, std::string>& bound,
                  std::map<std::string, std::string>& free_sorts) const {
    if (t.kind != FTerm::Kind::apply) return;
    auto it = sig_.functions.find(t.name);
    if (it == sig_.functions.end()) return;
    for (std::size_t i = 0; i < t.args.size() && i < it->second.first.size(); ++i)
      note(t.args[i], it->second.first[i], bound, free_sorts);
  }

  void infer_free(const Formula& f, std::map<std::string, std::string> bound,
                  std::map<std::string, std::string>& free_sorts) const {
    using K = Formula::Kind;
    if (f.kind == K::relation) {
      auto it = sig_.relations.find(f.name);
      if (it != sig_.relations.end())
        for (std::size_t i = 0; i < f.terms.size() && i < it->second.size(); ++i)
          note(f.terms[i], it->second[i], bound, free_sorts);
    } else if (f.kind == K::equal) {
      for (const auto& t : f.terms) infer_term(t, bound, free_sorts);
      auto a = known_sort(f.terms[0], bound, free_sorts), b = known_sort(f.terms[1], bound, free_sorts);
      if (a && !b) note(f.terms[1], *a, bound, free_sorts);
      if (b && !a) note(f.terms[0], *b, bound, free_sorts);
    }
    if (f.kind == K::forall || f.kind == K::exists) bound[f.name] = f.sort;
    for (const auto& s : f.subs) infer_free(s, bound, free_sorts);
  }

  std::string term_sort(const FTerm& t) const {
    if (t.kind == FTerm::Kind::variable) {
      auto it = scope_.find(t.name);
      if (it == scope_.end()) throw SignatureMismatch("unbound variable " + t.name);
      return it->second.second;
    }
    if (t.kind == FTerm::Kind::apply) {
      auto it = sig_.functions.find(t.name);
      if (it == sig_.functions.end()) throw SignatureMismatch("unknown function " + t.name);
      return it->second.second;
    }
    throw SignatureMismatch("the sort of constant " + t.name + " is not determined by its position");
  }

  CTerm term(const FTerm& t, const std::string& expected) {
    switch (t.kind) {
      case FTerm::Kind::variable: {
        auto it = scope_.find(t.name);
        if (it == scope_.end()) throw SignatureMismatch("unbound variable " + t.name);
        if (it->second.second != expected)
          throw SignatureMismatch("variable " + t.name + " has sort " + it->second.second + ", expected " + expected);
        return {CTerm::Kind::slot, it->second.first, {}};
      }
      case FTerm::Kind::constant: {
        for (std::size_t i = 0; i < constants_.size(); ++i)
          if (constants_[i].name == t.name && constants_[i].sort == expected) return {CTerm::Kind::constant, i, {}};
        constants_.push_back({t.name, expected});
        return {CTerm::Kind::constant, constants_.size() - 1, {}};
      }
      case FTerm::Kind::apply: {
        auto it = sig_.functions.find(t.name);
        if (it == sig_.functions.end()) throw SignatureMismatch("unknown function " + t.name);
        const auto& [dom, cod] = it->second;
        if (dom.size() != t.args.size()) throw SignatureMismatch("function " + t.name + " applied to wrong arity");
        if (cod != expected) throw SignatureMismatch("function " + t.name + " has sort " + cod);
        CTerm c{CTerm::Kind::apply, fn_ids_.at(t.name), {}};
        for (std::size_t i = 0; i < dom.size(); ++i) c.args.push_back(term(t.args[i], dom[i]));
        return c;
      }
    }
    throw SignatureMismatch("bad term");
  }

  CNode node(const Formula& f) {
    using K = Formula::Kind;
    CNode n{f.kind, 0, 0, {}, {}};
    switch (f.kind) {
      case K::truth:
      case K::falsity: break;
      case K::relation: {
        auto it = sig_.relations.find(f.name);
        if (it == sig_.relations.end()) throw SignatureMismatch("unknown relation " + f.name);
        if (it->second.size() != f.terms.size()) throw SignatureMismatch("relation " + f.name + " applied to wrong arity");
        n.id = rel_ids_.at(f.name);
        for (std::size_t i = 0; i < f.terms.size(); ++i) n.terms.push_back(term(f.terms[i], it->second[i]));
        break;
      }
      case K::equal: {
        std::string s;
        if (f.terms[0].kind != FTerm::Kind::constant)
          s = term_sort(f.terms[0]);
        else
          s = term_sort(f.terms[1]);
        n.terms.push_back(term(f.terms[0], s));
        n.terms.push_back(term(f.terms[1], s));
        break;
      }
      case K::forall:
      case K::exists: {
        auto sid = sort_ids_.find(f.sort);
        if (sid == sort_ids_.end()) throw SignatureMismatch("unknown sort " + f.sort);
        n.sort = sid->second;
        n.id = slot_count_++;
        auto saved = scope_.find(f.name) == scope_.end() ? std::nullopt : std::optional(scope_[f.name]);
        scope_[f.name] = {n.id, f.sort};
        n.subs.push_back(node(f.subs[0]));
        if (saved)
          scope_[f.name] = *saved;
        else
          scope_.erase(f.name);
        break;
      }
      default:
        for (const auto& s : f.subs) n.subs.push_back(node(s));
    }
    return n;
  }

  static std::size_t value(const CTerm& t, const ModelTables& m, const std::vector<std::size_t>& consts,
                           const std::vector<std::size_t>& env) {
    switch (t.kind) {
      case CTerm::Kind::slot: return env[t.id];
      case CTerm::Kind::constant: return consts[t.id];
      case CTerm::Kind::apply: {
        const auto& tab = m.function(t.id);
        std::size_t o = 0;
        for (std::size_t i = 0; i < t.args.size(); ++i) o += value(t.args[i], m, consts, env) * tab.strides[i];
        return tab.cells[o];
      }
    }
    return 0;
  }

  static bool eval(const CNode& n, const ModelTables& m, const std::vector<std::size_t>& consts,
                   std::vector<std::size_t>& env) {
    using K = Formula::Kind;
    switch (n.kind) {
      case K::truth: return true;
      case K::falsity: return false;
      case K::relation: {
        const auto& tab = m.relation(n.id);
        std::size_t o = 0;
        for (std::size_t i = 0; i < n.terms.size(); ++i) o += value(n.terms[i], m, consts, env) * tab.strides[i];
        return tab.cells[o] != 0;
      }
      case K::equal: return value(n.terms[0], m, consts, env) == value(n.terms[1], m, consts, env);
      case K::not_: return !eval(n.subs[0], m, consts, env);
      case K::and_:
        for (const auto& s : n.subs)
          if (!eval(s, m, consts, env)) return false;
        return true;
      case K::or_:
        for (const auto& s : n.subs)
          if (eval(s, m, consts, env)) return true;
        return false;
      case K::implies: return !eval(n.subs[0], m, consts, env) || eval(n.subs[1], m, consts, env);
      case K::forall:
      case K::exists: {
        const bool want = n.kind == K::exists;
        const std::size_t size = m.carrier_size(n.sort);
        for (std::size_t v = 0; v < size; ++v) {
          env[n.id] = v;
          if (eval(n.subs[0], m, consts, env) == want) return want;
        }
        return !want;
      }
    }
    return false;
  }

  Signature sig_;
  std::map<std::string, std::size_t> sort_ids_, rel_ids_, fn_ids_;
  std::map<std::string, std::pair<std::size_t, std::string>> scope_;
  std::vector<Slot> free_, constants_;
  std::size_t slot_count_ = 0;
  CNode root_;
};

/// Assignment of free variables to element names.
using Environment = std::map<std::string, std::string>;

/// Truth of φ in M under env, by exhaustive expansion of the quantifiers.
inline bool eval_standard(const FiniteModel& m, const Formula& phi, const Environment& env = {}) {
  const Signature sig = m.signature();
  std::map<std::string, std::string> hints;
  for (const auto& [v, el] : env)
    for (const auto& [c, car] : m.carriers)
      if (std::find(car.elements.begin(), car.elements.end(), el) != car.elements.end()) {
        hints.emplace(v, c);
        break;
      }
  CompiledFormula cf(phi, sig, hints);
  ModelTables tables(m, sig);
  std::vector<std::size_t> consts, frees;
  for (const auto& c : cf.constants()) consts.push_back(m.index_of(c.sort, c.name));
  for (const auto& v : cf.free_variables()) {
    auto it = env.find(v.name);
    if (it == env.end()) throw InvalidInput("no value for free variable " + v.name);
    frees.push_back(m.index_of(v.sort, it->second));
  }
  return cf.evaluate(tables, consts, frees);
}

// ---------------------------------------------------------------- ultrapower

/// M^S modulo the principal ultrafilter at `point`, with representatives and
/// the embedding ν : a ↦ [constant a].
struct FiniteUltrapower {
  std::size_t index_count = 1;
  std::size_t point = 0;
  FiniteModel model;
  std::map<std::string, std::vector<Tuple>> representatives;
  std::map<std::string, std::vector<std::size_t>> nu;

  /// Membership of a subset of S (bit s set for s in the subset).
  bool in_ultrafilter(std::uint64_t subset) const noexcept { return (subset >> point) & 1u; }

  static std::uint64_t agreement(const Tuple& a, const Tuple& b) {
    std::uint64_t mask = 0;
    for (std::size_t s = 0; s < a.size(); ++s)
      if (a[s] == b[s]) mask |= std::uint64_t{1} << s;
    return mask;
  }

  /// Class of an S-indexed family of elements of `carrier`.
  std::size_t class_of(const std::string& carrier, const Tuple& family) const {
    const auto& reps = representatives.at(carrier);
    for (std::size_t c = 0; c < reps.size(); ++c)
      if (in_ultrafilter(agreement(reps[c], family))) return c;
    throw InvalidInput("family is not an element of the power of " + carrier);
  }
};

namespace detail {

inline std::string class_name(const FiniteModel& m, const std::string& carrier, const Tuple& rep) {
  std::string s = "<";
  for (std::size_t i = 0; i < rep.size(); ++i) s += (i ? "," : "") + m.element_name(carrier, rep[i]);
  return s + ">";
}

}  // namespace detail

inline FiniteUltrapower build_finite_ultrapower(const FiniteModel& m, std::size_t index_count, std::size_t point) {
  if (index_count == 0 || index_count > 63) throw InvalidInput("index set size must be between 1 and 63");
  if (point >= index_count) throw InvalidInput("ultrafilter point lies outside the index set");
  m.validate();
  FiniteUltrapower u;
  u.index_count = index_count;
  u.point = point;

  for (const auto& [name, car] : m.carriers) {
    auto& reps = u.representatives[name];
    const std::size_t a = car.elements.size();
    for (const Tuple& fam : all_tuples(std::vector<std::size_t>(index_count, a))) {
      bool known = false;
      for (const auto& r : reps)
        if (u.in_ultrafilter(FiniteUltrapower::agreement(r, fam))) {
          known = true;
          break;
        }
      if (!known) reps.push_back(fam);
    }
    std::vector<std::string> names;
    for (const auto& r : reps) names.push_back(detail::class_name(m, name, r));
    if (names.empty())
      u.model.add_empty_carrier(name);
    else
      u.model.add_carrier(name, std::move(names));
    auto& nu = u.nu[name];
    for (std::size_t e = 0; e < a; ++e) nu.push_back(u.class_of(name, Tuple(index_count, e)));
  }

  auto sizes_of = [&](const std::vector<std::string>& sorts) {
    std::vector<std::size_t> out;
    for (const auto& s : sorts) out.push_back(u.representatives[s].size());
    return out;
  };

  for (const auto& [name, rel] : m.relations) {
    std::set<Tuple> lifted;
    for (const Tuple& classes : all_tuples(sizes_of(rel.sorts))) {
      std::uint64_t holds = 0;
      for (std::size_t s = 0; s < index_count; ++s) {
        Tuple at;
        for (std::size_t i = 0; i < classes.size(); ++i) at.push_back(u.representatives[rel.sorts[i]][classes[i]][s]);
        if (rel.tuples.count(at)) holds |= std::uint64_t{1} << s;
      }
      if (u.in_ultrafilter(holds)) lifted.insert(classes);
    }
    u.model.add_relation(name, rel.sorts, std::move(lifted));
  }

  for (const auto& [name, fn] : m.functions) {
    std::map<Tuple, std::size_t> graph;
    for (const Tuple& classes : all_tuples(sizes_of(fn.domain))) {
      Tuple image(index_count);
      for (std::size_t s = 0; s < index_count; ++s) {
        Tuple at;
        for (std::size_t i = 0; i < classes.size(); ++i) at.push_back(u.representatives[fn.domain[i]][classes[i]][s]);
        image[s] = fn.graph.at(at);
      }
      graph[classes] = u.class_of(fn.codomain, image);
    }
    u.model.add_function(name, fn.domain, fn.codomain, std::move(graph));
  }
  return u;
}

// ------------------------------------------------------------------ transfer

struct TransferReport {
  bool standard = false;
  bool star = false;
  bool agree() const noexcept { return standard == star; }
};

/// Evaluates a compiled sentence in M and in its ultrapower, constants read
/// through ν on the ultrapower side.
inline TransferReport transfer_values(const CompiledFormula& cf, const FiniteModel& m, const ModelTables& standard,
                                      const FiniteUltrapower& u, const ModelTables& star) {
  if (!cf.free_variables().empty()) throw InvalidInput("transfer needs a sentence");
  std::vector<std::size_t> consts, star_consts;
  for (const auto& c : cf.constants()) {
    consts.push_back(m.index_of(c.sort, c.name));
    star_consts.push_back(u.nu.at(c.sort)[consts.back()]);
  }
  return {cf.evaluate(standard, consts), cf.evaluate(star, star_consts)};
}

inline TransferReport check_transfer(const FiniteModel& m, std::size_t index_count, std::size_t point,
                                     const Formula& sentence) {
  if (!sentence.is_sentence()) throw InvalidInput("transfer needs a sentence");
  const FiniteUltrapower u = build_finite_ultrapower(m, index_count, point);
  const Signature sig = m.signature();
  CompiledFormula cf(sentence, sig);
  return transfer_values(cf, m, ModelTables(m, sig), u, ModelTables(u.model, sig));
}

// ------------------------------------------------------------- functor laws

struct LawTally {
  std::size_t instances = 0;
  std::size_t failures = 0;
};

struct FunctorLawReport {
  std::map<std::string, LawTally> laws;
  std::vector<std::string> failures;

  std::size_t instances() const {
    std::size_t n = 0;
    for (const auto& [_, t] : laws) n += t.instances;
    return n;
  }
  std::size_t failure_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : laws) n += t.failures;
    return n;
  }
  bool passed() const { return failure_count() == 0; }

  void record(const std::string& law, bool ok, const std::string& detail) {
    auto& t = laws[law];
    ++t.instances;
    if (!ok) {
      ++t.failures;
      if (failures.size() < 20) failures.push_back(law + ": " + detail);
    }
  }

  void merge(const FunctorLawReport& other) {
    for (const auto& [k, t] : other.laws) {
      laws[k].instances += t.instances;
      laws[k].failures += t.failures;
    }
    for (const auto& f : other.failures)
      if (failures.size() < 20) failures.push_back(f);
  }
};

namespace detail {

/// Every map from a set of size `c` to one of size `d`, as value lists.
inline std::vector<Tuple> all_maps(std::size_t c, std::size_t d) { return all_tuples(std::vector<std::size_t>(c, d)); }

inline std::map<Tuple, std::size_t> graph_of(const Tuple& values) {
  std::map<Tuple, std::size_t> g;
  for (std::size_t i = 0; i < values.size(); ++i) g[{i}] = values[i];
  return g;
}

inline std::size_t apply_lifted(const FiniteUltrapower& u, const std::string& f, std::size_t x) {
  return u.model.functions.at(f).graph.at({x});
}

inline std::string sizes_label(std::initializer_list<std::size_t> sizes, std::size_t s, std::size_t s0) {
  std::string out = "sizes";
  for (auto z : sizes) out += " " + std::to_string(z);
  return out + ", |S|=" + std::to_string(s) + ", s0=" + std::to_string(s0);
}

}  // namespace detail

/// Brute-force check of preservation of finite limits on all sets of size
/// ≤ k: ν is a bijection (fin), lifted projections exhibit a product,
/// lifted maps have the lifted equalizer. Also records *∅ = ∅ and
/// nonemptiness (empty), the diagonal (diagonal) and monotonicity of
/// subsets (monotone).
inline FunctorLawReport check_functor_laws(std::size_t index_count, std::size_t point, std::size_t k) {
  if (k < 1) throw InvalidInput("size bound must be at least 1");
  FunctorLawReport rep;

  for (std::size_t a = 0; a <= k; ++a) {
    const auto label = detail::sizes_label({a}, index_count, point);
    FiniteModel m;
    m.add_carrier("A", a);
    std::set<Tuple> diag;
    for (std::size_t i = 0; i < a; ++i) diag.insert({i, i});
    m.add_relation("D", {"A", "A"}, diag);
    const auto u = build_finite_ultrapower(m, index_count, point);
    const auto& nu = u.nu.at("A");
    const std::size_t star_a = u.model.size("A");
    std::set<std::size_t> image(nu.begin(), nu.end());
    rep.record("fin", image.size() == a && star_a == a && nu.size() == a, label);
    rep.record("empty", (a == 0) == (star_a == 0), label);
    std::set<Tuple> star_diag;
    for (std::size_t i = 0; i < star_a; ++i) star_diag.insert({i, i});
    rep.record("diagonal", u.model.relations.at("D").tuples == star_diag, label);
  }

  for (std::size_t a = 0; a <= k; ++a)
    for (std::size_t b = 0; b <= k; ++b) {
      FiniteModel m;
      m.add_carrier("A", a).add_carrier("B", b).add_carrier("P", a * b);
      std::map<Tuple, std::size_t> p1, p2;
      for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) {
          p1[{i * b + j}] = i;
          p2[{i * b + j}] = j;
        }
      m.add_function("p1", {"P"}, "A", p1).add_function("p2", {"P"}, "B", p2);
      const auto u = build_finite_ultrapower(m, index_count, point);
      std::set<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t c = 0; c < u.model.size("P"); ++c)
        pairs.insert({detail::apply_lifted(u, "p1", c), detail::apply_lifted(u, "p2", c)});
      const bool bijective = pairs.size() == u.model.size("P") && pairs.size() == u.model.size("A") * u.model.size("B");
      rep.record("product", bijective, detail::sizes_label({a, b}, index_count, point));
    }

  for (std::size_t c = 0; c <= k; ++c) {
    for (std::size_t d = 0; d <= k; ++d) {
      const auto maps = detail::all_maps(c, d);
      for (const auto& f1 : maps)
        for (const auto& f2 : maps) {
          std::vector<std::size_t> eq;
          for (std::size_t i = 0; i < c; ++i)
            if (f1[i] == f2[i]) eq.push_back(i);
          FiniteModel m;
          m.add_carrier("C", c).add_carrier("D", d).add_carrier("E", eq.size());
          m.add_function("f1", {"C"}, "D", detail::graph_of(f1)).add_function("f2", {"C"}, "D", detail::graph_of(f2));
          m.add_function("i", {"E"}, "C", detail::graph_of(eq));
          const auto u = build_finite_ultrapower(m, index_count, point);
          std::set<std::size_t> included, equalized;
          for (std::size_t e = 0; e < u.model.size("E"); ++e) included.insert(detail::apply_lifted(u, "i", e));
          for (std::size_t x = 0; x < u.model.size("C"); ++x)
            if (detail::apply_lifted(u, "f1", x) == detail::apply_lifted(u, "f2", x)) equalized.insert(x);
          const bool ok = included.size() == u.model.size("E") && included == equalized;
          rep.record("equalizer", ok, detail::sizes_label({c, d}, index_count, point));
        }
    }
    // E ⊆ E' ⊆ C as unary relations: *E ⊆ *E'.
    for (std::uint32_t e = 0; e < (1u << c); ++e)
      for (std::uint32_t e2 = e;; e2 = (e2 + 1) | e) {
        FiniteModel m;
        m.add_carrier("C", c);
        std::set<Tuple> small, big;
        for (std::size_t i = 0; i < c; ++i) {
          if (e >> i & 1) small.insert({i});
          if (e2 >> i & 1) big.insert({i});
        }
        m.add_relation("E", {"C"}, small).add_relation("F", {"C"}, big);
        const auto u = build_finite_ultrapower(m, index_count, point);
        const auto& se = u.model.relations.at("E").tuples;
        const auto& sf = u.model.relations.at("F").tuples;
        rep.record("monotone", std::includes(sf.begin(), sf.end(), se.begin(), se.end()),
                   detail::sizes_label({c}, index_count, point));
        if (e2 == (1u << c) - 1) break;
      }
  }
  return rep;
}

/// All index set sizes 1..max_index and every point of each.
inline FunctorLawReport check_functor_laws_all(std::size_t max_index, std::size_t k) {
  FunctorLawReport rep;
  for (std::size_t s = 1; s <= max_index; ++s)
    for (std::size_t p = 0; p < s; ++p) rep.merge(check_functor_laws(s, p, k));
  return rep;
}

// ------------------------------------------------------- ∃ commutes with *

struct ExistsReport {
  std::set<Tuple> lhs;  // * of the projection
  std::set<Tuple> rhs;  // projection of the lifted relation
  bool skolem_lifts = false;
  bool equal() const { return lhs == rhs; }
  bool passed() const { return equal() && skolem_lifts; }
};

/// Compares *[∃x₁ R(x₁, x₂…xₙ)] with ∃ξ₁ *R(ξ₁, ξ₂…ξₙ) in the ultrapower and
/// checks that a witness map j : P → A₁ lifts to a witness map for *R.
inline ExistsReport check_exists_commutation(const FiniteModel& m, std::size_t index_count, std::size_t point,
                                             const std::string& relation) {
  auto rit = m.relations.find(relation);
  if (rit == m.relations.end()) throw SignatureMismatch("no relation named " + relation);
  const auto& rel = rit->second;
  if (rel.sorts.empty()) throw InvalidInput("relation must have at least one argument");
  const std::vector<std::string> rest(rel.sorts.begin() + 1, rel.sorts.end());

  std::map<Tuple, std::size_t> witness;
  for (const auto& t : rel.tuples) witness.emplace(Tuple(t.begin() + 1, t.end()), t[0]);
  std::set<Tuple> projection;
  for (const auto& [p, _] : witness) projection.insert(p);

  FiniteModel ext = m;
  const std::string proj_name = relation + "'proj";
  ext.add_relation(proj_name, rest, projection);
  const auto u = build_finite_ultrapower(ext, index_count, point);

  ExistsReport rep;
  rep.lhs = u.model.relations.at(proj_name).tuples;
  const auto& star_r = u.model.relations.at(relation).tuples;
  for (const auto& t : star_r) rep.rhs.insert(Tuple(t.begin() + 1, t.end()));

  rep.skolem_lifts = true;
  for (const auto& xi : rep.lhs) {
    Tuple family(index_count, 0);
    for (std::size_t s = 0; s < index_count; ++s) {
      Tuple at;
      for (std::size_t i = 0; i < xi.size(); ++i) at.push_back(u.representatives.at(rest[i])[xi[i]][s]);
      auto w = witness.find(at);
      family[s] = w == witness.end() ? 0 : w->second;
    }
    Tuple full{u.class_of(rel.sorts[0], family)};
    full.insert(full.end(), xi.begin(), xi.end());
    if (!star_r.count(full)) rep.skolem_lifts = false;
  }
  return rep;
}

// --------------------------------------------------------- sentence battery

namespace detail {

inline Formula battery_atom(std::size_t i) {
  const auto x = FTerm::var("x"), y = FTerm::var("y");
  switch (i) {
    case 0: return Formula::rel("R", {x, y});
    case 1: return Formula::rel("R", {y, x});
    case 2: return Formula::rel("R", {x, x});
    case 3: return Formula::rel("R", {y, y});
    default: return Formula::eq(x, y);
  }
}

/// Quantifier-free formulas over `atoms` with at most `max_connectives`
/// uses of not/and/or/implies, one per truth table: the first found when
/// building up by connective count.
inline std::vector<Formula> distinct_matrices(const std::vector<Formula>& atoms, int max_connectives) {
  const std::size_t rows = std::size_t{1} << atoms.size();
  using Table = std::vector<bool>;
  std::map<Table, std::size_t> seen;
  std::vector<Formula> out;
  std::vector<std::vector<std::pair<Table, std::size_t>>> levels(max_connectives + 1);
  auto add = [&](int level, Table t, Formula f) {
    if (seen.count(t)) return;
    seen.emplace(t, out.size());
    levels[level].push_back({std::move(t), out.size()});
    out.push_back(std::move(f));
  };
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Table t(rows);
    for (std::size_t r = 0; r < rows; ++r) t[r] = (r >> i) & 1;
    add(0, std::move(t), atoms[i]);
  }
  for (int c = 1; c <= max_connectives; ++c) {
    for (std::size_t j = 0; j < levels[c - 1].size(); ++j) {
      auto [t, idx] = levels[c - 1][j];
      for (std::size_t r = 0; r < rows; ++r) t[r] = !t[r];
      add(c, std::move(t), Formula::negation(out[idx]));
    }
    for (int c1 = 0; c1 < c; ++c1) {
      const int c2 = c - 1 - c1;
      const std::size_t n1 = levels[c1].size(), n2 = levels[c2].size();
      for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j) {
          const auto &[ta, ia] = levels[c1][i];
          const auto &[tb, ib] = levels[c2][j];
          Table land(rows), lor(rows), limp(rows);
          for (std::size_t r = 0; r < rows; ++r) {
            land[r] = ta[r] && tb[r];
            lor[r] = ta[r] || tb[r];
            limp[r] = !ta[r] || tb[r];
          }
          Formula fa = out[ia], fb = out[ib];
          add(c, std::move(land), Formula::conj({fa, fb}));
          add(c, std::move(lor), Formula::disj({fa, fb}));
          add(c, std::move(limp), Formula::implies(fa, fb));
        }
    }
  }
  return out;
}

inline Formula quantify(bool exists, const std::string& v, Formula f) {
  return exists ? Formula::exists(v, "A", std::move(f)) : Formula::forall(v, "A", std::move(f));
}

}  // namespace detail

/// The one-sorted signature {A; R ⊆ A×A} the transfer battery is built over.
inline Signature battery_signature() {
  Signature s;
  s.sorts = {"A"};
  s.relations["R"] = {"A", "A"};
  return s;
}

/// Deterministic sentence battery over battery_signature(): quantifier depth
/// ≤ 2, at most 3 connectives.
///  - true, false;
///  - Qx M(x) for every distinct matrix over R(x,x), x=x;
///  - Qx Qy M(x,y) for every distinct matrix over R(x,y), R(y,x), R(x,x),
///    R(y,y), x=y;
///  - connectives above quantifiers: negations and binary combinations of
///    Qx α(x) with α a literal, and Qx (α(x) op Qy β(x,y)) in both argument
///    orders and Qx ¬Qy β(x,y) with α, β literals.
inline std::vector<Formula> transfer_battery() {
  std::vector<Formula> out{Formula::truth(), Formula::falsity()};
  const auto x = FTerm::var("x");

  const std::vector<Formula> unary_atoms{Formula::rel("R", {x, x}), Formula::eq(x, x)};
  for (const auto& mtx : detail::distinct_matrices(unary_atoms, 3))
    for (bool q : {false, true}) out.push_back(detail::quantify(q, "x", mtx));

  std::vector<Formula> binary_atoms;
  for (std::size_t i = 0; i < 5; ++i) binary_atoms.push_back(detail::battery_atom(i));
  for (const auto& mtx : detail::distinct_matrices(binary_atoms, 3))
    for (bool q1 : {false, true})
      for (bool q2 : {false, true}) out.push_back(detail::quantify(q1, "x", detail::quantify(q2, "y", mtx)));

  auto binop = [](int op, Formula a, Formula b) {
    if (op == 0) return Formula::conj({std::move(a), std::move(b)});
    if (op == 1) return Formula::disj({std::move(a), std::move(b)});
    return Formula::implies(std::move(a), std::move(b));
  };

  std::vector<Formula> x_literals{Formula::rel("R", {x, x}), Formula::negation(Formula::rel("R", {x, x}))};
  std::vector<Formula> simple;
  for (const auto& a : x_literals)
    for (bool q : {false, true}) simple.push_back(detail::quantify(q, "x", a));
  for (const auto& s : simple) out.push_back(Formula::negation(s));
  for (const auto& s : simple)
    for (const auto& t : simple)
      for (int op = 0; op < 3; ++op) out.push_back(binop(op, s, t));

  std::vector<Formula> xy_literals;
  for (std::size_t i = 0; i < 5; ++i) {
    xy_literals.push_back(detail::battery_atom(i));
    xy_literals.push_back(Formula::negation(detail::battery_atom(i)));
  }
  for (bool q1 : {false, true})
    for (bool q2 : {false, true})
      for (const auto& b : xy_literals) {
        Formula inner = detail::quantify(q2, "y", b);
        out.push_back(detail::quantify(q1, "x", Formula::negation(inner)));
        for (const auto& a : x_literals)
          for (int op = 0; op < 3; ++op) {
            out.push_back(detail::quantify(q1, "x", binop(op, a, inner)));
            out.push_back(detail::quantify(q1, "x", binop(op, inner, a)));
          }
      }
  return out;
}

/// Every model of battery_signature() with |A| ≤ max_size, in order of size
/// and then relation bitmask.
inline std::vector<FiniteModel> battery_models(std::size_t max_size) {
  std::vector<FiniteModel> out;
  for (std::size_t a = 0; a <= max_size; ++a) {
    const std::size_t cells = a * a;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
      FiniteModel m;
      m.add_carrier("A", a);
      std::set<Tuple> r;
      for (std::size_t c = 0; c < cells; ++c)
        if (mask >> c & 1) r.insert({c / a, c % a});
      m.add_relation("R", {"A", "A"}, std::move(r));
      out.push_back(std::move(m));
    }
  }
  return out;
}

struct TransferBatteryReport {
  std::size_t sentences = 0;
  std::size_t models = 0;
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::size_t empty_carrier_instances = 0;
  std::vector<std::string> failure_details;
  bool passed() const noexcept { return failures == 0 && instances > 0; }
};

/// Transfer over every (model, sentence, |S| ≤ max_index, point) combination.
inline TransferBatteryReport run_transfer_battery(const std::vector<FiniteModel>& models,
                                                  const std::vector<Formula>& sentences, std::size_t max_index) {
  TransferBatteryReport rep;
  rep.sentences = sentences.size();
  rep.models = models.size();
  if (models.empty()) return rep;
  const Signature sig = models.front().signature();
  std::vector<CompiledFormula> compiled;
  compiled.reserve(sentences.size());
  for (const auto& s : sentences) compiled.emplace_back(s, sig);

  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto& m = models[mi];
    const ModelTables standard(m, sig);
    const bool empty = std::any_of(m.carriers.begin(), m.carriers.end(),
                                   [](const auto& c) { return c.second.elements.empty(); });
    for (std::size_t s = 1; s <= max_index; ++s)
      for (std::size_t p = 0; p < s; ++p) {
        const auto u = build_finite_ultrapower(m, s, p);
        const ModelTables star(u.model, sig);
        for (std::size_t i = 0; i < compiled.size(); ++i) {
          const auto r = transfer_values(compiled[i], m, standard, u, star);
          ++rep.instances;
          if (empty) ++rep.empty_carrier_instances;
          if (!r.agree()) {
            ++rep.failures;
            if (rep.failure_details.size() < 20)
              rep.failure_details.push_back("model " + std::to_string(mi) + ", |S|=" + std::to_string(s) +
                                            ", s0=" + std::to_string(p) + ": " + sentences[i].str());
          }
        }
      }
  }
  return rep;
}

}  // namespace nsa
