#pragma once
#ifndef FLUXCOMPOSE_TERM_HPP
#define FLUXCOMPOSE_TERM_HPP

// First-order terms, substitutions, unification and the fluent-calculus
// state Z (world fluents plus know(.) knowledge fluents).

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fluxcompose/error.hpp"

namespace fluxcompose {

class Term {
 public:
  enum class Kind { Constant, Variable, Compound };

  Term() = default;

  static Term constant(std::string name) { return Term(Kind::Constant, std::move(name), {}); }
  static Term variable(std::string name) { return Term(Kind::Variable, std::move(name), {}); }
  /// A compound with no arguments collapses to a constant, so `f` and `f()`
  /// denote the same 0-ary fluent.
  static Term compound(std::string functor, std::vector<Term> args) {
    if (args.empty()) return constant(std::move(functor));
    return Term(Kind::Compound, std::move(functor), std::move(args));
  }

  Kind kind() const { return kind_; }
  bool isConstant() const { return kind_ == Kind::Constant; }
  bool isVariable() const { return kind_ == Kind::Variable; }
  bool isCompound() const { return kind_ == Kind::Compound; }
  /// Placeholders are constants whose name starts with '#'.
  bool isPlaceholder() const { return isConstant() && !name_.empty() && name_.front() == '#'; }

  /// Constant/variable name, or the functor of a compound.
  const std::string& name() const { return name_; }
  const std::vector<Term>& args() const { return args_; }
  std::size_t arity() const { return args_.size(); }

  bool isGround() const {
    if (isVariable()) return false;
    return std::all_of(args_.begin(), args_.end(), [](const Term& t) { return t.isGround(); });
  }

  void collectVariables(std::vector<std::string>& out) const {
    if (isVariable()) {
      if (std::find(out.begin(), out.end(), name_) == out.end()) out.push_back(name_);
      return;
    }
    for (const auto& a : args_) a.collectVariables(out);
  }

  std::vector<std::string> variables() const {
    std::vector<std::string> out;
    collectVariables(out);
    return out;
  }

  std::string str() const {
    if (!isCompound()) return name_;
    std::string out = name_ + "(";
    for (std::size_t i = 0; i < args_.size(); ++i) {
      if (i) out += ",";
      out += args_[i].str();
    }
    return out + ")";
  }

  friend bool operator==(const Term& a, const Term& b) {
    return a.kind_ == b.kind_ && a.name_ == b.name_ && a.args_ == b.args_;
  }

  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    if (auto c = a.name_.compare(b.name_); c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    const std::size_t n = std::min(a.args_.size(), b.args_.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (auto c = a.args_[i] <=> b.args_[i]; c != 0) return c;
    }
    return a.args_.size() <=> b.args_.size();
  }

 private:
  Term(Kind kind, std::string name, std::vector<Term> args)
      : kind_(kind), name_(std::move(name)), args_(std::move(args)) {}

  Kind kind_ = Kind::Constant;
  std::string name_;
  std::vector<Term> args_;
};

/// know(t)
inline Term know(Term t) { return Term::compound("know", {std::move(t)}); }
inline bool isKnowledge(const Term& t) { return t.isCompound() && t.name() == "know" && t.arity() == 1; }

/// Deterministic placeholder for output `param` of `action` produced at step
/// `seq` (1-based).
inline Term makePlaceholder(const std::string& action, const std::string& param, std::size_t seq) {
  return Term::constant("#out_" + action + "_" + param + "_" + std::to_string(seq));
}

/// Variable bindings kept in resolved form: no bound variable occurs in any
/// binding's right-hand side, so apply() is idempotent.
class Substitution {
 public:
  using Map = std::map<std::string, Term>;

  Substitution() = default;
  explicit Substitution(Map bindings) : bindings_(std::move(bindings)) { normalize(); }

  const Map& bindings() const { return bindings_; }
  bool empty() const { return bindings_.empty(); }
  std::size_t size() const { return bindings_.size(); }

  const Term* lookup(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
  }
  bool binds(const std::string& var) const { return bindings_.count(var) != 0; }

  Term apply(const Term& t) const {
    if (t.isVariable()) {
      auto it = bindings_.find(t.name());
      return it == bindings_.end() ? t : apply(it->second);
    }
    if (!t.isCompound()) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const auto& a : t.args()) args.push_back(apply(a));
    return Term::compound(t.name(), std::move(args));
  }

  /// Binds var to t (already walked). Caller guarantees var is unbound and
  /// the occurs check passed.
  void bindRaw(const std::string& var, Term t) { bindings_.emplace(var, std::move(t)); }

  void normalize() {
    Map resolved;
    for (const auto& [v, t] : bindings_) resolved.emplace(v, apply(t));
    bindings_ = std::move(resolved);
  }

  /// Restriction to the given variables.
  Substitution restrictedTo(const std::vector<std::string>& vars) const {
    Map out;
    for (const auto& v : vars) {
      if (auto* t = lookup(v)) out.emplace(v, *t);
    }
    Substitution s;
    s.bindings_ = std::move(out);
    return s;
  }

  std::string str() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [v, t] : bindings_) {
      if (!first) out += ", ";
      first = false;
      out += v + "->" + t.str();
    }
    return out + "}";
  }

  friend bool operator==(const Substitution&, const Substitution&) = default;
  friend auto operator<=>(const Substitution& a, const Substitution& b) { return a.bindings_ <=> b.bindings_; }

 private:
  Map bindings_;
};

namespace detail {

inline Term walk(const Term& t, const Substitution& s) {
  Term cur = t;
  while (cur.isVariable()) {
    const Term* next = s.lookup(cur.name());
    if (!next) break;
    cur = *next;
  }
  return cur;
}

inline bool occurs(const std::string& var, const Term& t, const Substitution& s) {
  Term w = walk(t, s);
  if (w.isVariable()) return w.name() == var;
  for (const auto& a : w.args()) {
    if (occurs(var, a, s)) return true;
  }
  return false;
}

inline bool unifyInto(const Term& a, const Term& b, Substitution& s) {
  Term x = walk(a, s);
  Term y = walk(b, s);
  if (x.isVariable() && y.isVariable() && x.name() == y.name()) return true;
  if (x.isVariable()) {
    if (occurs(x.name(), y, s)) return false;
    s.bindRaw(x.name(), std::move(y));
    return true;
  }
  if (y.isVariable()) {
    if (occurs(y.name(), x, s)) return false;
    s.bindRaw(y.name(), std::move(x));
    return true;
  }
  if (x.kind() != y.kind() || x.name() != y.name() || x.arity() != y.arity()) return false;
  for (std::size_t i = 0; i < x.arity(); ++i) {
    if (!unifyInto(x.args()[i], y.args()[i], s)) return false;
  }
  return true;
}

}  // namespace detail

/// Most general unifier of t1 and t2 extending subst, or nullopt when the
/// terms clash or the occurs check fires.
inline std::optional<Substitution> unify(const Term& t1, const Term& t2, const Substitution& subst = {}) {
  Substitution s = subst;
  if (!detail::unifyInto(t1, t2, s)) return std::nullopt;
  s.normalize();
  return s;
}

/// World fluents plus knowledge fluents know(.), both ground and
/// duplicate-free. Iteration follows Term ordering.
class State {
 public:
  State() = default;
  State(std::initializer_list<Term> fluents) {
    for (const auto& f : fluents) insert(f);
  }
  template <typename Range>
  static State of(const Range& fluents) {
    State s;
    for (const auto& f : fluents) s.insert(f);
    return s;
  }

  void insert(const Term& fluent) {
    if (!fluent.isGround()) throw Error("state fluent is not ground: " + fluent.str());
    (isKnowledge(fluent) ? knowledge_ : world_).insert(fluent);
  }
  void erase(const Term& fluent) { (isKnowledge(fluent) ? knowledge_ : world_).erase(fluent); }
  bool contains(const Term& fluent) const {
    const auto& set = isKnowledge(fluent) ? knowledge_ : world_;
    return set.count(fluent) != 0;
  }

  const std::set<Term>& world() const { return world_; }
  const std::set<Term>& knowledge() const { return knowledge_; }
  std::size_t size() const { return world_.size() + knowledge_.size(); }
  bool empty() const { return world_.empty() && knowledge_.empty(); }

  std::vector<Term> fluents() const {
    std::vector<Term> out(world_.begin(), world_.end());
    out.insert(out.end(), knowledge_.begin(), knowledge_.end());
    return out;
  }

  friend bool operator==(const State&, const State&) = default;

 private:
  std::set<Term> world_;
  std::set<Term> knowledge_;
};

/// Substitutions under which pattern matches a world fluent, in fluent order.
inline std::vector<Substitution> holds(const Term& pattern, const State& state, const Substitution& base = {}) {
  std::vector<Substitution> out;
  const Term p = base.apply(pattern);
  for (const auto& f : state.world()) {
    if (auto s = unify(p, f, base)) out.push_back(std::move(*s));
  }
  return out;
}

/// Substitutions under which know(pattern) matches a knowledge fluent.
/// Every value is enumerated; uniqueness is left to the caller.
inline std::vector<Substitution> knowsVal(const Term& pattern, const State& state, const Substitution& base = {}) {
  std::vector<Substitution> out;
  const Term p = know(base.apply(pattern));
  for (const auto& f : state.knowledge()) {
    if (auto s = unify(p, f, base)) out.push_back(std::move(*s));
  }
  return out;
}

/// Order-insensitive text key: fluent texts sorted and joined with '|'.
inline std::string canonicalize(const State& state) {
  std::vector<std::string> parts;
  parts.reserve(state.size());
  for (const auto& f : state.fluents()) parts.push_back(f.str());
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "|";
    out += parts[i];
  }
  return out;
}

namespace detail {

inline bool isMinted(const Term& t) { return t.isConstant() && t.name().rfind("#out_", 0) == 0; }

inline Term maskPlaceholders(const Term& t) {
  if (isMinted(t)) return Term::constant("#");
  if (!t.isCompound()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(maskPlaceholders(a));
  return Term::compound(t.name(), std::move(args));
}

inline void numberPlaceholders(const Term& t, std::map<std::string, std::string>& names) {
  if (isMinted(t)) {
    names.emplace(t.name(), "#" + std::to_string(names.size()));
    return;
  }
  for (const auto& a : t.args()) numberPlaceholders(a, names);
}

inline Term renamePlaceholders(const Term& t, const std::map<std::string, std::string>& names) {
  if (isMinted(t)) return Term::constant(names.at(t.name()));
  if (!t.isCompound()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(renamePlaceholders(a, names));
  return Term::compound(t.name(), std::move(args));
}

}  // namespace detail

/// Like canonicalize, but minted placeholders (#out_...) are renumbered #0,
/// #1, ... in order of first occurrence. The renaming is a bijection, so equal keys imply states
/// equal up to placeholder renaming.
inline std::string canonicalizeUpToPlaceholders(const State& state) {
  std::vector<std::pair<std::string, Term>> ordered;
  for (const auto& f : state.fluents()) ordered.emplace_back(detail::maskPlaceholders(f).str() + "\x1f" + f.str(), f);
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::map<std::string, std::string> names;
  for (const auto& [_, f] : ordered) detail::numberPlaceholders(f, names);
  State renamed;
  for (const auto& [_, f] : ordered) renamed.insert(detail::renamePlaceholders(f, names));
  return canonicalize(renamed);
}

}  // namespace fluxcompose

#endif
