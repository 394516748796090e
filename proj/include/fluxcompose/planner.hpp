#pragma once
#ifndef FLUXCOMPOSE_PLANNER_HPP
#define FLUXCOMPOSE_PLANNER_HPP

// Progression planning over fluent-calculus action schemas.
//
// An action is applicable when its poss atoms hold jointly (solved left to
// right). Its state update removes the instantiated remove list and adds the
// instantiated add list; every other fluent carries over unchanged. Output
// variables of the add list are bound to placeholders minted from the
// action name, the variable and the 1-based step number.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fluxcompose/dsl.hpp"
#include "fluxcompose/error.hpp"
#include "fluxcompose/term.hpp"

namespace fluxcompose {

struct PlanningProblem {
  State initial;
  std::vector<Term> goal;
  std::vector<ActionSchema> actions;

  const ActionSchema* findAction(const std::string& name) const {
    for (const auto& a : actions) {
      if (a.name == name) return &a;
    }
    return nullptr;
  }
};

struct GroundAction {
  std::string name;
  std::vector<Term> args;

  std::string str() const { return Term::compound(name, args).str(); }

  friend bool operator==(const GroundAction&, const GroundAction&) = default;
  friend std::strong_ordering operator<=>(const GroundAction& a, const GroundAction& b) {
    if (auto c = a.name.compare(b.name); c != 0) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::lexicographical_compare_three_way(a.args.begin(), a.args.end(), b.args.begin(), b.args.end());
  }
};

struct Plan {
  std::vector<GroundAction> steps;
  /// Placeholder name -> 0-based index of the producing step.
  std::map<std::string, std::size_t> producedPlaceholders;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Canonical plan order: shorter first, then step by step.
inline bool canonicalLess(const Plan& a, const Plan& b) {
  if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
  return a.steps < b.steps;
}

struct SearchConfig {
  int maxDepth = 8;
  bool pruneVisited = true;
};

class NoPlanFound : public Error {
 public:
  explicit NoPlanFound(int depth) : Error("no plan within depth " + std::to_string(depth)), depth_(depth) {}
  int depth() const { return depth_; }

 private:
  int depth_;
};

class PreconditionViolation : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::vector<Substitution> solveAtom(const PossAtom& atom, const State& state, const Substitution& base) {
  return atom.kind == PossAtom::Kind::Holds ? holds(atom.pattern, state, base) : knowsVal(atom.pattern, state, base);
}

inline std::vector<Substitution> solveConjunction(const std::vector<PossAtom>& atoms, const State& state,
                                                  const Substitution& base = {}) {
  std::vector<Substitution> frontier{base};
  for (const auto& atom : atoms) {
    std::vector<Substitution> next;
    for (const auto& s : frontier) {
      auto ext = solveAtom(atom, state, s);
      next.insert(next.end(), std::make_move_iterator(ext.begin()), std::make_move_iterator(ext.end()));
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return frontier;
}

inline PossAtom goalAtom(const Term& pattern) {
  if (isKnowledge(pattern)) return PossAtom::knowsValAtom(pattern.args()[0]);
  return PossAtom::holdsAtom(pattern);
}

}  // namespace detail

/// Parameter bindings under which every poss atom holds, sorted by the
/// bound argument tuple. Bindings that leave a parameter unground are
/// dropped.
inline std::vector<Substitution> checkPoss(const ActionSchema& schema, const State& state) {
  std::vector<std::pair<std::vector<Term>, Substitution>> found;
  for (auto& s : detail::solveConjunction(schema.poss, state)) {
    std::vector<Term> args;
    bool ground = true;
    for (const auto& p : schema.params) {
      const Term* t = s.lookup(p);
      if (!t || !t->isGround()) {
        ground = false;
        break;
      }
      args.push_back(*t);
    }
    if (ground) found.emplace_back(std::move(args), s.restrictedTo(schema.params));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  found.erase(std::unique(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
              found.end());
  std::vector<Substitution> out;
  out.reserve(found.size());
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

/// Extends subst with fresh placeholders for the schema's output variables.
inline Substitution bindOutputs(const ActionSchema& schema, const Substitution& subst, std::size_t stepNumber) {
  Substitution::Map m = subst.bindings();
  for (const auto& v : schema.outputs()) {
    if (!m.count(v)) m.emplace(v, makePlaceholder(schema.name, v, stepNumber));
  }
  return Substitution(std::move(m));
}

/// Z2 = (Z1 \ removes.subst) + adds.subst. Throws PreconditionViolation if
/// subst does not ground the parameters and outputs or poss fails in Z1.
inline State applyUpdate(const ActionSchema& schema, const Substitution& subst, const State& z1) {
  for (const auto& p : schema.params) {
    const Term* t = subst.lookup(p);
    if (!t || !t->isGround()) throw PreconditionViolation("parameter " + p + " of " + schema.name + " is not bound");
  }
  for (const auto& atom : schema.poss) {
    const Term g = subst.apply(atom.pattern);
    const Term f = atom.kind == PossAtom::Kind::KnowsVal ? know(g) : g;
    if (!f.isGround() || !z1.contains(f)) {
      throw PreconditionViolation(atom.str() + " does not hold for " + schema.name + " under " + subst.str());
    }
  }
  State z2 = z1;
  for (const auto& r : schema.removes) z2.erase(subst.apply(r));
  for (const auto& a : schema.adds) {
    const Term f = subst.apply(a);
    if (!f.isGround()) throw PreconditionViolation("output of " + schema.name + " is not bound: " + f.str());
    z2.insert(f);
  }
  return z2;
}

inline bool satisfiesGoal(const std::vector<Term>& goal, const State& state) {
  std::vector<PossAtom> atoms;
  atoms.reserve(goal.size());
  for (const auto& g : goal) atoms.push_back(detail::goalAtom(g));
  return !detail::solveConjunction(atoms, state).empty();
}

namespace detail {

struct Successor {
  GroundAction action;
  const ActionSchema* schema;
  Substitution subst;  // parameters and outputs bound
};

/// Applicable ground actions in canonical order (name, then arguments).
inline std::vector<Successor> successors(const PlanningProblem& problem, const State& state, std::size_t stepNumber) {
  std::vector<Successor> out;
  for (const auto& schema : problem.actions) {
    for (const auto& s : checkPoss(schema, state)) {
      GroundAction ga{schema.name, {}};
      for (const auto& p : schema.params) ga.args.push_back(*s.lookup(p));
      out.push_back({std::move(ga), &schema, bindOutputs(schema, s, stepNumber)});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.action < b.action; });
  return out;
}

inline void recordPlaceholders(Plan& plan, const Successor& succ, std::size_t stepIndex) {
  for (const auto& v : succ.schema->outputs()) {
    plan.producedPlaceholders.emplace(succ.subst.lookup(v)->name(), stepIndex);
  }
}

class DepthFirst {
 public:
  DepthFirst(const PlanningProblem& problem, bool prune) : problem_(problem), prune_(prune) {}

  std::optional<Plan> run(int limit) {
    limit_ = static_cast<std::size_t>(limit);
    visited_.clear();
    Plan plan;
    if (dfs(problem_.initial, plan)) return plan;
    return std::nullopt;
  }

 private:
  bool dfs(const State& state, Plan& plan) {
    const std::size_t depth = plan.steps.size();
    if (depth == limit_) return satisfiesGoal(problem_.goal, state);
    const std::size_t remaining = limit_ - depth;
    std::string key;
    if (prune_) {
      key = canonicalizeUpToPlaceholders(state);
      auto it = visited_.find(key);
      // A state that already failed with at least as much depth left cannot
      // lead to a plan now.
      if (it != visited_.end() && it->second >= remaining) return false;
    }
    for (const auto& succ : successors(problem_, state, depth + 1)) {
      State next = applyUpdate(*succ.schema, succ.subst, state);
      plan.steps.push_back(succ.action);
      if (dfs(next, plan)) {
        recordPlaceholders(plan, succ, depth);
        return true;
      }
      plan.steps.pop_back();
    }
    if (prune_) {
      auto& best = visited_[key];
      best = std::max(best, remaining);
    }
    return false;
  }

  const PlanningProblem& problem_;
  bool prune_;
  std::size_t limit_ = 0;
  std::unordered_map<std::string, std::size_t> visited_;
};

}  // namespace detail

/// Iterative-deepening depth-first search. Returns the shortest plan, the
/// canonically first among plans of that length. Throws NoPlanFound.
inline Plan plan(const PlanningProblem& problem, const SearchConfig& cfg = {}) {
  if (cfg.maxDepth < 1) throw Error("maxDepth must be at least 1");
  detail::DepthFirst search(problem, cfg.pruneVisited);
  for (int limit = 0; limit <= cfg.maxDepth; ++limit) {
    if (auto p = search.run(limit)) return *p;
  }
  throw NoPlanFound(cfg.maxDepth);
}

struct PlanValidation {
  bool valid = false;
  /// Index of the first step whose precondition fails, or plan size when
  /// every step applies but the goal does not hold.
  std::optional<std::size_t> failedStep;
  State finalState;
};

/// Replays the plan from the initial state.
inline PlanValidation validatePlan(const PlanningProblem& problem, const Plan& p) {
  PlanValidation out;
  State state = problem.initial;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const auto& step = p.steps[i];
    const ActionSchema* schema = problem.findAction(step.name);
    if (!schema || schema->params.size() != step.args.size()) {
      out.failedStep = i;
      out.finalState = state;
      return out;
    }
    Substitution::Map m;
    for (std::size_t k = 0; k < step.args.size(); ++k) m.emplace(schema->params[k], step.args[k]);
    try {
      state = applyUpdate(*schema, bindOutputs(*schema, Substitution(std::move(m)), i + 1), state);
    } catch (const PreconditionViolation&) {
      out.failedStep = i;
      out.finalState = state;
      return out;
    }
  }
  out.finalState = state;
  out.valid = satisfiesGoal(problem.goal, state);
  if (!out.valid) out.failedStep = p.steps.size();
  return out;
}

/// Every plan of length <= maxDepth whose final state satisfies the goal,
/// in canonical order. Exhaustive; intended as a test oracle.
inline std::vector<Plan> enumeratePlans(const PlanningProblem& problem, int maxDepth) {
  std::vector<Plan> found;
  Plan current;
  auto walk = [&](auto&& self, const State& state) -> void {
    if (satisfiesGoal(problem.goal, state)) found.push_back(current);
    if (current.steps.size() == static_cast<std::size_t>(std::max(maxDepth, 0))) return;
    const std::size_t depth = current.steps.size();
    for (const auto& succ : detail::successors(problem, state, depth + 1)) {
      State next = applyUpdate(*succ.schema, succ.subst, state);
      current.steps.push_back(succ.action);
      auto saved = current.producedPlaceholders;
      detail::recordPlaceholders(current, succ, depth);
      self(self, next);
      current.producedPlaceholders = std::move(saved);
      current.steps.pop_back();
    }
  };
  walk(walk, problem.initial);
  std::stable_sort(found.begin(), found.end(), canonicalLess);
  return found;
}

inline std::string formatPlan(const Plan& p) {
  std::string out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) out += std::to_string(i + 1) + ". " + p.steps[i].str() + "\n";
  return out;
}

}  // namespace fluxcompose

#endif
