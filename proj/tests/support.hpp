#pragma once

// Random generators and independent reference implementations used by the
// unit and acceptance tests. The oracles here deliberately avoid the
// library's unifier, search and ranking code.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <unistd.h>
#include <set>
#include <string>
#include <vector>

#include "fluxcompose/dsl.hpp"
#include "fluxcompose/planner.hpp"
#include "fluxcompose/scenario.hpp"
#include "fluxcompose/term.hpp"

namespace testsupport {

using namespace fluxcompose;

inline std::string dataPath(const std::string& name) { return std::string(FLUXCOMPOSE_DATA_DIR) + "/" + name; }

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline std::string tempPath(const std::string& stem) {
  static int counter = 0;
  return "/tmp/fluxcompose-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + stem;
}

struct Rng {
  std::mt19937 gen;
  explicit Rng(unsigned seed) : gen(seed) {}
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen); }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; }
};

// ---------------------------------------------------------------------------
// Random planning domains: <= 5 actions, <= 8 fluents, constants {a,b,c}.
// Every parameter occurs in the precondition, output variables only in adds.

struct RandomDomain {
  DomainFile domain;
  PlanningProblem problem;
};

inline RandomDomain randomDomain(Rng& rng) {
  static const std::vector<std::string> constants = {"a", "b", "c"};
  RandomDomain out;
  const int nFluents = rng.uniform(1, 8);
  for (int i = 0; i < nFluents; ++i) {
    out.domain.fluentDecls.push_back({"f" + std::to_string(i), static_cast<std::size_t>(rng.uniform(0, 2))});
  }
  auto fluentWith = [&](const FluentDecl& d, const std::function<Term()>& arg) {
    std::vector<Term> args;
    for (std::size_t k = 0; k < d.arity; ++k) args.push_back(arg());
    return Term::compound(d.name, std::move(args));
  };
  auto constArg = [&] { return Term::constant(rng.pick(constants)); };

  // Chained domains: each action also requires something its predecessor
  // adds, so solutions need several steps.
  const bool chained = rng.coin(0.4);
  const int nActions = rng.uniform(chained ? 2 : 1, 5);
  for (int i = 0; i < nActions; ++i) {
    ActionSchema a;
    a.name = "act" + std::to_string(i);
    const int nParams = rng.uniform(chained ? 1 : 0, 2);
    for (int k = 0; k < nParams; ++k) a.params.push_back(k == 0 ? "X" : "Y");
    std::vector<std::string> pool = a.params;
    auto paramOrConst = [&] {
      if (!pool.empty() && rng.coin(0.6)) return Term::variable(rng.pick(pool));
      return constArg();
    };
    if (chained && i > 0) {
      const Term& link = out.domain.actions.back().adds.front();
      const bool knowledge = link.name() == "know" && link.arity() == 1;
      const Term& inner = knowledge ? link.args()[0] : link;
      std::vector<Term> args;
      for (const auto& t : inner.args()) args.push_back(t.isVariable() ? Term::variable(rng.pick(pool)) : t);
      Term f = args.empty() ? inner : Term::compound(inner.name(), std::move(args));
      a.poss.push_back(knowledge ? PossAtom::knowsValAtom(f) : PossAtom::holdsAtom(f));
    }
    const int nPoss = rng.uniform(0, 2);
    for (int k = 0; k < nPoss; ++k) {
      Term f = fluentWith(rng.pick(out.domain.fluentDecls), paramOrConst);
      a.poss.push_back(rng.coin() ? PossAtom::holdsAtom(f) : PossAtom::knowsValAtom(f));
    }
    // Parameters the precondition does not mention get an atom of their own.
    for (const auto& p : a.params) {
      bool mentioned = false;
      for (const auto& atom : a.poss) {
        const auto vs = atom.pattern.variables();
        mentioned = mentioned || std::find(vs.begin(), vs.end(), p) != vs.end();
      }
      if (mentioned) continue;
      std::vector<FluentDecl> unary;
      for (const auto& d : out.domain.fluentDecls) {
        if (d.arity >= 1) unary.push_back(d);
      }
      if (unary.empty()) {
        out.domain.fluentDecls.push_back({"f" + std::to_string(out.domain.fluentDecls.size()), 1});
        unary.push_back(out.domain.fluentDecls.back());
      }
      const FluentDecl& d = rng.pick(unary);
      std::vector<Term> args{Term::variable(p)};
      for (std::size_t k = 1; k < d.arity; ++k) args.push_back(constArg());
      Term f = Term::compound(d.name, std::move(args));
      a.poss.push_back(rng.coin() ? PossAtom::holdsAtom(f) : PossAtom::knowsValAtom(f));
    }
    std::vector<std::string> addPool = pool;
    if (rng.coin(0.3)) addPool.push_back("Z");
    auto addArg = [&] {
      if (!addPool.empty() && rng.coin(0.6)) return Term::variable(rng.pick(addPool));
      return constArg();
    };
    const int nAdds = rng.uniform(1, 2);
    for (int k = 0; k < nAdds; ++k) {
      Term f = fluentWith(rng.pick(out.domain.fluentDecls), addArg);
      a.adds.push_back(rng.coin(0.4) ? know(f) : f);
    }
    const int nRemoves = rng.uniform(0, 1);
    for (int k = 0; k < nRemoves; ++k) {
      Term f = fluentWith(rng.pick(out.domain.fluentDecls), paramOrConst);
      a.removes.push_back(rng.coin(0.3) ? know(f) : f);
    }
    out.domain.actions.push_back(std::move(a));
  }

  const int nInit = rng.uniform(1, 5);
  for (int i = 0; i < nInit; ++i) {
    Term f = fluentWith(rng.pick(out.domain.fluentDecls), constArg);
    out.problem.initial.insert(rng.coin(0.4) ? know(f) : f);
  }
  const int nGoal = rng.uniform(1, 2);
  for (int i = 0; i < nGoal; ++i) {
    int v = 0;
    Term f = fluentWith(rng.pick(out.domain.fluentDecls), [&] {
      if (rng.coin(0.4)) return Term::variable("G" + std::to_string(v++));
      return constArg();
    });
    out.problem.goal.push_back(rng.coin(0.4) ? know(f) : f);
  }
  out.problem.actions = out.domain.actions;

  // Half the time the goal is read off a short random walk, so that
  // multi-step plans are common. Placeholders become goal variables.
  if (chained || rng.coin(0.5)) {
    // Make the first action applicable so the walk gets going.
    std::map<std::string, Term> bind;
    const ActionSchema& first = out.problem.actions.front();
    for (const auto& p : first.params) bind.emplace(p, constArg());
    std::function<Term(const Term&)> ground = [&](const Term& t) {
      if (t.isVariable()) return bind.at(t.name());
      if (t.args().empty()) return t;
      std::vector<Term> args;
      for (const auto& a : t.args()) args.push_back(ground(a));
      return Term::compound(t.name(), std::move(args));
    };
    for (const auto& atom : first.poss) {
      const Term g = ground(atom.pattern);
      out.problem.initial.insert(atom.kind == PossAtom::Kind::KnowsVal ? know(g) : g);
    }
    State z = out.problem.initial;
    State before = z;
    const int steps = rng.uniform(2, 4);
    for (int step = 1; step <= steps; ++step) {
      // Only moves that change the state are worth taking.
      // Chained domains follow the chain while they can.
      std::vector<State> moves, along;
      for (std::size_t i = 0; i < out.problem.actions.size(); ++i) {
        const ActionSchema& a = out.problem.actions[i];
        for (const auto& s : checkPoss(a, z)) {
          State next = applyUpdate(a, bindOutputs(a, s, step), z);
          if (next == z) continue;
          if (chained && i == static_cast<std::size_t>(step - 1)) along.push_back(next);
          moves.push_back(std::move(next));
        }
      }
      if (!along.empty()) moves = std::move(along);
      if (moves.empty()) break;
      before = z;
      z = rng.pick(moves);
    }
    // Prefer what only the last step produced.
    std::vector<Term> fresh;
    for (const auto& x : z.fluents()) {
      if (!before.contains(x) && !out.problem.initial.contains(x)) fresh.push_back(x);
    }
    if (fresh.empty()) {
      for (const auto& x : z.fluents()) {
        if (!out.problem.initial.contains(x)) fresh.push_back(x);
      }
    }
    if (!fresh.empty()) {
      int v = 0;
      std::function<Term(const Term&)> generalize = [&](const Term& t) {
        if (t.isPlaceholder()) return Term::variable("G" + std::to_string(v++));
        if (t.args().empty()) return t;
        std::vector<Term> args;
        for (const auto& a : t.args()) args.push_back(generalize(a));
        return Term::compound(t.name(), std::move(args));
      };
      out.problem.goal.clear();
      for (int i = rng.uniform(1, 2); i > 0; --i) out.problem.goal.push_back(generalize(rng.pick(fresh)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force planning oracle. States are sets of rendered ground fluents;
// preconditions are checked by substituting every parameter tuple drawn
// from the constants in sight and testing membership.

namespace naive {

inline void leaves(const Term& t, std::set<std::string>& out) {
  if (t.isConstant()) {
    out.insert(t.name());
    return;
  }
  for (const auto& a : t.args()) leaves(a, out);
}

inline Term substitute(const Term& t, const std::map<std::string, std::string>& env) {
  if (t.isVariable()) {
    auto it = env.find(t.name());
    return it == env.end() ? t : Term::constant(it->second);
  }
  if (!t.isCompound()) return t;
  std::vector<Term> args;
  for (const auto& a : t.args()) args.push_back(substitute(a, env));
  return Term::compound(t.name(), std::move(args));
}

/// One-way match of a pattern against a ground term, extending env.
inline bool match(const Term& pattern, const Term& ground, std::map<std::string, std::string>& env) {
  if (pattern.isVariable()) {
    if (!ground.isConstant()) {
      // Variables only ever stand for constants in the generated domains.
      return false;
    }
    auto it = env.find(pattern.name());
    if (it != env.end()) return it->second == ground.name();
    env[pattern.name()] = ground.name();
    return true;
  }
  if (pattern.kind() != ground.kind() || pattern.name() != ground.name() || pattern.arity() != ground.arity()) {
    return false;
  }
  for (std::size_t i = 0; i < pattern.arity(); ++i) {
    if (!match(pattern.args()[i], ground.args()[i], env)) return false;
  }
  return true;
}

inline bool goalHolds(const std::vector<Term>& goal, std::size_t i, const std::set<Term>& state,
                      std::map<std::string, std::string>& env) {
  if (i == goal.size()) return true;
  for (const auto& f : state) {
    auto saved = env;
    if (match(goal[i], f, env) && goalHolds(goal, i + 1, state, env)) return true;
    env = std::move(saved);
  }
  return false;
}

struct Step {
  std::string name;
  std::vector<std::string> args;
  bool operator<(const Step& o) const { return std::tie(name, args) < std::tie(o.name, o.args); }
  bool operator==(const Step& o) const = default;
};

using Sequence = std::vector<Step>;

inline bool sequenceLess(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

/// All goal-reaching action sequences of length <= depth, canonical order.
inline std::vector<Sequence> allPlans(const PlanningProblem& p, int depth) {
  std::vector<Sequence> found;
  Sequence cur;
  std::set<Term> init(p.initial.world().begin(), p.initial.world().end());
  init.insert(p.initial.knowledge().begin(), p.initial.knowledge().end());

  std::function<void(const std::set<Term>&)> walk = [&](const std::set<Term>& z) {
    std::map<std::string, std::string> env;
    if (goalHolds(p.goal, 0, z, env)) found.push_back(cur);
    if (static_cast<int>(cur.size()) == depth) return;
    std::set<std::string> consts;
    for (const auto& f : z) leaves(f, consts);
    for (const auto& a : p.actions) {
      std::vector<std::string> domainVals(consts.begin(), consts.end());
      // Odometer over |consts|^|params| tuples.
      std::vector<std::size_t> idx(a.params.size(), 0);
      if (!a.params.empty() && domainVals.empty()) continue;
      for (;;) {
        std::map<std::string, std::string> b;
        for (std::size_t k = 0; k < a.params.size(); ++k) b[a.params[k]] = domainVals[idx[k]];
        bool ok = true;
        for (const auto& atom : a.poss) {
          Term g = substitute(atom.pattern, b);
          if (atom.kind == PossAtom::Kind::KnowsVal) g = know(g);
          if (!z.count(g)) {
            ok = false;
            break;
          }
        }
        if (ok) {
          const std::size_t step = cur.size() + 1;
          std::map<std::string, std::string> full = b;
          for (const auto& add : a.adds) {
            for (const auto& v : add.variables()) {
              if (!full.count(v)) full[v] = "#out_" + a.name + "_" + v + "_" + std::to_string(step);
            }
          }
          std::set<Term> next = z;
          for (const auto& r : a.removes) next.erase(substitute(r, full));
          for (const auto& add : a.adds) next.insert(substitute(add, full));
          Step s{a.name, {}};
          for (const auto& prm : a.params) s.args.push_back(b[prm]);
          cur.push_back(s);
          walk(next);
          cur.pop_back();
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] == domainVals.size()) idx[k++] = 0;
        if (k == idx.size()) break;
      }
    }
  };
  walk(init);
  std::sort(found.begin(), found.end(), sequenceLess);
  return found;
}

inline Sequence fromPlan(const Plan& p) {
  Sequence s;
  for (const auto& st : p.steps) {
    Step x{st.name, {}};
    for (const auto& a : st.args) x.args.push_back(a.str());
    s.push_back(std::move(x));
  }
  return s;
}

inline std::string render(const Sequence& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += s[i].name + "(";
    for (std::size_t k = 0; k < s[i].args.size(); ++k) out += (k ? "," : "") + s[i].args[k];
    out += ")";
  }
  return out + "]";
}

}  // namespace naive

// ---------------------------------------------------------------------------
// Subsumption oracle: exhaustive DFS over a raw edge list.

inline bool reachable(const std::multimap<std::string, std::string>& parents, const std::string& from,
                      const std::string& to) {
  std::set<std::string> seen;
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    std::string c = stack.back();
    stack.pop_back();
    if (c == to) return true;
    if (!seen.insert(c).second) continue;
    auto [lo, hi] = parents.equal_range(c);
    for (auto it = lo; it != hi; ++it) stack.push_back(it->second);
  }
  return false;
}

struct RandomDag {
  std::vector<std::string> nodes;
  std::multimap<std::string, std::string> parents;
  std::string text;  // taxonomy file source
};

/// Edges only point from a node to an earlier one, so the graph is acyclic.
inline RandomDag randomDag(Rng& rng, int maxNodes = 30) {
  RandomDag d;
  const int n = rng.uniform(1, maxNodes);
  for (int i = 0; i < n; ++i) d.nodes.push_back("N" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    if (i == 0 || rng.coin(0.15)) {
      d.text += "root " + d.nodes[i] + "\n";
      continue;
    }
    std::set<int> ps;
    const int k = rng.uniform(1, std::min(3, i));
    while (static_cast<int>(ps.size()) < k) ps.insert(rng.uniform(0, i - 1));
    for (int p : ps) {
      d.parents.emplace(d.nodes[i], d.nodes[p]);
      d.text += "concept " + d.nodes[i] + " subClassOf " + d.nodes[p] + "\n";
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Responder ranking oracle: independent filter plus a selection sort on an
// explicitly computed key.

struct RankKey {
  int tier;
  std::size_t distance;
  std::size_t coach;
  std::string name;
  std::string pnr;
  bool operator<(const RankKey& o) const {
    if (tier != o.tier) return tier < o.tier;
    if (distance != o.distance) return distance < o.distance;
    if (coach != o.coach) return coach < o.coach;
    if (name != o.name) return name < o.name;
    return pnr < o.pnr;
  }
};

inline std::vector<std::string> rankOracle(const std::vector<std::string>& coachOrder, const std::vector<Passenger>& ps,
                                           const std::string& patientPnr, const std::string& patientCoach,
                                           const std::string& specialization) {
  auto index = [&](const std::string& c) {
    for (std::size_t i = 0; i < coachOrder.size(); ++i) {
      if (coachOrder[i] == c) return i;
    }
    return coachOrder.size();
  };
  const std::set<std::string> medical = {"doctor", "nurse", "paramedic", "pharmacist"};
  std::vector<std::pair<RankKey, std::string>> pool;
  for (const auto& p : ps) {
    const bool eligible = p.role == Role::DeliveryPersonnel && p.registeredForService && p.travel.validated &&
                          p.profession && medical.count(*p.profession) && p.pnr != patientPnr;
    if (!eligible) continue;
    const std::size_t a = index(p.coach), b = index(patientCoach);
    int tier = 2;
    if (*p.profession == "doctor") tier = (p.specialization && *p.specialization == specialization) ? 0 : 1;
    pool.push_back({RankKey{tier, a > b ? a - b : b - a, a, p.name, p.pnr}, p.pnr});
  }
  std::vector<std::string> out;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (pool[i].first < pool[best].first) best = i;
    }
    out.push_back(pool[best].second);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

struct RandomRoster {
  std::vector<std::string> coachOrder;
  std::vector<Passenger> passengers;
};

inline RandomRoster randomRoster(Rng& rng, int maxPassengers = 200, int maxCoaches = 26) {
  static const std::vector<std::string> names = {"Asha", "Bala", "Chitra", "Dev", "Esha", "Gopal", "Hari", "Indu"};
  static const std::vector<std::string> professions = {"doctor", "nurse", "paramedic", "pharmacist", "teacher",
                                                       "engineer"};
  static const std::vector<std::string> specs = {"orthopedics", "cardiology", "neurology"};
  RandomRoster r;
  const int nCoaches = rng.uniform(1, maxCoaches);
  for (int i = 0; i < nCoaches; ++i) r.coachOrder.push_back("S" + std::to_string(i + 1));
  std::shuffle(r.coachOrder.begin(), r.coachOrder.end(), rng.gen);
  const int n = rng.uniform(1, maxPassengers);
  for (int i = 0; i < n; ++i) {
    Passenger p;
    p.pnr = "P" + std::to_string(10000 + i);
    p.name = rng.pick(names);
    p.coach = rng.pick(r.coachOrder);
    p.seat = rng.uniform(1, 72);
    const int role = rng.uniform(0, 2);
    p.role = role == 0 ? Role::None : role == 1 ? Role::Patient : Role::DeliveryPersonnel;
    if (p.role == Role::DeliveryPersonnel) {
      p.profession = rng.pick(professions);
      if (*p.profession == "doctor" && rng.coin(0.8)) p.specialization = rng.pick(specs);
    }
    p.registeredForService = rng.coin(0.7);
    p.travel = {"MAS", "CBE", "2026-03-14", p.registeredForService && rng.coin(0.7)};
    r.passengers.push_back(std::move(p));
  }
  return r;
}

/// First stop arriving after now, else the last stop.
inline std::string nextStationOracle(const std::vector<std::pair<std::string, int>>& stops, int now) {
  for (const auto& [name, t] : stops) {
    if (t > now) return name;
  }
  return stops.back().first;
}

}  // namespace testsupport
