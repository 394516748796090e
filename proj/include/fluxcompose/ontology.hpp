#pragma once
#ifndef FLUXCOMPOSE_ONTOLOGY_HPP
#define FLUXCOMPOSE_ONTOLOGY_HPP

// Concept taxonomy (subClassOf DAG), subsumption, match degrees and
// severity rules.
//
// Taxonomy files (.tax), one declaration per line, '%' comments:
//   root Event
//   concept Medical subClassOf EventType
//   individual ravi type DeliveryPersonnel
//   rule Orthopedics {pain,swelling} -> Major @2

#include <algorithm>
#include <cstddef>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluxcompose/error.hpp"

namespace fluxcompose {

class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> cycle) : Error(message(cycle)), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  static std::string message(const std::vector<std::string>& cycle) {
    std::string out = "subClassOf cycle:";
    for (const auto& c : cycle) out += " " + c + " ->";
    return out + " " + (cycle.empty() ? std::string() : cycle.front());
  }
  std::vector<std::string> cycle_;
};

class UndeclaredConceptError : public Error {
 public:
  using Error::Error;
};

class UnknownConceptError : public Error {
 public:
  explicit UnknownConceptError(const std::string& name, std::size_t line = 0, std::size_t column = 0)
      : Error("unknown concept " + name, line, column), concept_(name) {}
  const std::string& conceptName() const { return concept_; }

 private:
  std::string concept_;
};

class TaxonomyParseError : public Error {
 public:
  using Error::Error;
};

enum class MatchDegree { Fail = 0, Subsumes = 1, Plugin = 2, Exact = 3 };

inline const char* to_string(MatchDegree d) {
  switch (d) {
    case MatchDegree::Exact: return "Exact";
    case MatchDegree::Plugin: return "Plugin";
    case MatchDegree::Subsumes: return "Subsumes";
    case MatchDegree::Fail: return "Fail";
  }
  return "Fail";
}

class TaxonomyGraph {
 public:
  bool contains(const std::string& c) const { return concepts_.count(c) != 0; }
  const std::set<std::string>& concepts() const { return concepts_; }
  const std::set<std::pair<std::string, std::string>>& edges() const { return edges_; }
  const std::map<std::string, std::string>& individuals() const { return individuals_; }

  std::vector<std::string> parents(const std::string& c) const {
    std::vector<std::string> out;
    for (auto it = edges_.lower_bound({c, std::string()}); it != edges_.end() && it->first == c; ++it) {
      out.push_back(it->second);
    }
    return out;
  }

  /// Reflexive-transitive ancestors.
  const std::set<std::string>& ancestors(const std::string& c) const {
    auto it = ancestors_.find(c);
    if (it == ancestors_.end()) throw UnknownConceptError(c);
    return it->second;
  }

  /// Case-insensitive lookup, for values such as "orthopedics".
  std::optional<std::string> findConcept(std::string_view name) const {
    auto lower = [](std::string_view s) {
      std::string out(s);
      std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return std::tolower(ch); });
      return out;
    };
    const std::string key = lower(name);
    for (const auto& c : concepts_) {
      if (lower(c) == key) return c;
    }
    return std::nullopt;
  }

  /// Copy with one more typed individual. Throws UnknownConceptError.
  TaxonomyGraph withIndividual(const std::string& name, const std::string& type) const {
    if (!contains(type)) throw UnknownConceptError(type);
    TaxonomyGraph g = *this;
    g.individuals_[name] = type;
    return g;
  }

  /// Builds and validates a graph. Throws CycleError.
  static TaxonomyGraph build(std::set<std::string> concepts, std::set<std::pair<std::string, std::string>> edges,
                             std::map<std::string, std::string> individuals = {}) {
    TaxonomyGraph g;
    g.concepts_ = std::move(concepts);
    g.edges_ = std::move(edges);
    g.individuals_ = std::move(individuals);
    for (const auto& [child, parent] : g.edges_) {
      if (!g.contains(child)) throw UndeclaredConceptError("edge endpoint " + child + " is not declared");
      if (!g.contains(parent)) throw UndeclaredConceptError("edge endpoint " + parent + " is not declared");
    }
    g.checkAcyclic();
    for (const auto& c : g.concepts_) {
      std::set<std::string> seen{c};
      std::vector<std::string> stack{c};
      while (!stack.empty()) {
        std::string cur = std::move(stack.back());
        stack.pop_back();
        for (const auto& p : g.parents(cur)) {
          if (seen.insert(p).second) stack.push_back(p);
        }
      }
      g.ancestors_.emplace(c, std::move(seen));
    }
    return g;
  }

 private:
  void checkAcyclic() const {
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> mark;
    for (const auto& c : concepts_) mark[c] = Mark::White;
    std::vector<std::string> path;
    // Recursive DFS; taxonomies are shallow.
    auto visit = [&](auto&& self, const std::string& c) -> void {
      mark[c] = Mark::Grey;
      path.push_back(c);
      for (const auto& p : parents(c)) {
        if (mark[p] == Mark::Grey) {
          auto start = std::find(path.begin(), path.end(), p);
          std::vector<std::string> cycle(start, path.end());
          auto smallest = std::min_element(cycle.begin(), cycle.end());
          std::rotate(cycle.begin(), smallest, cycle.end());
          throw CycleError(std::move(cycle));
        }
        if (mark[p] == Mark::White) self(self, p);
      }
      path.pop_back();
      mark[c] = Mark::Black;
    };
    for (const auto& c : concepts_) {
      if (mark[c] == Mark::White) visit(visit, c);
    }
  }

  std::set<std::string> concepts_;
  std::set<std::pair<std::string, std::string>> edges_;
  std::map<std::string, std::string> individuals_;
  std::map<std::string, std::set<std::string>> ancestors_;
};

namespace detail {

inline std::vector<std::string> splitWords(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::string stripComment(const std::string& line) {
  auto pos = line.find('%');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

inline bool validIdentifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

inline std::size_t columnOf(const std::string& line, const std::string& word) {
  auto pos = line.find(word);
  return pos == std::string::npos ? 1 : pos + 1;
}

}  // namespace detail

/// Parses concept/root/individual lines; `rule` lines are left to
/// loadSeverityRules. Throws TaxonomyParseError, CycleError,
/// UndeclaredConceptError.
inline TaxonomyGraph loadTaxonomy(std::string_view source) {
  std::set<std::string> concepts;
  std::set<std::pair<std::string, std::string>> edges;
  struct PendingIndividual {
    std::string name, type;
    std::size_t line, column;
  };
  std::vector<PendingIndividual> individuals;

  std::istringstream in{std::string(source)};
  std::string raw;
  std::size_t lineNo = 0;
  auto requireIdent = [&](const std::string& line, const std::string& w) {
    if (!detail::validIdentifier(w)) {
      throw TaxonomyParseError("invalid concept name '" + w + "'", lineNo, detail::columnOf(line, w));
    }
  };
  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string line = detail::stripComment(raw);
    const auto words = detail::splitWords(line);
    if (words.empty() || words[0] == "rule") continue;
    const std::string& kw = words[0];
    if (kw == "root" && words.size() == 2) {
      requireIdent(line, words[1]);
      concepts.insert(words[1]);
    } else if (kw == "concept" && words.size() == 2) {
      requireIdent(line, words[1]);
      concepts.insert(words[1]);
    } else if (kw == "concept" && words.size() == 4 && words[2] == "subClassOf") {
      requireIdent(line, words[1]);
      requireIdent(line, words[3]);
      concepts.insert(words[1]);
      concepts.insert(words[3]);
      edges.emplace(words[1], words[3]);
    } else if (kw == "individual" && words.size() == 4 && words[2] == "type") {
      requireIdent(line, words[1]);
      individuals.push_back({words[1], words[3], lineNo, detail::columnOf(line, words[3])});
    } else {
      throw TaxonomyParseError(
          "expected 'root <C>', 'concept <C> [subClassOf <P>]', 'individual <x> type <C>' or 'rule ...'", lineNo,
          detail::columnOf(line, kw));
    }
  }
  std::map<std::string, std::string> inds;
  for (const auto& ind : individuals) {
    if (!concepts.count(ind.type)) {
      throw UndeclaredConceptError("individual " + ind.name + " has undeclared type " + ind.type, ind.line,
                                   ind.column);
    }
    inds[ind.name] = ind.type;
  }
  return TaxonomyGraph::build(std::move(concepts), std::move(edges), std::move(inds));
}

/// True iff ancestor is child or reachable from it by subClassOf edges.
inline bool isSubsumedBy(const std::string& child, const std::string& ancestor, const TaxonomyGraph& g) {
  if (!g.contains(ancestor)) throw UnknownConceptError(ancestor);
  return g.ancestors(child).count(ancestor) != 0;
}

/// Exact if equal; Plugin if advertised is more specific than requested;
/// Subsumes if more general; Fail otherwise.
inline MatchDegree matchDegree(const std::string& advertised, const std::string& requested, const TaxonomyGraph& g) {
  if (!g.contains(advertised)) throw UnknownConceptError(advertised);
  if (!g.contains(requested)) throw UnknownConceptError(requested);
  if (advertised == requested) return MatchDegree::Exact;
  if (isSubsumedBy(advertised, requested, g)) return MatchDegree::Plugin;
  if (isSubsumedBy(requested, advertised, g)) return MatchDegree::Subsumes;
  return MatchDegree::Fail;
}

enum class Severity { Minor, Major, Emergency };

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::Minor: return "Minor";
    case Severity::Major: return "Major";
    case Severity::Emergency: return "Emergency";
  }
  return "Emergency";
}

inline std::optional<Severity> parseSeverity(std::string_view s) {
  if (s == "Minor") return Severity::Minor;
  if (s == "Major") return Severity::Major;
  if (s == "Emergency") return Severity::Emergency;
  return std::nullopt;
}

struct SeverityRule {
  std::string specialization;
  std::set<std::string> requiredSymptoms;
  Severity severity = Severity::Emergency;
  int priority = 0;
  friend bool operator==(const SeverityRule&, const SeverityRule&) = default;
};

/// Parses `rule <Specialization> {sym,...} -> <Severity> @<priority>` lines,
/// ignoring every other line. Result is sorted by priority, highest first.
inline std::vector<SeverityRule> loadSeverityRules(std::string_view source, const TaxonomyGraph& g) {
  std::vector<SeverityRule> rules;
  std::istringstream in{std::string(source)};
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string line = detail::stripComment(raw);
    const auto words = detail::splitWords(line);
    if (words.empty() || words[0] != "rule") continue;
    const auto open = line.find('{');
    const auto close = line.find('}');
    auto fail = [&](const std::string& msg, std::size_t col) { throw TaxonomyParseError(msg, lineNo, col); };
    if (words.size() < 2 || open == std::string::npos || close == std::string::npos || close < open) {
      fail("expected 'rule <Specialization> {sym,...} -> <Severity> @<priority>'", 1);
    }
    SeverityRule r;
    r.specialization = words[1];
    if (!g.contains(r.specialization)) {
      throw UndeclaredConceptError("rule names undeclared specialization " + r.specialization, lineNo,
                                   detail::columnOf(line, r.specialization));
    }
    std::string syms = line.substr(open + 1, close - open - 1);
    std::replace(syms.begin(), syms.end(), ',', ' ');
    for (const auto& s : detail::splitWords(syms)) r.requiredSymptoms.insert(s);
    const auto tail = detail::splitWords(line.substr(close + 1));
    if (tail.size() != 3 || tail[0] != "->" || tail[2].size() < 2 || tail[2][0] != '@') {
      fail("expected '-> <Severity> @<priority>'", close + 2);
    }
    auto sev = parseSeverity(tail[1]);
    if (!sev) fail("unknown severity '" + tail[1] + "'", detail::columnOf(line, tail[1]));
    r.severity = *sev;
    try {
      std::size_t used = 0;
      r.priority = std::stoi(tail[2].substr(1), &used);
      if (used != tail[2].size() - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail("invalid priority '" + tail[2] + "'", detail::columnOf(line, tail[2]));
    }
    for (const auto& other : rules) {
      if (other.specialization == r.specialization && other.priority == r.priority) {
        fail("duplicate priority " + std::to_string(r.priority) + " for " + r.specialization,
             detail::columnOf(line, tail[2]));
      }
    }
    rules.push_back(std::move(r));
  }
  std::stable_sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) { return a.priority > b.priority; });
  return rules;
}

/// Severity of the highest-priority rule for the specialization whose
/// required symptoms are all present; Emergency when none applies.
inline Severity classifySeverity(const std::string& specialization, const std::set<std::string>& symptoms,
                                 const std::vector<SeverityRule>& rules) {
  const SeverityRule* best = nullptr;
  for (const auto& r : rules) {
    if (r.specialization != specialization) continue;
    if (!std::includes(symptoms.begin(), symptoms.end(), r.requiredSymptoms.begin(), r.requiredSymptoms.end())) continue;
    if (!best || r.priority > best->priority) best = &r;
  }
  return best ? best->severity : Severity::Emergency;
}

}  // namespace fluxcompose

#endif
