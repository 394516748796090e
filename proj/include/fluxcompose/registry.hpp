#pragma once
#ifndef FLUXCOMPOSE_REGISTRY_HPP
#define FLUXCOMPOSE_REGISTRY_HPP

// OWL-S style service descriptions and their compilation to action schemas.
//
// Registry files (.reg) hold one block per service. Fields appear in this
// order; hasInput/hasOutput/pre/add/remove may repeat:
//
//   service findResource
//     textDescription: free text up to end of line
//     hasInput: PR Profession
//     hasOutput: CN Coach fluent CoachNum
//     pre: holds(availableRole(PR,SP))
//     add: availableAt(P,CN)
//     remove: someFluent(PR)
//     grounding: findResourceStub
//   end
//
// A typed parameter (p : C) is the fluent C(p), or F(p) when `fluent F`
// overrides the symbol.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluxcompose/dsl.hpp"
#include "fluxcompose/error.hpp"
#include "fluxcompose/ontology.hpp"
#include "fluxcompose/term.hpp"

namespace fluxcompose {

class RegistryParseError : public Error {
 public:
  using Error::Error;
};

class DuplicateServiceError : public Error {
 public:
  using Error::Error;
};

struct ServiceParam {
  std::string name;
  std::string type;
  std::string fluent;  // empty = same as type

  const std::string& fluentSymbol() const { return fluent.empty() ? type : fluent; }
  friend bool operator==(const ServiceParam&, const ServiceParam&) = default;
};

struct ServiceDescription {
  std::string name;
  std::string textDescription;
  std::vector<ServiceParam> inputs;
  std::vector<ServiceParam> outputs;
  std::vector<PossAtom> extraPreconditions;
  std::vector<Term> extraAdds;
  std::vector<Term> extraRemoves;
  std::string groundingStubId;

  friend bool operator==(const ServiceDescription&, const ServiceDescription&) = default;
};

/// Inputs become knows_val preconditions, outputs become know(.) add
/// effects; the extra preconditions and effects follow verbatim.
inline ActionSchema compileServiceToAction(const ServiceDescription& svc) {
  ActionSchema a;
  a.name = svc.name;
  for (const auto& in : svc.inputs) {
    a.params.push_back(in.name);
    a.poss.push_back(PossAtom::knowsValAtom(Term::compound(in.fluentSymbol(), {Term::variable(in.name)})));
  }
  a.poss.insert(a.poss.end(), svc.extraPreconditions.begin(), svc.extraPreconditions.end());
  for (const auto& out : svc.outputs) {
    a.adds.push_back(know(Term::compound(out.fluentSymbol(), {Term::variable(out.name)})));
  }
  a.adds.insert(a.adds.end(), svc.extraAdds.begin(), svc.extraAdds.end());
  a.removes = svc.extraRemoves;
  return a;
}

class Registry {
 public:
  const std::map<std::string, ServiceDescription>& services() const { return services_; }
  std::size_t size() const { return services_.size(); }
  bool empty() const { return services_.empty(); }

  const ServiceDescription* find(const std::string& name) const {
    auto it = services_.find(name);
    return it == services_.end() ? nullptr : &it->second;
  }

  /// Throws DuplicateServiceError.
  void add(ServiceDescription svc) {
    const std::string name = svc.name;
    if (!services_.emplace(name, std::move(svc)).second) throw DuplicateServiceError("duplicate service " + name);
  }

  /// Fluent symbol used for parameters of the given concept.
  std::string fluentFor(const std::string& type) const {
    for (const auto& [_, svc] : services_) {
      for (const auto* params : {&svc.inputs, &svc.outputs}) {
        for (const auto& p : *params) {
          if (p.type == type && !p.fluent.empty()) return p.fluent;
        }
      }
    }
    return type;
  }

  /// Compiled schemas in service-name order.
  std::vector<ActionSchema> actions() const {
    std::vector<ActionSchema> out;
    for (const auto& [_, svc] : services_) out.push_back(compileServiceToAction(svc));
    return out;
  }

 private:
  std::map<std::string, ServiceDescription> services_;
};

namespace detail {

inline bool isVariableName(const std::string& s) {
  return !s.empty() && (std::isupper(static_cast<unsigned char>(s.front())) || s.front() == '_') &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Checks one service against the taxonomy and the schema discipline.
inline void validateService(const ServiceDescription& svc, const TaxonomyGraph& g, std::size_t line) {
  std::set<std::string> names;
  for (const auto* params : {&svc.inputs, &svc.outputs}) {
    for (const auto& p : *params) {
      if (!names.insert(p.name).second) {
        throw RegistryParseError("parameter " + p.name + " declared twice in service " + svc.name, line, 1);
      }
      if (!g.contains(p.type)) throw UnknownConceptError(p.type, line, 1);
    }
  }
  const ActionSchema a = compileServiceToAction(svc);
  checkSchema(a, line, 1);
  std::vector<std::string> declaredOutputs;
  for (const auto& o : svc.outputs) declaredOutputs.push_back(o.name);
  if (a.outputs() != declaredOutputs) {
    for (const auto& v : a.outputs()) {
      if (std::find(declaredOutputs.begin(), declaredOutputs.end(), v) == declaredOutputs.end()) {
        throw SchemaError("effect variable " + v + " of service " + svc.name + " is neither an input nor an output",
                          line, 1);
      }
    }
  }
}

}  // namespace detail

/// Throws RegistryParseError (term syntax errors are reported at their
/// registry line), UnknownConceptError, DuplicateServiceError, SchemaError.
inline Registry loadRegistry(std::string_view source, const TaxonomyGraph& g) {
  Registry reg;
  std::istringstream in{std::string(source)};
  std::string raw;
  std::size_t lineNo = 0;
  std::optional<ServiceDescription> cur;
  std::size_t curLine = 0;
  int lastRank = -1;
  std::map<std::string, std::size_t> seen;

  auto parseParam = [&](const std::string& value, std::size_t col, bool output) {
    const auto w = detail::splitWords(value);
    ServiceParam p;
    if (w.size() == 2 || (w.size() == 4 && w[2] == "fluent")) {
      p.name = w[0];
      p.type = w[1];
      if (w.size() == 4) p.fluent = w[3];
    } else {
      throw RegistryParseError(std::string("expected '") + (output ? "hasOutput" : "hasInput") +
                                   ": <Var> <Concept> [fluent <Symbol>]'",
                               lineNo, col);
    }
    if (!detail::isVariableName(p.name)) {
      throw RegistryParseError("parameter name '" + p.name + "' must start with an uppercase letter", lineNo, col);
    }
    if (!g.contains(p.type)) throw UnknownConceptError(p.type, lineNo, col);
    return p;
  };
  auto parseTermAt = [&](auto parser, const std::string& value, std::size_t col) {
    try {
      return parser(value);
    } catch (const Error& e) {
      throw RegistryParseError(e.what(), lineNo, col + (e.column() ? e.column() - 1 : 0));
    }
  };

  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string line = detail::trim(detail::stripComment(raw));
    if (line.empty()) continue;
    const std::size_t indent = raw.find_first_not_of(" \t") + 1;
    if (!cur) {
      const auto w = detail::splitWords(line);
      if (w.size() != 2 || w[0] != "service") {
        throw RegistryParseError("expected 'service <name>'", lineNo, indent);
      }
      if (auto it = seen.find(w[1]); it != seen.end()) {
        throw DuplicateServiceError(
            "duplicate service " + w[1] + " (first defined on line " + std::to_string(it->second) + ")", lineNo,
            indent);
      }
      cur.emplace();
      cur->name = w[1];
      curLine = lineNo;
      lastRank = -1;
      continue;
    }
    if (line == "end") {
      detail::validateService(*cur, g, curLine);
      seen.emplace(cur->name, curLine);
      reg.add(std::move(*cur));
      cur.reset();
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw RegistryParseError("expected '<field>: <value>' or 'end'", lineNo, indent);
    const std::string key = detail::trim(line.substr(0, colon));
    const std::string value = detail::trim(line.substr(colon + 1));
    const std::size_t valueCol = raw.find(value.empty() ? std::string(":") : value) + 1;
    static const std::vector<std::string> order = {"textDescription", "hasInput", "hasOutput", "pre",
                                                   "add",             "remove",   "grounding"};
    const auto pos = std::find(order.begin(), order.end(), key);
    if (pos == order.end()) throw RegistryParseError("unknown field '" + key + "'", lineNo, indent);
    const int rank = static_cast<int>(pos - order.begin());
    const bool repeatable = key != "textDescription" && key != "grounding";
    if (rank < lastRank || (rank == lastRank && !repeatable)) {
      throw RegistryParseError("field '" + key + "' out of order", lineNo, indent);
    }
    lastRank = rank;
    if (key == "textDescription") {
      cur->textDescription = value;
    } else if (key == "hasInput") {
      cur->inputs.push_back(parseParam(value, valueCol, false));
    } else if (key == "hasOutput") {
      cur->outputs.push_back(parseParam(value, valueCol, true));
    } else if (key == "pre") {
      cur->extraPreconditions.push_back(parseTermAt([](const std::string& v) { return parsePossAtom(v); }, value, valueCol));
    } else if (key == "add") {
      cur->extraAdds.push_back(parseTermAt([](const std::string& v) { return parseFluent(v); }, value, valueCol));
    } else if (key == "remove") {
      cur->extraRemoves.push_back(parseTermAt([](const std::string& v) { return parseFluent(v); }, value, valueCol));
    } else {
      const auto w = detail::splitWords(value);
      if (w.size() != 1) throw RegistryParseError("expected 'grounding: <stubId>'", lineNo, valueCol);
      cur->groundingStubId = w[0];
    }
  }
  if (cur) throw RegistryParseError("service " + cur->name + " is missing 'end'", curLine, 1);
  return reg;
}

inline std::string prettyPrint(const ServiceDescription& svc) {
  auto param = [](const ServiceParam& p) { return p.name + " " + p.type + (p.fluent.empty() ? "" : " fluent " + p.fluent); };
  std::string out = "service " + svc.name + "\n";
  if (!svc.textDescription.empty()) out += "  textDescription: " + svc.textDescription + "\n";
  for (const auto& p : svc.inputs) out += "  hasInput: " + param(p) + "\n";
  for (const auto& p : svc.outputs) out += "  hasOutput: " + param(p) + "\n";
  for (const auto& a : svc.extraPreconditions) out += "  pre: " + a.str() + "\n";
  for (const auto& t : svc.extraAdds) out += "  add: " + t.str() + "\n";
  for (const auto& t : svc.extraRemoves) out += "  remove: " + t.str() + "\n";
  if (!svc.groundingStubId.empty()) out += "  grounding: " + svc.groundingStubId + "\n";
  return out + "end\n";
}

inline std::string prettyPrint(const Registry& reg) {
  std::string out;
  for (const auto& [_, svc] : reg.services()) {
    if (!out.empty()) out += "\n";
    out += prettyPrint(svc);
  }
  return out;
}

/// Concepts a service makes known: its typed outputs plus every concept C
/// with know(C) or know(C(..)) among its extra add effects.
inline std::vector<std::string> advertisedOutputs(const ServiceDescription& svc, const TaxonomyGraph& g) {
  std::vector<std::string> out;
  for (const auto& o : svc.outputs) out.push_back(o.type);
  for (const auto& t : svc.extraAdds) {
    if (isKnowledge(t) && g.contains(t.args()[0].name())) out.push_back(t.args()[0].name());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Candidate {
  ServiceDescription service;
  MatchDegree degree;
};

/// Services whose advertised outputs cover every requested concept at
/// Subsumes or better, ranked by their worst per-concept degree (best
/// first), ties by service name.
inline std::vector<Candidate> findCandidates(const Registry& reg, const std::vector<std::string>& requestedOutputs,
                                             const TaxonomyGraph& g) {
  for (const auto& r : requestedOutputs) {
    if (!g.contains(r)) throw UnknownConceptError(r);
  }
  std::vector<Candidate> out;
  for (const auto& [name, svc] : reg.services()) {
    const auto advertised = advertisedOutputs(svc, g);
    MatchDegree worst = MatchDegree::Exact;
    for (const auto& r : requestedOutputs) {
      MatchDegree best = MatchDegree::Fail;
      for (const auto& a : advertised) best = std::max(best, matchDegree(a, r, g));
      worst = std::min(worst, best);
    }
    if (worst >= MatchDegree::Subsumes) out.push_back({svc, worst});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.degree != b.degree) return a.degree > b.degree;
    return a.service.name < b.service.name;
  });
  return out;
}

}  // namespace fluxcompose

#endif
