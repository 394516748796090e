#pragma once
#ifndef FLUXCOMPOSE_COMPOSER_HPP
#define FLUXCOMPOSE_COMPOSER_HPP

// Concept-level requests -> planning problems -> workflows, and execution of
// workflows against in-process grounding stubs.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fluxcompose/error.hpp"
#include "fluxcompose/ontology.hpp"
#include "fluxcompose/planner.hpp"
#include "fluxcompose/registry.hpp"
#include "fluxcompose/term.hpp"

namespace fluxcompose {

struct TypedValue {
  std::string type;
  std::string value;
  friend bool operator==(const TypedValue&, const TypedValue&) = default;
};

struct CompositionRequest {
  std::vector<TypedValue> have;
  std::vector<std::string> want;
  std::vector<Term> worldFacts;
};

namespace detail {

/// Arity of F in know(F...) among the add effects, if it appears there.
inline std::optional<std::size_t> knowledgeArity(const std::vector<ActionSchema>& actions, const std::string& fluent) {
  for (const auto& a : actions) {
    for (const auto& t : a.adds) {
      if (isKnowledge(t) && t.args()[0].name() == fluent) return t.args()[0].arity();
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// S0 = worldFacts + know(F(v)) for each typed value; G = know(F(_)) for each
/// wanted concept (know(F) when F is a 0-ary knowledge effect); A = every
/// compiled registry service. Throws UnknownConceptError.
inline PlanningProblem buildProblem(const CompositionRequest& req, const Registry& reg, const TaxonomyGraph& g) {
  PlanningProblem p;
  p.actions = reg.actions();
  for (const auto& f : req.worldFacts) p.initial.insert(f);
  for (const auto& h : req.have) {
    if (!g.contains(h.type)) throw UnknownConceptError(h.type);
    p.initial.insert(know(Term::compound(reg.fluentFor(h.type), {Term::constant(h.value)})));
  }
  for (std::size_t i = 0; i < req.want.size(); ++i) {
    const auto& w = req.want[i];
    if (!g.contains(w)) throw UnknownConceptError(w);
    const std::string fluent = reg.fluentFor(w);
    const auto arity = detail::knowledgeArity(p.actions, fluent);
    if (arity && *arity == 0) {
      p.goal.push_back(know(Term::constant(fluent)));
    } else {
      std::vector<Term> args;
      for (std::size_t k = 0; k < arity.value_or(1); ++k) {
        args.push_back(Term::variable("_Want" + std::to_string(i) + "_" + std::to_string(k)));
      }
      p.goal.push_back(know(Term::compound(fluent, std::move(args))));
    }
  }
  return p;
}

struct DataSource {
  enum class Kind { Request, StepOutput, World };
  Kind kind = Kind::Request;
  std::size_t step = 0;  // producing step, for StepOutput
  std::string param;     // producing output parameter, for StepOutput
  std::string value;     // request value, placeholder name or world constant
};

struct DataFlowEdge {
  std::size_t step = 0;
  std::string param;
  std::string type;
  DataSource source;
  MatchDegree degree = MatchDegree::Exact;
};

struct WorkflowStep {
  std::string service;
  std::string stubId;
  GroundAction action;
  std::vector<ServiceParam> inputs;
  std::vector<ServiceParam> outputs;
};

struct Workflow {
  PlanningProblem problem;
  Plan plan;
  std::vector<WorkflowStep> steps;
  std::vector<DataFlowEdge> dataFlow;
};

namespace detail {

inline DataFlowEdge wireInput(const CompositionRequest& req, const Workflow& w, std::size_t stepIndex,
                              const ServiceParam& input, const Term& arg, const TaxonomyGraph& g) {
  DataFlowEdge e;
  e.step = stepIndex;
  e.param = input.name;
  e.type = input.type;
  if (auto it = w.plan.producedPlaceholders.find(arg.name()); arg.isPlaceholder() && it != w.plan.producedPlaceholders.end()) {
    const WorkflowStep& producer = w.steps.at(it->second);
    for (const auto& out : producer.outputs) {
      if (makePlaceholder(producer.service, out.name, it->second + 1).name() == arg.name()) {
        e.source = {DataSource::Kind::StepOutput, it->second, out.name, arg.name()};
        e.degree = matchDegree(out.type, input.type, g);
        if (e.degree < MatchDegree::Plugin) {
          throw Error("output " + out.name + " of step " + std::to_string(it->second) + " cannot feed input " +
                      input.name + " of step " + std::to_string(stepIndex) + " (" + to_string(e.degree) + ")");
        }
        return e;
      }
    }
  }
  const TypedValue* best = nullptr;
  MatchDegree bestDegree = MatchDegree::Fail;
  for (const auto& h : req.have) {
    if (h.value != arg.name()) continue;
    const MatchDegree d = matchDegree(h.type, input.type, g);
    if (d > bestDegree) {
      best = &h;
      bestDegree = d;
    }
  }
  if (best && bestDegree >= MatchDegree::Plugin) {
    e.source = {DataSource::Kind::Request, 0, {}, best->value};
    e.degree = bestDegree;
    return e;
  }
  // Known through a world fact seeded into S0 rather than a typed value.
  e.source = {DataSource::Kind::World, 0, {}, arg.str()};
  e.degree = MatchDegree::Exact;
  return e;
}

}  // namespace detail

/// Plans the request and wires every step input to its source.
/// Throws NoPlanFound, UnknownConceptError.
inline Workflow compose(const CompositionRequest& req, const Registry& reg, const TaxonomyGraph& g,
                        const SearchConfig& cfg = {}) {
  Workflow w;
  w.problem = buildProblem(req, reg, g);
  w.plan = plan(w.problem, cfg);
  for (std::size_t i = 0; i < w.plan.steps.size(); ++i) {
    const auto& action = w.plan.steps[i];
    const ServiceDescription* svc = reg.find(action.name);
    w.steps.push_back({svc->name, svc->groundingStubId, action, svc->inputs, svc->outputs});
    for (std::size_t k = 0; k < svc->inputs.size(); ++k) {
      w.dataFlow.push_back(detail::wireInput(req, w, i, svc->inputs[k], action.args[k], g));
    }
  }
  return w;
}

struct StubResult {
  std::map<std::string, std::string> outputs;  // output concept -> value
  std::string token;                           // outcome; "ok" when empty
};

/// Receives the step's inputs keyed by concept (e.g. "Profession") and
/// returns its outputs keyed the same way.
using Executor = std::function<StubResult(const std::map<std::string, std::string>& inputs)>;

/// Thrown by an executor to report a failed invocation.
class StubFailure : public Error {
 public:
  using Error::Error;
};

struct GroundingEnv {
  std::map<std::string, Executor> executors;
};

struct TraceRecord {
  std::size_t step = 0;
  std::string service;
  std::vector<std::pair<std::string, std::string>> inputs;   // param -> value
  std::vector<std::pair<std::string, std::string>> outputs;  // placeholder -> value
  std::string outcome;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct ExecutionTrace {
  std::vector<TraceRecord> records;
  /// Planned state with every placeholder replaced by its resolved value.
  State finalState;
  bool goalSatisfied = false;
};

class ExecutionError : public Error {
 public:
  ExecutionError(std::size_t step, std::string reason, ExecutionTrace partial)
      : Error("step " + std::to_string(step) + ": " + reason),
        step_(step),
        reason_(std::move(reason)),
        partial_(std::move(partial)) {}

  std::size_t step() const { return step_; }
  const std::string& reason() const { return reason_; }
  const ExecutionTrace& partialTrace() const { return partial_; }

 private:
  std::size_t step_;
  std::string reason_;
  ExecutionTrace partial_;
};

/// Runs the steps in order. Each stub's outputs replace that step's
/// placeholders for downstream steps. Throws ExecutionError carrying the
/// trace up to and including the failed step.
inline ExecutionTrace execute(const Workflow& w, const GroundingEnv& env) {
  for (std::size_t i = 0; i < w.steps.size(); ++i) {
    if (!env.executors.count(w.steps[i].stubId)) {
      throw ExecutionError(i, "no grounding stub '" + w.steps[i].stubId + "'", {});
    }
  }
  ExecutionTrace trace;
  std::map<std::string, std::string> resolved;
  State state = w.problem.initial;
  for (std::size_t i = 0; i < w.steps.size(); ++i) {
    const WorkflowStep& step = w.steps[i];
    TraceRecord rec{i, step.service, {}, {}, {}};
    std::map<std::string, std::string> inputs;
    Substitution::Map bindings;
    for (std::size_t k = 0; k < step.inputs.size(); ++k) {
      std::string value = step.action.args[k].str();
      if (auto it = resolved.find(value); it != resolved.end()) value = it->second;
      inputs[step.inputs[k].type] = value;
      rec.inputs.emplace_back(step.inputs[k].name, value);
      bindings.emplace(step.inputs[k].name, Term::constant(value));
    }
    StubResult result;
    try {
      result = env.executors.at(step.stubId)(inputs);
    } catch (const StubFailure& f) {
      rec.outcome = std::string("error: ") + f.what();
      trace.records.push_back(rec);
      trace.finalState = state;
      throw ExecutionError(i, f.what(), trace);
    }
    for (const auto& out : step.outputs) {
      auto it = result.outputs.find(out.type);
      if (it == result.outputs.end()) {
        rec.outcome = "error: missing output " + out.name;
        trace.records.push_back(rec);
        trace.finalState = state;
        throw ExecutionError(i, "stub returned no value for output " + out.name + " (" + out.type + ")", trace);
      }
      const std::string placeholder = makePlaceholder(step.service, out.name, i + 1).name();
      resolved[placeholder] = it->second;
      rec.outputs.emplace_back(placeholder, it->second);
      bindings.emplace(out.name, Term::constant(it->second));
    }
    const ActionSchema* schema = w.problem.findAction(step.service);
    try {
      state = applyUpdate(*schema, Substitution(std::move(bindings)), state);
    } catch (const PreconditionViolation& v) {
      rec.outcome = std::string("error: ") + v.what();
      trace.records.push_back(rec);
      trace.finalState = state;
      throw ExecutionError(i, v.what(), trace);
    }
    rec.outcome = result.token.empty() ? "ok" : result.token;
    trace.records.push_back(std::move(rec));
  }
  trace.finalState = state;
  trace.goalSatisfied = satisfiesGoal(w.problem.goal, state);
  return trace;
}

// Line formats, one record per line, tab-separated:
//   step <i> <service> <ground action> <stub>
//   flow <i> <param> <concept> <request|world|step<j>.<param>> <value> <degree>
//   record <i> <service> <k=v,...> <placeholder=v,...> <outcome>

inline std::string serialize(const Workflow& w) {
  std::string out;
  for (std::size_t i = 0; i < w.steps.size(); ++i) {
    const auto& s = w.steps[i];
    out += "step\t" + std::to_string(i) + "\t" + s.service + "\t" + s.action.str() + "\t" + s.stubId + "\n";
  }
  for (const auto& e : w.dataFlow) {
    std::string src;
    switch (e.source.kind) {
      case DataSource::Kind::Request: src = "request"; break;
      case DataSource::Kind::World: src = "world"; break;
      case DataSource::Kind::StepOutput: src = "step" + std::to_string(e.source.step) + "." + e.source.param; break;
    }
    out += "flow\t" + std::to_string(e.step) + "\t" + e.param + "\t" + e.type + "\t" + src + "\t" + e.source.value +
           "\t" + to_string(e.degree) + "\n";
  }
  return out;
}

inline std::string serialize(const ExecutionTrace& t) {
  auto join = [](const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (std::size_t i = 0; i < kv.size(); ++i) out += (i ? "," : "") + kv[i].first + "=" + kv[i].second;
    return out;
  };
  std::string out;
  for (const auto& r : t.records) {
    out += "record\t" + std::to_string(r.step) + "\t" + r.service + "\t" + join(r.inputs) + "\t" + join(r.outputs) +
           "\t" + r.outcome + "\n";
  }
  return out;
}

}  // namespace fluxcompose

#endif
