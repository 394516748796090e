#pragma once
#ifndef FLUXCOMPOSE_CLI_HPP
#define FLUXCOMPOSE_CLI_HPP

// Command-line front end. Exit codes: 0 success, 1 domain-level failure
// (no plan, no responder, failed execution), 2 usage or input-file error.
// Human text goes to `out`, diagnostics to `err`; --format machine prints
// tab-separated lines that are stable across runs.

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluxcompose/composer.hpp"
#include "fluxcompose/dsl.hpp"
#include "fluxcompose/event_log.hpp"
#include "fluxcompose/ontology.hpp"
#include "fluxcompose/planner.hpp"
#include "fluxcompose/registry.hpp"
#include "fluxcompose/scenario.hpp"

#ifndef FLUXCOMPOSE_DATA_DIR
#define FLUXCOMPOSE_DATA_DIR "data"
#endif

namespace fluxcompose::cli {

struct CliConfig {
  std::string domain;
  std::string problem;
  std::string taxonomy;
  std::string registry;
  std::string roster;
  std::string schedule;
  std::string log = "fluxcompose-events.log";
  int maxDepth = 8;
  std::string format = "text";

  bool machine() const { return format == "machine"; }
};

/// Bundled file paths under dataDir.
inline CliConfig defaultConfig(const std::string& dataDir = FLUXCOMPOSE_DATA_DIR) {
  CliConfig c;
  c.domain = dataDir + "/emergency.fcd";
  c.problem = dataDir + "/emergency.fcp";
  c.taxonomy = dataDir + "/emergency.tax";
  c.registry = dataDir + "/emergency.reg";
  c.roster = dataDir + "/roster.csv";
  c.schedule = dataDir + "/route.sched";
  return c;
}

/// An input file could not be read or parsed; carries the rendered message.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Runs a loader over a file, turning library errors into InputError with
/// file:line:col context.
template <typename F>
auto load(const std::string& path, F&& parse) {
  const std::string text = readFile(path);
  try {
    return parse(text);
  } catch (const Error& e) {
    throw InputError(e.describe(path));
  }
}

inline TaxonomyGraph taxonomy(const CliConfig& c) { return load(c.taxonomy, [](const std::string& s) { return loadTaxonomy(s); }); }

inline std::vector<SeverityRule> rules(const CliConfig& c, const TaxonomyGraph& g) {
  return load(c.taxonomy, [&](const std::string& s) { return loadSeverityRules(s, g); });
}

inline Registry registry(const CliConfig& c, const TaxonomyGraph& g) {
  return load(c.registry, [&](const std::string& s) { return loadRegistry(s, g); });
}

inline Roster roster(const CliConfig& c) { return load(c.roster, [](const std::string& s) { return loadRoster(s); }); }

inline RouteSchedule schedule(const CliConfig& c) {
  return load(c.schedule, [](const std::string& s) { return loadSchedule(s); });
}

inline DomainFile domain(const CliConfig& c) {
  return load(c.domain, [&](const std::string& s) { return parseDomain(s, c.domain); });
}

inline ProblemFile problem(const CliConfig& c, const DomainFile& d) {
  return load(c.problem, [&](const std::string& s) { return parseProblem(s, &d); });
}

inline std::string logPath(const CliConfig& c) {
  if (const char* env = std::getenv("FLUXCOMPOSE_LOG"); env && *env) return env;
  return c.log;
}

inline std::string joinSet(const std::set<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ",") + x;
  return out;
}

inline void printEvent(std::ostream& out, const EmergencyEvent& e) {
  out << "event " << e.id << ": " << e.date << " " << e.time << " " << e.patientName << " (" << e.pnr << ") coach "
      << e.coach << " seat " << e.seat << "\n";
  out << "  type " << to_string(e.eventType) << ", specialization " << e.specialization.value_or("none")
      << ", symptoms {" << joinSet(e.symptoms) << "}, severity " << to_string(e.severity) << "\n";
  out << "  case history: " << e.caseHistory << "\n";
  out << "  delivery personnel: " << e.deliveryPersonnel.value_or("none") << "\n";
  if (e.paymentCollected) out << "  payment collected\n";
}

}  // namespace detail

/// Parses argv and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg = defaultConfig();
  CLI::App app{"fluent-calculus planning and service composition"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--domain", cfg.domain, "domain file (.fcd)");
  app.add_option("--problem", cfg.problem, "problem file (.fcp)");
  app.add_option("--taxonomy", cfg.taxonomy, "taxonomy and severity rules (.tax)");
  app.add_option("--registry", cfg.registry, "service registry (.reg)");
  app.add_option("--roster", cfg.roster, "passenger roster (.csv)");
  app.add_option("--schedule", cfg.schedule, "route schedule (.sched)");
  app.add_option("--log", cfg.log, "event log; FLUXCOMPOSE_LOG overrides");
  app.add_option("--max-depth", cfg.maxDepth, "planner depth bound")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "text or machine")->check(CLI::IsMember({"text", "machine"}));

  auto* validate = app.add_subcommand("validate", "parse and check the input files");

  auto* planCmd = app.add_subcommand("plan", "plan the problem against the domain");

  std::vector<std::string> have, want, facts;
  auto* composeCmd = app.add_subcommand("compose", "compose a workflow for a request");
  composeCmd->add_option("--have", have, "known value as Concept=value")->required();
  composeCmd->add_option("--want", want, "requested concept")->required();
  composeCmd->add_option("--fact", facts, "ground world fluent");
  bool execute = false;
  composeCmd->add_flag("--execute", execute, "run the workflow against the roster stubs");

  std::string pnr, spec, symptoms, history, message = "help", eventType = "Medical", date, time;
  auto* traceCmd = app.add_subcommand("trace", "rank onboard responders for a patient");
  traceCmd->add_option("--pnr", pnr, "patient PNR")->required();
  traceCmd->add_option("--spec", spec, "specialization");
  traceCmd->add_option("--event-type", eventType, "Medical or Robbery");
  traceCmd->add_option("--time", time, "HH:MM, used for the fallback station");

  auto* severityCmd = app.add_subcommand("severity", "classify symptoms for a specialization");
  severityCmd->add_option("--spec", spec, "specialization")->required();
  severityCmd->add_option("--symptoms", symptoms, "comma-separated symptoms");

  auto* reportCmd = app.add_subcommand("report", "report an emergency and log it");
  reportCmd->add_option("--pnr", pnr, "caller PNR")->required();
  reportCmd->add_option("--spec", spec, "specialization");
  reportCmd->add_option("--symptoms", symptoms, "comma-separated symptoms");
  reportCmd->add_option("--history", history, "case history");
  reportCmd->add_option("--message", message, "message to the responder");
  reportCmd->add_option("--event-type", eventType, "Medical or Robbery");
  reportCmd->add_option("--date", date, "YYYY-MM-DD")->required();
  reportCmd->add_option("--time", time, "HH:MM")->required();

  std::string script = std::string(FLUXCOMPOSE_DATA_DIR) + "/scenario.scn";
  auto* simulateCmd = app.add_subcommand("simulate", "replay a scenario script");
  simulateCmd->add_option("--script", script, "scenario script (.scn)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const bool machine = cfg.machine();
  SearchConfig search;
  search.maxDepth = cfg.maxDepth;

  auto parseType = [&]() {
    auto t = parseEventType(eventType);
    if (!t) throw InputError("unknown event type '" + eventType + "' (Medical or Robbery)");
    return *t;
  };

  try {
    if (*validate) {
      auto report = [&](const char* kind, const std::string& path) {
        out << (machine ? std::string("ok\t") + kind + "\t" + path : std::string("ok  ") + kind + " " + path) << "\n";
      };
      const DomainFile d = detail::domain(cfg);
      report("domain", cfg.domain);
      detail::problem(cfg, d);
      report("problem", cfg.problem);
      const TaxonomyGraph g = detail::taxonomy(cfg);
      detail::rules(cfg, g);
      report("taxonomy", cfg.taxonomy);
      detail::registry(cfg, g);
      report("registry", cfg.registry);
      detail::roster(cfg);
      report("roster", cfg.roster);
      detail::schedule(cfg);
      report("schedule", cfg.schedule);
      return 0;
    }

    if (*planCmd) {
      const DomainFile d = detail::domain(cfg);
      const ProblemFile pf = detail::problem(cfg, d);
      PlanningProblem p{pf.initial, pf.goal, d.actions};
      const Plan result = plan(p, search);
      if (machine) {
        for (std::size_t i = 0; i < result.steps.size(); ++i) out << "action\t" << i << "\t" << result.steps[i].str() << "\n";
      } else {
        out << formatPlan(result);
      }
      return 0;
    }

    if (*composeCmd) {
      const TaxonomyGraph g = detail::taxonomy(cfg);
      const Registry reg = detail::registry(cfg, g);
      CompositionRequest req;
      for (const auto& h : have) {
        const auto eq = h.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == h.size()) {
          throw InputError("--have expects Concept=value, got '" + h + "'");
        }
        req.have.push_back({h.substr(0, eq), h.substr(eq + 1)});
      }
      req.want = want;
      for (const auto& f : facts) {
        try {
          req.worldFacts.push_back(parseFluent(f));
        } catch (const Error& e) {
          throw InputError(e.describe("--fact"));
        }
      }
      Workflow w;
      try {
        w = compose(req, reg, g, search);
      } catch (const UnknownConceptError& e) {
        throw InputError(e.what());
      }
      if (machine) {
        out << serialize(w);
      } else {
        for (std::size_t i = 0; i < w.steps.size(); ++i) {
          out << i + 1 << ". " << w.steps[i].action.str() << "  [" << w.steps[i].stubId << "]\n";
        }
        for (const auto& e : w.dataFlow) {
          out << "   step " << e.step + 1 << " " << e.param << " : " << e.type << " <- ";
          switch (e.source.kind) {
            case DataSource::Kind::Request: out << "request " << e.source.value; break;
            case DataSource::Kind::World: out << "world " << e.source.value; break;
            case DataSource::Kind::StepOutput: out << "step " << e.source.step + 1 << " " << e.source.param; break;
          }
          out << " (" << to_string(e.degree) << ")\n";
        }
      }
      if (execute) {
        const Roster roster = detail::roster(cfg);
        EmergencyEvent ev;
        ev.coach = roster.coachOrder().empty() ? std::string() : roster.coachOrder().front();
        MessageSink sink;
        const ExecutionTrace t = fluxcompose::execute(w, makeGroundingEnv(roster, ev, TraceConfig{}, sink));
        out << (machine ? serialize(t) : "executed: " + std::string(t.goalSatisfied ? "goal reached" : "goal not reached") + "\n");
        if (!machine) out << serialize(t);
      }
      return 0;
    }

    if (*traceCmd) {
      const Roster roster = detail::roster(cfg);
      const Passenger& patient = roster.at(pnr);
      EmergencyEvent ev;
      ev.pnr = patient.pnr;
      ev.patientName = patient.name;
      ev.coach = patient.coach;
      ev.seat = patient.seat;
      ev.eventType = parseType();
      if (!spec.empty()) ev.specialization = spec;
      try {
        const auto ranked = traceResources(roster, ev);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
          const auto& r = ranked[i];
          if (machine) {
            out << "responder\t" << i + 1 << "\t" << r.name << "\t" << r.profession << "\t"
                << r.specialization.value_or("-") << "\t" << r.coach << "\t" << r.distance << "\t" << r.tier << "\n";
          } else {
            out << i + 1 << ". " << r.name << " (" << r.profession;
            if (r.specialization) out << ", " << *r.specialization;
            out << ") coach " << r.coach << ", distance " << r.distance << "\n";
          }
        }
        return 0;
      } catch (const FallbackRequired& f) {
        if (!time.empty()) {
          const auto now = parseTimeOfDay(time);
          if (!now) throw InputError("--time expects HH:MM, got '" + time + "'");
          const FallbackNotice n = fallbackStationNotice(ev, detail::schedule(cfg), *now, f.what());
          out << (machine ? "fallback\t" + n.station : "fallback: notify station " + n.station) << "\n";
        }
        err << "error: " << f.what() << "\n";
        return 1;
      }
    }

    if (*severityCmd) {
      const TaxonomyGraph g = detail::taxonomy(cfg);
      const auto rs = detail::rules(cfg, g);
      const auto concept_ = g.findConcept(spec);
      if (!concept_) throw InputError("unknown specialization '" + spec + "'");
      const Severity s = classifySeverity(*concept_, fluxcompose::detail::splitSet(symptoms), rs);
      out << (machine ? std::string("severity\t") : std::string()) << to_string(s) << "\n";
      return 0;
    }

    ScenarioContext ctx;
    ctx.taxonomy = detail::taxonomy(cfg);
    ctx.rules = detail::rules(cfg, ctx.taxonomy);
    ctx.registry = detail::registry(cfg, ctx.taxonomy);
    ctx.roster = detail::roster(cfg);
    ctx.schedule = detail::schedule(cfg);
    ctx.logPath = detail::logPath(cfg);
    ctx.search = search;

    if (*reportCmd) {
      if (!fluxcompose::detail::validDate(date) || !parseTimeOfDay(time)) {
        throw InputError("--date expects YYYY-MM-DD and --time HH:MM");
      }
      ctx.clock = [date, time] { return Timestamp{date, time}; };
      EmergencyInfo info;
      info.type = parseType();
      if (!spec.empty()) info.specialization = spec;
      info.symptoms = fluxcompose::detail::splitSet(symptoms);
      info.caseHistory = history;
      info.message = message;
      try {
        const EmergencyEvent ev = reportEmergency(ctx, pnr, info);
        if (machine) out << serializeRecord(ev) << "\n";
        else detail::printEvent(out, ev);
        return 0;
      } catch (const NoResponderAvailable& n) {
        if (machine) out << serializeRecord(n.notice()) << "\n";
        else out << "fallback " << n.notice().event.id << ": notify station " << n.notice().station << "\n";
        err << "error: " << n.what() << "\n";
        return 1;
      }
    }

    if (*simulateCmd) {
      const std::string text = detail::readFile(script);
      const std::size_t before = readEventLog(ctx.logPath).size();
      ScenarioSummary sum;
      try {
        sum = runScenario(text, ctx);
      } catch (const ScriptError& e) {
        throw InputError(e.describe(script));
      }
      if (machine) {
        const auto records = readEventLog(ctx.logPath);
        for (std::size_t i = before; i < records.size(); ++i) out << serializeRecord(records[i]) << "\n";
      } else {
        for (const auto& line : sum.lines) out << line << "\n";
        out << sum.events << " events, " << sum.fallbacks << " fallbacks, " << sum.errors << " errors\n";
      }
      return sum.errors == 0 ? 0 : 1;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownPassengerError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fluxcompose::cli

#endif
