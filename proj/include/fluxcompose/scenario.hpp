#pragma once
#ifndef FLUXCOMPOSE_SCENARIO_HPP
#define FLUXCOMPOSE_SCENARIO_HPP

// Emergency-healthcare application layer: passenger roster, registration and
// travel validation, responder tracing, fallback station notices, emergency
// reporting and scripted scenario replay.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fluxcompose/composer.hpp"
#include "fluxcompose/error.hpp"
#include "fluxcompose/event_log.hpp"
#include "fluxcompose/ontology.hpp"
#include "fluxcompose/planner.hpp"
#include "fluxcompose/registry.hpp"

namespace fluxcompose {

enum class Role { None, Patient, DeliveryPersonnel };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Patient: return "Patient";
    case Role::DeliveryPersonnel: return "DeliveryPersonnel";
    case Role::None: return "None";
  }
  return "None";
}

struct TravelPlan {
  std::string origin;
  std::string destination;
  std::string journeyDate;  // YYYY-MM-DD
  bool validated = false;
  friend bool operator==(const TravelPlan&, const TravelPlan&) = default;
};

struct Passenger {
  std::string pnr;
  std::string name;
  std::string coach;
  int seat = 0;
  bool registeredForService = false;
  bool noMedicalService = false;
  Role role = Role::None;
  std::optional<std::string> profession;
  std::optional<std::string> specialization;
  std::optional<std::string> illness;
  std::optional<std::string> medication;
  std::optional<std::string> medicineInHand;
  TravelPlan travel;
  friend bool operator==(const Passenger&, const Passenger&) = default;
};

class UnknownPassengerError : public Error {
 public:
  explicit UnknownPassengerError(const std::string& pnr) : Error("unknown passenger " + pnr), pnr_(pnr) {}
  const std::string& pnr() const { return pnr_; }

 private:
  std::string pnr_;
};

class RosterLoadError : public Error {
 public:
  struct Issue {
    std::size_t line;
    std::string message;
  };

  explicit RosterLoadError(std::vector<Issue> issues)
      : Error(message(issues), issues.empty() ? 0 : issues.front().line, issues.empty() ? 0 : 1),
        issues_(std::move(issues)) {}
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  static std::string message(const std::vector<Issue>& issues) {
    std::string out;
    for (const auto& i : issues) {
      if (!out.empty()) out += "; ";
      out += "line " + std::to_string(i.line) + ": " + i.message;
    }
    return out;
  }
  std::vector<Issue> issues_;
};

class Roster {
 public:
  Roster() = default;
  Roster(std::vector<std::string> coachOrder, std::vector<Passenger> passengers)
      : coachOrder_(std::move(coachOrder)), passengers_(std::move(passengers)) {}

  const std::vector<std::string>& coachOrder() const { return coachOrder_; }
  const std::vector<Passenger>& passengers() const { return passengers_; }
  std::size_t size() const { return passengers_.size(); }

  std::optional<std::size_t> coachIndex(const std::string& coach) const {
    auto it = std::find(coachOrder_.begin(), coachOrder_.end(), coach);
    if (it == coachOrder_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - coachOrder_.begin());
  }

  const Passenger* find(const std::string& pnr) const {
    for (const auto& p : passengers_) {
      if (p.pnr == pnr) return &p;
    }
    return nullptr;
  }

  /// Throws UnknownPassengerError.
  const Passenger& at(const std::string& pnr) const {
    if (const auto* p = find(pnr)) return *p;
    throw UnknownPassengerError(pnr);
  }

  /// Replaces the passenger with the same PNR. Throws UnknownPassengerError.
  void replace(const Passenger& updated) {
    for (auto& p : passengers_) {
      if (p.pnr == updated.pnr) {
        p = updated;
        return;
      }
    }
    throw UnknownPassengerError(updated.pnr);
  }

  /// The passenger leaves the train. Throws UnknownPassengerError.
  void remove(const std::string& pnr) {
    auto it = std::find_if(passengers_.begin(), passengers_.end(), [&](const Passenger& p) { return p.pnr == pnr; });
    if (it == passengers_.end()) throw UnknownPassengerError(pnr);
    passengers_.erase(it);
  }

 private:
  std::vector<std::string> coachOrder_;
  std::vector<Passenger> passengers_;
};

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

/// Comma-separated fields; double quotes protect commas, "" is a quote.
inline std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  for (auto& f : out) f = trim(f);
  return out;
}

inline bool validCoachId(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && std::isupper(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

inline bool validDate(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  const int month = std::stoi(s.substr(5, 2));
  const int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::optional<std::string> optionalField(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

}  // namespace detail

inline const std::vector<std::string>& rosterHeader() {
  static const std::vector<std::string> header = {
      "pnr",     "name",       "coach",     "seat",             "role",   "profession",  "specialization",
      "registered", "illness", "medication", "medicine_in_hand", "origin", "destination", "date"};
  return header;
}

/// Parses the roster. Every malformed row is reported; throws
/// RosterLoadError listing all of them.
inline Roster loadRoster(std::string_view source) {
  std::vector<RosterLoadError::Issue> issues;
  std::vector<std::string> coachOrder;
  std::vector<Passenger> passengers;
  bool haveHeader = false;
  std::set<std::string> pnrs;

  std::istringstream in{std::string(source)};
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.rfind("#coach-order:", 0) == 0) {
      coachOrder = detail::splitCsv(line.substr(13));
      for (const auto& c : coachOrder) {
        if (!detail::validCoachId(c)) issues.push_back({lineNo, "invalid coach id '" + c + "' in coach order"});
      }
      continue;
    }
    if (line.front() == '#') continue;
    auto fields = detail::splitCsv(line);
    if (!haveHeader) {
      if (fields != rosterHeader()) {
        issues.push_back({lineNo, "expected header row 'pnr,name,coach,...,date'"});
        break;
      }
      haveHeader = true;
      continue;
    }
    if (fields.size() != rosterHeader().size()) {
      issues.push_back({lineNo, "expected " + std::to_string(rosterHeader().size()) + " fields, found " +
                                    std::to_string(fields.size())});
      continue;
    }
    auto bad = [&](const std::string& msg) { issues.push_back({lineNo, msg}); };
    const std::size_t before = issues.size();
    Passenger p;
    p.pnr = fields[0];
    p.name = fields[1];
    p.coach = fields[2];
    if (p.pnr.empty()) bad("missing pnr");
    else if (!pnrs.insert(p.pnr).second) bad("duplicate pnr " + p.pnr);
    if (p.name.empty()) bad("missing name");
    if (!detail::validCoachId(p.coach)) {
      bad("unknown coach format '" + p.coach + "'");
    } else if (std::find(coachOrder.begin(), coachOrder.end(), p.coach) == coachOrder.end()) {
      bad("coach " + p.coach + " is not in the coach order");
    }
    try {
      std::size_t used = 0;
      p.seat = std::stoi(fields[3], &used);
      if (used != fields[3].size() || p.seat < 1) throw std::invalid_argument("seat");
    } catch (const std::exception&) {
      bad("invalid seat '" + fields[3] + "'");
    }
    const std::string& role = fields[4];
    if (role == "Patient") p.role = Role::Patient;
    else if (role == "DeliveryPersonnel") p.role = Role::DeliveryPersonnel;
    else if (role == "None" || role.empty()) p.role = Role::None;
    else bad("unknown role '" + role + "'");
    p.profession = detail::optionalField(detail::lowercase(fields[5]));
    p.specialization = detail::optionalField(detail::lowercase(fields[6]));
    if (p.role == Role::DeliveryPersonnel && !p.profession) bad("delivery personnel must register a profession");
    const std::string reg = detail::lowercase(fields[7]);
    if (reg == "no" || reg.empty()) {
      p.registeredForService = false;
    } else if (reg == "yes") {
      p.registeredForService = true;
    } else if (reg == "validated") {
      p.registeredForService = true;
      p.travel.validated = true;
    } else {
      bad("registered must be no, yes or validated");
    }
    p.illness = detail::optionalField(fields[8]);
    p.medication = detail::optionalField(fields[9]);
    p.medicineInHand = detail::optionalField(fields[10]);
    p.travel.origin = fields[11];
    p.travel.destination = fields[12];
    p.travel.journeyDate = fields[13];
    if (p.travel.origin.empty() || p.travel.destination.empty()) bad("missing origin or destination");
    else if (p.travel.origin == p.travel.destination) bad("origin equals destination");
    if (!detail::validDate(p.travel.journeyDate)) bad("invalid date '" + p.travel.journeyDate + "'");
    if (issues.size() == before) passengers.push_back(std::move(p));
  }
  if (!haveHeader && issues.empty()) issues.push_back({lineNo == 0 ? 1 : lineNo, "missing header row"});
  if (coachOrder.empty() && issues.empty()) issues.push_back({1, "missing #coach-order line"});
  if (!issues.empty()) throw RosterLoadError(std::move(issues));
  return Roster(std::move(coachOrder), std::move(passengers));
}

struct MedicalDetails {
  std::optional<std::string> illness;
  std::optional<std::string> medication;
  std::optional<std::string> medicineInHand;
  std::optional<std::string> profession;
  std::optional<std::string> specialization;
};

struct Registration {
  Passenger passenger;
  /// (individual name, concept) asserted into the ontology on opt-in.
  std::optional<std::pair<std::string, std::string>> individual;
  std::string notice;
};

/// Opt-in stores the medical details and asserts an ontology individual;
/// opting out flags the passenger "no medical Service".
/// Throws UnknownPassengerError, or Error when delivery personnel lack a
/// profession.
inline Registration registerPassenger(const Roster& roster, const std::string& pnr, bool optIn,
                                      const MedicalDetails& details = {}) {
  Passenger p = roster.at(pnr);
  Registration r;
  if (!optIn) {
    p.registeredForService = false;
    p.noMedicalService = true;
    r.notice = "no medical Service";
    r.passenger = std::move(p);
    return r;
  }
  if (details.illness) p.illness = details.illness;
  if (details.medication) p.medication = details.medication;
  if (details.medicineInHand) p.medicineInHand = details.medicineInHand;
  if (details.profession) p.profession = detail::lowercase(*details.profession);
  if (details.specialization) p.specialization = detail::lowercase(*details.specialization);
  if (p.role == Role::None) p.role = p.profession ? Role::DeliveryPersonnel : Role::Patient;
  if (p.role == Role::DeliveryPersonnel && !p.profession) {
    throw Error("delivery personnel " + pnr + " must register a profession");
  }
  p.registeredForService = true;
  p.noMedicalService = false;
  r.individual = std::make_pair(detail::lowercase(pnr),
                                std::string(p.role == Role::DeliveryPersonnel ? "DeliveryPersonnel" : "PatientPopulation"));
  r.notice = "registered";
  r.passenger = std::move(p);
  return r;
}

/// Applies a registration's individual assertion to the ontology.
inline TaxonomyGraph assertRegistration(const TaxonomyGraph& g, const Registration& r) {
  if (!r.individual) return g;
  return g.withIndividual(r.individual->first, r.individual->second);
}

class NotRegisteredError : public Error {
 public:
  explicit NotRegisteredError(const std::string& pnr) : Error("passenger " + pnr + " is not registered for service") {}
};

class ValidationMismatch : public Error {
 public:
  ValidationMismatch(std::string field, const std::string& expected, const std::string& given)
      : Error(field + " mismatch: ticket says '" + expected + "', given '" + given + "'"), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Confirms the journey against the ticket. Throws NotRegisteredError or
/// ValidationMismatch naming the first differing field.
inline Passenger validateTravelPlan(const Passenger& p, const std::string& origin, const std::string& destination,
                                    const std::string& date) {
  if (!p.registeredForService) throw NotRegisteredError(p.pnr);
  if (origin != p.travel.origin) throw ValidationMismatch("origin", p.travel.origin, origin);
  if (destination != p.travel.destination) throw ValidationMismatch("destination", p.travel.destination, destination);
  if (date != p.travel.journeyDate) throw ValidationMismatch("journeyDate", p.travel.journeyDate, date);
  Passenger out = p;
  out.travel.validated = true;
  return out;
}

struct TraceConfig {
  std::vector<std::string> medicalProfessions = {"doctor", "nurse", "paramedic", "pharmacist"};
};

struct RankedResponder {
  std::string pnr;
  std::string name;
  std::string profession;
  std::optional<std::string> specialization;
  std::string coach;
  std::size_t coachIndex = 0;
  std::size_t distance = 0;
  int tier = 0;
  friend bool operator==(const RankedResponder&, const RankedResponder&) = default;
};

class FallbackRequired : public Error {
 public:
  using Error::Error;
};

/// Ranking key: tier, coach distance, coach position, name, pnr.
inline bool responderLess(const RankedResponder& a, const RankedResponder& b) {
  return std::tie(a.tier, a.distance, a.coachIndex, a.name, a.pnr) <
         std::tie(b.tier, b.distance, b.coachIndex, b.name, b.pnr);
}

/// Registered, travel-validated delivery personnel of a medical profession
/// (other than the patient), ranked by responderLess. Tier 0 is a doctor of
/// the event's specialization, 1 any other doctor, 2 other medical staff.
/// Throws FallbackRequired when nobody qualifies or the event is not medical.
inline std::vector<RankedResponder> traceResources(const Roster& roster, const EmergencyEvent& event,
                                                   const TraceConfig& cfg = {}) {
  if (event.eventType != EventType::Medical) throw FallbackRequired("no onboard responders for robbery events");
  const auto patientIdx = roster.coachIndex(event.coach);
  if (!patientIdx) throw Error("patient coach " + event.coach + " is not in the coach order");
  const std::string wanted = event.specialization ? detail::lowercase(*event.specialization) : std::string();
  std::vector<RankedResponder> out;
  for (const auto& p : roster.passengers()) {
    if (p.role != Role::DeliveryPersonnel || !p.registeredForService || !p.travel.validated) continue;
    if (!p.profession || p.pnr == event.pnr) continue;
    const auto& professions = cfg.medicalProfessions;
    if (std::find(professions.begin(), professions.end(), *p.profession) == professions.end()) continue;
    RankedResponder r;
    r.pnr = p.pnr;
    r.name = p.name;
    r.profession = *p.profession;
    r.specialization = p.specialization;
    r.coach = p.coach;
    r.coachIndex = *roster.coachIndex(p.coach);
    r.distance = r.coachIndex > *patientIdx ? r.coachIndex - *patientIdx : *patientIdx - r.coachIndex;
    if (r.profession == "doctor") {
      r.tier = (!wanted.empty() && p.specialization == wanted) ? 0 : 1;
    } else {
      r.tier = 2;
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw FallbackRequired("no medical personnel available on board");
  std::sort(out.begin(), out.end(), responderLess);
  return out;
}

/// Minutes since midnight from "HH:MM"; nullopt when malformed.
inline std::optional<int> parseTimeOfDay(std::string_view s) {
  if (s.size() != 5 || s[2] != ':') return std::nullopt;
  for (std::size_t i : {0u, 1u, 3u, 4u}) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
  }
  const int h = (s[0] - '0') * 10 + (s[1] - '0');
  const int m = (s[3] - '0') * 10 + (s[4] - '0');
  if (h > 23 || m > 59) return std::nullopt;
  return h * 60 + m;
}

inline std::string formatTimeOfDay(int minutes) {
  std::string out(5, ':');
  out[0] = static_cast<char>('0' + minutes / 600);
  out[1] = static_cast<char>('0' + (minutes / 60) % 10);
  out[3] = static_cast<char>('0' + (minutes % 60) / 10);
  out[4] = static_cast<char>('0' + minutes % 10);
  return out;
}

struct RouteStop {
  std::string station;
  int arrival = 0;  // minutes since midnight
  friend bool operator==(const RouteStop&, const RouteStop&) = default;
};

struct RouteSchedule {
  std::vector<RouteStop> stops;
};

class ScheduleParseError : public Error {
 public:
  using Error::Error;
};

/// `station <id> @ <HH:MM>` lines; arrival times strictly increasing.
inline RouteSchedule loadSchedule(std::string_view source) {
  RouteSchedule s;
  std::istringstream in{std::string(source)};
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const auto words = detail::splitWords(detail::stripComment(raw));
    if (words.empty()) continue;
    if (words.size() != 4 || words[0] != "station" || words[2] != "@") {
      throw ScheduleParseError("expected 'station <id> @ <HH:MM>'", lineNo, 1);
    }
    auto t = parseTimeOfDay(words[3]);
    if (!t) throw ScheduleParseError("invalid time '" + words[3] + "'", lineNo, detail::columnOf(raw, words[3]));
    if (!s.stops.empty() && *t <= s.stops.back().arrival) {
      throw ScheduleParseError("arrival times must be strictly increasing", lineNo, detail::columnOf(raw, words[3]));
    }
    s.stops.push_back({words[1], *t});
  }
  return s;
}

/// Notice to the first station still ahead (arrival later than now), or the
/// final station when the train has passed them all.
inline FallbackNotice fallbackStationNotice(const EmergencyEvent& event, const RouteSchedule& schedule, int now,
                                            std::string reason = "no medical personnel available on board") {
  if (schedule.stops.empty()) throw Error("route schedule is empty");
  auto it = std::find_if(schedule.stops.begin(), schedule.stops.end(), [now](const RouteStop& s) { return s.arrival > now; });
  const RouteStop& stop = it == schedule.stops.end() ? schedule.stops.back() : *it;
  return FallbackNotice{event, stop.station, std::move(reason)};
}

struct Timestamp {
  std::string date;  // YYYY-MM-DD
  std::string time;  // HH:MM
};

/// Injected time source.
using Clock = std::function<Timestamp()>;

struct Message {
  std::string name;
  std::string coach;
  std::string text;
  friend bool operator==(const Message&, const Message&) = default;
};

/// Collects delivered messages and, when a path is set, appends them to that
/// file as tab-separated lines. Single writer.
class MessageSink {
 public:
  MessageSink() = default;
  explicit MessageSink(std::string path) : path_(std::move(path)) {}

  void deliver(const Message& m) {
    messages_.push_back(m);
    if (path_) {
      std::ofstream out(*path_, std::ios::app);
      if (!out) throw PersistenceError(*path_, "cannot open message sink");
      out << m.name << '\t' << m.coach << '\t' << m.text << '\n';
    }
  }

  const std::vector<Message>& messages() const { return messages_; }

 private:
  std::optional<std::string> path_;
  std::vector<Message> messages_;
};

/// Stubs behind the bundled registry: "findResourceStub" returns the
/// top-ranked responder with the requested profession and specialization;
/// "notifyResourceStub" delivers the message and confirms with ConfirmSend.
inline GroundingEnv makeGroundingEnv(const Roster& roster, const EmergencyEvent& event, const TraceConfig& cfg,
                                     MessageSink& sink) {
  GroundingEnv env;
  env.executors["findResourceStub"] = [&roster, event, cfg](const std::map<std::string, std::string>& in) {
    const std::string profession = detail::lowercase(in.at("Profession"));
    const std::string specialization = detail::lowercase(in.at("Specialization"));
    std::vector<RankedResponder> ranked;
    try {
      ranked = traceResources(roster, event, cfg);
    } catch (const FallbackRequired&) {
      throw StubFailure("no matching resource");
    }
    for (const auto& r : ranked) {
      if (r.profession == profession && r.specialization.value_or("none") == specialization) {
        return StubResult{{{"Name", r.name}, {"Coach", r.coach}}, {}};
      }
    }
    throw StubFailure("no matching resource");
  };
  env.executors["notifyResourceStub"] = [&sink](const std::map<std::string, std::string>& in) {
    sink.deliver({in.at("Name"), in.at("Coach"), in.at("Message")});
    return StubResult{{}, "ConfirmSend"};
  };
  return env;
}

struct ScenarioContext {
  TaxonomyGraph taxonomy;
  std::vector<SeverityRule> rules;
  Registry registry;
  Roster roster;
  RouteSchedule schedule;
  Clock clock;
  std::string logPath;
  SearchConfig search;
  TraceConfig trace;
  MessageSink sink;
};

struct EmergencyInfo {
  EventType type = EventType::Medical;
  std::optional<std::string> specialization;
  std::set<std::string> symptoms;
  std::string caseHistory;
  std::string message = "help";
  MedicalDetails details;  // used when the caller registers on the spot
};

class NoResponderAvailable : public Error {
 public:
  explicit NoResponderAvailable(FallbackNotice notice)
      : Error("no responder available; notified " + notice.station), notice_(std::move(notice)) {}
  const FallbackNotice& notice() const { return notice_; }

 private:
  FallbackNotice notice_;
};

/// Handles one emergency call end to end: registers an unregistered caller
/// (payment collected), classifies severity, traces responders, composes and
/// executes the find/notify workflow and appends the record to the log.
/// When nobody can respond a fallback notice is logged instead and
/// NoResponderAvailable is thrown. Other failures propagate and log nothing.
inline EmergencyEvent reportEmergency(ScenarioContext& ctx, const std::string& pnr, const EmergencyInfo& info) {
  Passenger caller = ctx.roster.at(pnr);
  EmergencyEvent ev;
  if (!caller.registeredForService) {
    Registration reg = registerPassenger(ctx.roster, pnr, true, info.details);
    ctx.roster.replace(reg.passenger);
    ctx.taxonomy = assertRegistration(ctx.taxonomy, reg);
    caller = reg.passenger;
    ev.paymentCollected = true;
  }
  const Timestamp now = ctx.clock();
  const auto minutes = parseTimeOfDay(now.time);
  if (!minutes) throw Error("clock returned invalid time '" + now.time + "'");
  ev.date = now.date;
  ev.time = now.time;
  ev.patientName = caller.name;
  ev.pnr = caller.pnr;
  ev.caseHistory = info.caseHistory;
  ev.coach = caller.coach;
  ev.seat = caller.seat;
  ev.eventType = info.type;
  if (info.specialization) ev.specialization = detail::lowercase(*info.specialization);
  ev.symptoms = info.symptoms;
  const std::string specConcept =
      ev.specialization ? ctx.taxonomy.findConcept(*ev.specialization).value_or(*ev.specialization) : std::string();
  ev.severity = classifySeverity(specConcept, ev.symptoms, ctx.rules);

  auto fallback = [&](const std::string& reason) {
    ev.outcome = "fallback";
    ev.deliveryPersonnel = "none";
    FallbackNotice notice = fallbackStationNotice(ev, ctx.schedule, *minutes, reason);
    notice.event.id = appendEventLog(notice, ctx.logPath);
    throw NoResponderAvailable(std::move(notice));
  };

  std::vector<RankedResponder> ranked;
  try {
    ranked = traceResources(ctx.roster, ev, ctx.trace);
  } catch (const FallbackRequired& f) {
    fallback(f.what());
  }
  for (const auto& r : ranked) ev.rankedResponders.push_back(r.name);

  const RankedResponder& top = ranked.front();
  CompositionRequest req;
  req.have = {{"Profession", top.profession},
              {"Specialization", top.specialization.value_or("none")},
              {"Message", info.message}};
  req.want = {"ConfirmSend"};
  for (const auto& r : ranked) {
    req.worldFacts.push_back(Term::compound(
        "availableRole", {Term::constant(r.profession), Term::constant(r.specialization.value_or("none"))}));
  }
  const Workflow w = compose(req, ctx.registry, ctx.taxonomy, ctx.search);
  const ExecutionTrace trace = execute(w, makeGroundingEnv(ctx.roster, ev, ctx.trace, ctx.sink));
  for (const auto& rec : trace.records) {
    for (const auto& [placeholder, value] : rec.outputs) {
      // The Name output of the find step is the assigned responder.
      for (const auto& out : w.steps[rec.step].outputs) {
        if (out.type == "Name" && makePlaceholder(rec.service, out.name, rec.step + 1).name() == placeholder) {
          ev.deliveryPersonnel = value;
        }
      }
    }
  }
  ev.outcome = trace.records.empty() ? "ok" : trace.records.back().outcome;
  if (!ev.deliveryPersonnel) throw Error("workflow completed without assigning a responder");
  ev.id = appendEventLog(ev, ctx.logPath);
  return ev;
}

class ScriptError : public Error {
 public:
  using Error::Error;
};

namespace detail {

/// `word key=value key="quoted value" ...`
inline std::pair<std::string, std::map<std::string, std::string>> parseCommand(const std::string& line,
                                                                                std::size_t lineNo) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  skip();
  std::string cmd;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) cmd += line[i++];
  std::map<std::string, std::string> args;
  for (skip(); i < line.size(); skip()) {
    const std::size_t start = i;
    std::string key;
    while (i < line.size() && line[i] != '=' && !std::isspace(static_cast<unsigned char>(line[i]))) key += line[i++];
    if (i >= line.size() || line[i] != '=' || key.empty()) throw ScriptError("expected key=value", lineNo, start + 1);
    ++i;
    std::string value;
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (i < line.size() && line[i] != '"') value += line[i++];
      if (i >= line.size()) throw ScriptError("unterminated quoted value", lineNo, start + 1);
      ++i;
    } else {
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) value += line[i++];
    }
    if (!args.emplace(key, value).second) throw ScriptError("duplicate key " + key, lineNo, start + 1);
  }
  return {cmd, args};
}

inline std::set<std::string> splitSet(const std::string& s) {
  std::set<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  return out;
}

}  // namespace detail

struct ScenarioSummary {
  std::vector<std::string> lines;
  std::size_t events = 0;
  std::size_t fallbacks = 0;
  std::size_t errors = 0;
};

/// Replays a scenario script against ctx. The script's `clock` command (or
/// date=/time= on a report) drives ctx.clock. Commands:
///   clock date=YYYY-MM-DD time=HH:MM
///   register pnr=.. optin=yes|no [illness=..] [medication=..] [medicine=..] [profession=..] [specialization=..]
///   validate pnr=.. origin=.. destination=.. date=..
///   deboard pnr=..
///   report pnr=.. [type=Medical|Robbery] [spec=..] [symptoms=a,b] [history=..] [message=..] [date=..] [time=..]
/// Throws ScriptError on malformed commands; domain failures are recorded in
/// the summary and replay continues.
inline ScenarioSummary runScenario(std::string_view script, ScenarioContext& ctx) {
  ScenarioSummary sum;
  auto now = std::make_shared<Timestamp>(Timestamp{"1970-01-01", "00:00"});
  ctx.clock = [now] { return *now; };
  std::istringstream in{std::string(script)};
  std::string raw;
  std::size_t lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const std::string line = detail::trim(detail::stripComment(raw));
    if (line.empty()) continue;
    auto [cmd, args] = detail::parseCommand(line, lineNo);
    auto get = [&, &args = args, &cmd = cmd](const std::string& key) -> std::string {
      auto it = args.find(key);
      if (it == args.end()) throw ScriptError(cmd + " requires " + key + "=", lineNo, 1);
      return it->second;
    };
    auto opt = [&args = args](const std::string& key) -> std::optional<std::string> {
      auto it = args.find(key);
      if (it == args.end() || it->second.empty()) return std::nullopt;
      return it->second;
    };
    auto setClock = [&](bool required) {
      auto d = opt("date");
      auto t = opt("time");
      if (required && (!d || !t)) throw ScriptError("clock requires date= and time=", lineNo, 1);
      if (d) {
        if (!detail::validDate(*d)) throw ScriptError("invalid date '" + *d + "'", lineNo, 1);
        now->date = *d;
      }
      if (t) {
        if (!parseTimeOfDay(*t)) throw ScriptError("invalid time '" + *t + "'", lineNo, 1);
        now->time = *t;
      }
    };
    const std::string prefix = cmd + " " + (args.count("pnr") ? args.at("pnr") : std::string()) + ": ";
    try {
      if (cmd == "clock") {
        setClock(true);
        sum.lines.push_back("clock " + now->date + " " + now->time);
      } else if (cmd == "register") {
        const std::string optin = get("optin");
        if (optin != "yes" && optin != "no") throw ScriptError("optin must be yes or no", lineNo, 1);
        MedicalDetails d{opt("illness"), opt("medication"), opt("medicine"), opt("profession"), opt("specialization")};
        Registration r = registerPassenger(ctx.roster, get("pnr"), optin == "yes", d);
        ctx.roster.replace(r.passenger);
        ctx.taxonomy = assertRegistration(ctx.taxonomy, r);
        sum.lines.push_back(prefix + r.notice);
      } else if (cmd == "validate") {
        Passenger p = validateTravelPlan(ctx.roster.at(get("pnr")), get("origin"), get("destination"), get("date"));
        ctx.roster.replace(p);
        sum.lines.push_back(prefix + "travel validated");
      } else if (cmd == "deboard") {
        ctx.roster.remove(get("pnr"));
        sum.lines.push_back(prefix + "left the train");
      } else if (cmd == "report") {
        setClock(false);
        EmergencyInfo info;
        if (auto t = opt("type")) {
          auto parsed = parseEventType(*t);
          if (!parsed) throw ScriptError("unknown event type '" + *t + "'", lineNo, 1);
          info.type = *parsed;
        }
        info.specialization = opt("spec");
        info.symptoms = detail::splitSet(opt("symptoms").value_or(""));
        info.caseHistory = opt("history").value_or("");
        info.message = opt("message").value_or("help");
        info.details = {opt("illness"), opt("medication"), opt("medicine"), std::nullopt, std::nullopt};
        try {
          EmergencyEvent ev = reportEmergency(ctx, get("pnr"), info);
          ++sum.events;
          sum.lines.push_back(prefix + "event " + std::to_string(ev.id) + " severity " + to_string(ev.severity) +
                              " responder " + ev.deliveryPersonnel.value_or("none") +
                              (ev.paymentCollected ? " payment collected" : ""));
        } catch (const NoResponderAvailable& n) {
          ++sum.fallbacks;
          sum.lines.push_back(prefix + "fallback " + std::to_string(n.notice().event.id) + " station " +
                              n.notice().station);
        }
      } else {
        throw ScriptError("unknown command '" + cmd + "'", lineNo, 1);
      }
    } catch (const ScriptError&) {
      throw;
    } catch (const Error& e) {
      ++sum.errors;
      sum.lines.push_back(prefix + "error " + e.what());
    }
  }
  return sum;
}

}  // namespace fluxcompose

#endif
