#pragma once
#ifndef FLUXCOMPOSE_EVENT_LOG_HPP
#define FLUXCOMPOSE_EVENT_LOG_HPP

// Emergency records and the append-only event log. One JSON object per line,
// keys sorted, ids increasing from 1. A writer holds an exclusive flock on
// the file for its lifetime; a second writer is rejected.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fluxcompose/error.hpp"
#include "fluxcompose/ontology.hpp"

namespace fluxcompose {

enum class EventType { Medical, Robbery };

inline const char* to_string(EventType t) { return t == EventType::Medical ? "Medical" : "Robbery"; }

inline std::optional<EventType> parseEventType(std::string_view s) {
  if (s == "Medical") return EventType::Medical;
  if (s == "Robbery") return EventType::Robbery;
  return std::nullopt;
}

struct EmergencyEvent {
  std::uint64_t id = 0;
  std::string date;
  std::string time;
  std::string patientName;
  std::string pnr;
  std::string caseHistory;
  std::string coach;
  int seat = 0;
  std::optional<std::string> deliveryPersonnel;
  EventType eventType = EventType::Medical;
  std::optional<std::string> specialization;
  std::set<std::string> symptoms;
  Severity severity = Severity::Emergency;
  bool paymentCollected = false;
  std::vector<std::string> rankedResponders;
  std::string outcome;

  friend bool operator==(const EmergencyEvent&, const EmergencyEvent&) = default;
};

struct FallbackNotice {
  EmergencyEvent event;
  std::string station;
  std::string reason;

  friend bool operator==(const FallbackNotice&, const FallbackNotice&) = default;
};

using LogRecord = std::variant<EmergencyEvent, FallbackNotice>;

class PersistenceError : public Error {
 public:
  PersistenceError(const std::string& path, const std::string& cause)
      : Error(path + ": " + cause), path_(path), cause_(cause) {}
  const std::string& path() const { return path_; }
  const std::string& cause() const { return cause_; }

 private:
  std::string path_;
  std::string cause_;
};

class LogLockedError : public PersistenceError {
 public:
  explicit LogLockedError(const std::string& path) : PersistenceError(path, "event log is locked by another writer") {}
};

namespace detail {

inline nlohmann::json eventJson(const EmergencyEvent& e) {
  nlohmann::json j;
  j["id"] = e.id;
  j["date"] = e.date;
  j["time"] = e.time;
  j["patientName"] = e.patientName;
  j["pnr"] = e.pnr;
  j["caseHistory"] = e.caseHistory;
  j["coach"] = e.coach;
  j["seat"] = e.seat;
  j["deliveryPersonnel"] = e.deliveryPersonnel ? nlohmann::json(*e.deliveryPersonnel) : nlohmann::json(nullptr);
  j["eventType"] = to_string(e.eventType);
  j["specialization"] = e.specialization ? nlohmann::json(*e.specialization) : nlohmann::json(nullptr);
  j["symptoms"] = e.symptoms;
  j["severity"] = to_string(e.severity);
  j["paymentCollected"] = e.paymentCollected;
  j["rankedResponders"] = e.rankedResponders;
  j["outcome"] = e.outcome;
  return j;
}

inline EmergencyEvent eventFromJson(const nlohmann::json& j) {
  EmergencyEvent e;
  e.id = j.at("id").get<std::uint64_t>();
  e.date = j.at("date").get<std::string>();
  e.time = j.at("time").get<std::string>();
  e.patientName = j.at("patientName").get<std::string>();
  e.pnr = j.at("pnr").get<std::string>();
  e.caseHistory = j.at("caseHistory").get<std::string>();
  e.coach = j.at("coach").get<std::string>();
  e.seat = j.at("seat").get<int>();
  if (!j.at("deliveryPersonnel").is_null()) e.deliveryPersonnel = j.at("deliveryPersonnel").get<std::string>();
  auto type = parseEventType(j.at("eventType").get<std::string>());
  if (!type) throw Error("unknown event type");
  e.eventType = *type;
  if (!j.at("specialization").is_null()) e.specialization = j.at("specialization").get<std::string>();
  e.symptoms = j.at("symptoms").get<std::set<std::string>>();
  auto sev = parseSeverity(j.at("severity").get<std::string>());
  if (!sev) throw Error("unknown severity");
  e.severity = *sev;
  e.paymentCollected = j.at("paymentCollected").get<bool>();
  e.rankedResponders = j.at("rankedResponders").get<std::vector<std::string>>();
  e.outcome = j.at("outcome").get<std::string>();
  return e;
}

}  // namespace detail

inline std::uint64_t recordId(const LogRecord& r) {
  return std::visit([](const auto& v) {
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, EmergencyEvent>) {
      return v.id;
    } else {
      return v.event.id;
    }
  }, r);
}

/// The log line for a record, without the trailing newline.
inline std::string serializeRecord(const LogRecord& r) {
  nlohmann::json j;
  if (const auto* e = std::get_if<EmergencyEvent>(&r)) {
    j = detail::eventJson(*e);
    j["kind"] = "event";
  } else {
    const auto& f = std::get<FallbackNotice>(r);
    j = detail::eventJson(f.event);
    j["kind"] = "fallback";
    j["station"] = f.station;
    j["reason"] = f.reason;
  }
  return j.dump();
}

/// Throws Error on malformed lines.
inline LogRecord parseRecord(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "event") return detail::eventFromJson(j);
    if (kind == "fallback") {
      return FallbackNotice{detail::eventFromJson(j), j.at("station").get<std::string>(), j.at("reason").get<std::string>()};
    }
    throw Error("unknown record kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed log record: ") + e.what());
  }
}

/// Reads every record. A missing file is an empty log.
inline std::vector<LogRecord> readEventLog(const std::string& path) {
  std::vector<LogRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    try {
      out.push_back(parseRecord(line));
    } catch (const Error& e) {
      throw Error(path + ": " + e.what(), lineNo, 1);
    }
  }
  return out;
}

/// Single writer over a log file; holds the lock until destroyed.
class EventLog {
 public:
  explicit EventLog(std::string path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw PersistenceError(path_, std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      const int err = errno;
      ::close(fd_);
      fd_ = -1;
      if (err == EWOULDBLOCK) throw LogLockedError(path_);
      throw PersistenceError(path_, std::strerror(err));
    }
    for (const auto& r : readEventLog(path_)) nextId_ = std::max(nextId_, recordId(r) + 1);
  }

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  EventLog(EventLog&& other) noexcept : path_(std::move(other.path_)), fd_(other.fd_), nextId_(other.nextId_) {
    other.fd_ = -1;
  }
  EventLog& operator=(EventLog&&) = delete;

  ~EventLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  const std::string& path() const { return path_; }

  /// Assigns the next id to the record, appends it and returns the id.
  std::uint64_t append(LogRecord record) {
    const std::uint64_t id = nextId_;
    std::visit([id](auto& v) {
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, EmergencyEvent>) {
        v.id = id;
      } else {
        v.event.id = id;
      }
    }, record);
    const std::string line = serializeRecord(record) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw PersistenceError(path_, std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
    ++nextId_;
    return id;
  }

 private:
  std::string path_;
  int fd_ = -1;
  std::uint64_t nextId_ = 1;
};

inline std::uint64_t appendEventLog(const LogRecord& record, const std::string& logPath) {
  return EventLog(logPath).append(record);
}

}  // namespace fluxcompose

#endif
