#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "insight/error.hpp"

namespace insight {

enum class EventType : int {
    logon = 0,
    logoff = 1,
    device_connect = 2,
    device_disconnect = 3,
    http = 4,
    email = 5,
    file = 6,
};
constexpr int kEventTypeCount = 7;

int type_id(EventType t);
EventType event_type_from_id(int id);
const char* event_type_name(EventType t);

// Source-file families; ties at equal timestamps order by this rank.
enum class SourceKind : int { logon = 0, device = 1, http = 2, email = 3, file = 4 };
SourceKind source_kind_of(EventType t);
const char* source_kind_name(SourceKind k);

struct LogEvent {
    std::string id;
    int64_t timestamp = 0; // seconds since Unix epoch, UTC
    std::string user;
    std::string pc;
    EventType type = EventType::logon;
    std::string payload;             // email body / http content / file content
    std::string resource;            // http url / file name
    std::vector<std::string> peers;  // email recipients (to + cc + bcc)

    bool operator==(const LogEvent&) const = default;
};

// "MM/DD/YYYY HH:MM:SS" (UTC).
int64_t parse_timestamp(const std::string& s);
std::string format_timestamp(int64_t t);
// "YYYY-MM-DD" -> midnight UTC.
int64_t parse_date(const std::string& s);

int hour_of_day(int64_t t);
int weekday(int64_t t); // 0 = Monday ... 6 = Sunday
int64_t end_of_day(int64_t t); // 23:59:59 of the same UTC day
int64_t day_index(int64_t t);

int64_t timestamp_from_parts(int year, int month, int day, int hh, int mm, int ss);

// code = type_id * 24 + hour; injective over (type, hour), bounded by 24*7-1.
int activity_code(const LogEvent& e);
constexpr int kActivityCodeCount = 24 * kEventTypeCount;

enum class ThreatClass : int {
    benign = 0,
    wikileaks_leaver = 1,
    competitor_stealer = 2,
    disgruntled_admin = 3,
};
constexpr int kThreatClassCount = 4;
const char* threat_class_name(ThreatClass c);
ThreatClass threat_class_from_name(const std::string& name);

struct Session {
    std::string user;
    std::string id; // "<user>#<index>"
    std::string pc;
    std::vector<LogEvent> events; // time-ordered
    int64_t start = 0;
    int64_t end = 0;
    bool incomplete = false; // orphan bucket or missing logoff
};

// Canonical ordering: (user, timestamp, source kind, id).
void sort_events(std::vector<LogEvent>& events);

// Strict timestamp partition: first = t <= boundary, second = t > boundary.
std::pair<std::vector<LogEvent>, std::vector<LogEvent>>
temporal_split(const std::vector<LogEvent>& events, int64_t boundary);

} // namespace insight
