#include "insight/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>

namespace insight {

int type_id(EventType t) { return static_cast<int>(t); }

EventType event_type_from_id(int id) {
    if (id < 0 || id >= kEventTypeCount) fail(ErrorKind::index, "bad event type id");
    return static_cast<EventType>(id);
}

const char* event_type_name(EventType t) {
    switch (t) {
        case EventType::logon: return "logon";
        case EventType::logoff: return "logoff";
        case EventType::device_connect: return "device_connect";
        case EventType::device_disconnect: return "device_disconnect";
        case EventType::http: return "http";
        case EventType::email: return "email";
        case EventType::file: return "file";
    }
    return "?";
}

SourceKind source_kind_of(EventType t) {
    switch (t) {
        case EventType::logon:
        case EventType::logoff: return SourceKind::logon;
        case EventType::device_connect:
        case EventType::device_disconnect: return SourceKind::device;
        case EventType::http: return SourceKind::http;
        case EventType::email: return SourceKind::email;
        case EventType::file: return SourceKind::file;
    }
    return SourceKind::logon;
}

const char* source_kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::logon: return "logon";
        case SourceKind::device: return "device";
        case SourceKind::http: return "http";
        case SourceKind::email: return "email";
        case SourceKind::file: return "file";
    }
    return "?";
}

namespace {

int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    int era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<int64_t>(era) * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t yy = static_cast<int64_t>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

int parse_int_field(const std::string& s, size_t begin, size_t len) {
    int v = 0;
    auto res = std::from_chars(s.data() + begin, s.data() + begin + len, v);
    if (res.ec != std::errc{} || res.ptr != s.data() + begin + len) {
        fail(ErrorKind::format, "bad numeric field in timestamp: " + s);
    }
    return v;
}

} // namespace

int64_t timestamp_from_parts(int year, int month, int day, int hh, int mm, int ss) {
    if (month < 1 || month > 12 || day < 1 || day > 31 || hh < 0 || hh > 23 ||
        mm < 0 || mm > 59 || ss < 0 || ss > 59) {
        fail(ErrorKind::format, "timestamp component out of range");
    }
    return days_from_civil(year, month, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

int64_t parse_timestamp(const std::string& s) {
    // MM/DD/YYYY HH:MM:SS
    if (s.size() != 19 || s[2] != '/' || s[5] != '/' || s[10] != ' ' || s[13] != ':' || s[16] != ':') {
        fail(ErrorKind::format, "bad timestamp: '" + s + "'");
    }
    int month = parse_int_field(s, 0, 2);
    int day = parse_int_field(s, 3, 2);
    int year = parse_int_field(s, 6, 4);
    int hh = parse_int_field(s, 11, 2);
    int mm = parse_int_field(s, 14, 2);
    int ss = parse_int_field(s, 17, 2);
    return timestamp_from_parts(year, month, day, hh, mm, ss);
}

std::string format_timestamp(int64_t t) {
    int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    int64_t secs = t - days * 86400;
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d %02d:%02d:%02d", m, d, y,
                  static_cast<int>(secs / 3600), static_cast<int>((secs / 60) % 60),
                  static_cast<int>(secs % 60));
    return buf;
}

int64_t parse_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        fail(ErrorKind::format, "bad date (want YYYY-MM-DD): '" + s + "'");
    }
    int year = parse_int_field(s, 0, 4);
    int month = parse_int_field(s, 5, 2);
    int day = parse_int_field(s, 8, 2);
    return timestamp_from_parts(year, month, day, 0, 0, 0);
}

int hour_of_day(int64_t t) {
    int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    return static_cast<int>((t - days * 86400) / 3600);
}

int weekday(int64_t t) {
    int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    // 1970-01-01 was a Thursday (weekday 3 with Monday = 0).
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

int64_t day_index(int64_t t) {
    return t >= 0 ? t / 86400 : (t - 86399) / 86400;
}

int64_t end_of_day(int64_t t) {
    return day_index(t) * 86400 + 86399;
}

int activity_code(const LogEvent& e) {
    return type_id(e.type) * 24 + hour_of_day(e.timestamp);
}

const char* threat_class_name(ThreatClass c) {
    switch (c) {
        case ThreatClass::benign: return "benign";
        case ThreatClass::wikileaks_leaver: return "wikileaks_leaver";
        case ThreatClass::competitor_stealer: return "competitor_stealer";
        case ThreatClass::disgruntled_admin: return "disgruntled_admin";
    }
    return "?";
}

ThreatClass threat_class_from_name(const std::string& name) {
    for (int i = 0; i < kThreatClassCount; ++i) {
        auto c = static_cast<ThreatClass>(i);
        if (name == threat_class_name(c)) return c;
    }
    fail(ErrorKind::format, "unknown threat class: " + name);
}

void sort_events(std::vector<LogEvent>& events) {
    std::stable_sort(events.begin(), events.end(), [](const LogEvent& a, const LogEvent& b) {
        if (a.user != b.user) return a.user < b.user;
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        int ka = static_cast<int>(source_kind_of(a.type));
        int kb = static_cast<int>(source_kind_of(b.type));
        if (ka != kb) return ka < kb;
        return a.id < b.id;
    });
}

std::pair<std::vector<LogEvent>, std::vector<LogEvent>>
temporal_split(const std::vector<LogEvent>& events, int64_t boundary) {
    std::vector<LogEvent> before, after;
    for (const auto& e : events) {
        (e.timestamp <= boundary ? before : after).push_back(e);
    }
    return {std::move(before), std::move(after)};
}

} // namespace insight
