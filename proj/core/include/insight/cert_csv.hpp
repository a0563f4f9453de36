#pragma once

#include <map>
#include <string>
#include <vector>

#include "insight/events.hpp"

namespace insight {

// Column layouts, one CSV per source family:
//   logon:  id,date,user,pc,activity            (activity: Logon | Logoff)
//   device: id,date,user,pc,activity            (activity: Connect | Disconnect)
//   http:   id,date,user,pc,url,content
//   email:  id,date,user,pc,to,cc,bcc,from,size,attachments,content
//   file:   id,date,user,pc,filename,content
// Dates are MM/DD/YYYY HH:MM:SS. Fields follow RFC-4180 quoting; to/cc/bcc
// hold semicolon-separated addresses.

struct ParseStats {
    size_t rows = 0;
    size_t malformed = 0;
};

std::vector<LogEvent> parse_cert_csv(const std::string& path, SourceKind kind,
                                     ParseStats* stats = nullptr,
                                     double malformed_threshold = 0.01);

// Writes the five CSVs for `events` into `dir` (logon.csv, device.csv,
// http.csv, email.csv, file.csv).
void write_cert_csvs(const std::vector<LogEvent>& events, const std::string& dir);

// Reads all five CSVs from `dir` and returns the canonically sorted merge.
std::vector<LogEvent> read_cert_dir(const std::string& dir, ParseStats* stats = nullptr);

// One JSON object per line: id, ts, user, pc, type, resource, payload, peers.
void write_events_ndjson(const std::vector<LogEvent>& events, const std::string& path);

struct ActivityLabel {
    std::string user;
    std::string session_id;
    std::string activity_id;
    ThreatClass label = ThreatClass::benign;
};

void write_labels_csv(const std::vector<ActivityLabel>& labels, const std::string& path);
std::vector<ActivityLabel> read_labels_csv(const std::string& path);

// Low-level CSV helpers shared with other writers.
std::string csv_quote(const std::string& field);
std::vector<std::vector<std::string>> read_csv_records(const std::string& path);

} // namespace insight
