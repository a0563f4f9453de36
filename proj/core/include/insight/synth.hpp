#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "insight/cert_csv.hpp"
#include "insight/events.hpp"

namespace insight {

// Synthetic CERT-style corpus generator. Benign users follow weekday 8-18h
// routines (http, email, file, occasional removable-device use); three threat
// archetypes inject labeled malicious activities on top of their own benign
// routine:
//   wikileaks_leaver   after-hours logons, device use and uploads to a leak
//                      domain, plus resentful email drafts
//   competitor_stealer escalating in-session device/file copying plus
//                      job-solicitation email to a rival
//   disgruntled_admin  keylogger drops on other users' machines plus hostile
//                      email
// profile "text_dominant" moves every injection into normal working hours on
// the user's own machine so the distinguishing signal lives in text payloads.
struct GenConfig {
    int benign_users = 188;
    int leavers = 4;
    int stealers = 4;
    int admins = 4;
    std::string start_date = "2010-10-01";
    std::string end_date = "2011-01-31"; // exclusive
    double attendance = 0.25;            // weekday session probability
    int min_activities = 2;              // non-logon activities per session
    int max_activities = 5;
    double device_rate = 0.05;           // benign sessions with a device pair
    double imbalance_ratio = 100.0;      // normal : malicious activities
    std::string profile = "mixed";       // mixed | text_dominant
    uint64_t seed = 42;

    void validate() const;
    int total_users() const { return benign_users + leavers + stealers + admins; }
};

struct SyntheticCorpus {
    std::vector<LogEvent> events; // canonically sorted, ids assigned
    std::map<std::string, ThreatClass> activity_class; // event id -> class
    std::map<std::string, ThreatClass> user_class;
    std::vector<ActivityLabel> labels; // per activity, with session ids
    size_t normal_count = 0;
    size_t malicious_count = 0;
};

SyntheticCorpus generate_synthetic_corpus(const GenConfig& cfg);

// Writes CSVs, events.ndjson, labels.csv and users.csv under dir.
void write_corpus(const SyntheticCorpus& corpus, const std::string& dir);

} // namespace insight
