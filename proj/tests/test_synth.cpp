#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "insight/cert_csv.hpp"
#include "insight/sessionize.hpp"
#include "insight/synth.hpp"

using namespace insight;

namespace {

GenConfig small_config() {
    GenConfig cfg;
    cfg.benign_users = 20;
    cfg.leavers = 1;
    cfg.stealers = 1;
    cfg.admins = 1;
    cfg.start_date = "2010-11-01";
    cfg.end_date = "2010-12-15";
    cfg.attendance = 0.5;
    cfg.imbalance_ratio = 40.0;
    cfg.seed = 7;
    return cfg;
}

} // namespace

TEST_CASE("zero threat users produce zero malicious activities") {
    GenConfig cfg = small_config();
    cfg.leavers = cfg.stealers = cfg.admins = 0;
    auto corpus = generate_synthetic_corpus(cfg);
    CHECK(corpus.malicious_count == 0);
    for (const auto& [id, cls] : corpus.activity_class) CHECK(cls == ThreatClass::benign);
}

TEST_CASE("generated imbalance ratio lands within ten percent of the target") {
    GenConfig cfg = small_config();
    auto corpus = generate_synthetic_corpus(cfg);
    REQUIRE(corpus.malicious_count > 0);
    double ratio = static_cast<double>(corpus.normal_count) /
                   static_cast<double>(corpus.malicious_count);
    CHECK(ratio > cfg.imbalance_ratio * 0.9);
    CHECK(ratio < cfg.imbalance_ratio * 1.1);
}

TEST_CASE("fixed seed reproduces the corpus bitwise") {
    GenConfig cfg = small_config();
    auto a = generate_synthetic_corpus(cfg);
    auto b = generate_synthetic_corpus(cfg);
    REQUIRE(a.events.size() == b.events.size());
    CHECK(a.events == b.events);
    CHECK(a.activity_class == b.activity_class);
    CHECK(a.normal_count == b.normal_count);
    CHECK(a.malicious_count == b.malicious_count);
}

TEST_CASE("invalid rates raise config errors") {
    GenConfig cfg = small_config();
    cfg.attendance = -0.5;
    CHECK_THROWS_AS(generate_synthetic_corpus(cfg), Error);
    cfg = small_config();
    cfg.imbalance_ratio = -1;
    CHECK_THROWS_AS(generate_synthetic_corpus(cfg), Error);
    cfg = small_config();
    cfg.benign_users = 0;
    CHECK_THROWS_AS(generate_synthetic_corpus(cfg), Error);
}

TEST_CASE("session labels: malicious iff the session holds an injected activity") {
    GenConfig cfg = small_config();
    auto corpus = generate_synthetic_corpus(cfg);
    // Group label rows by session and cross-check against activity classes.
    std::map<std::string, bool> session_has_malicious;
    for (const auto& row : corpus.labels) {
        bool mal = row.label != ThreatClass::benign;
        session_has_malicious[row.session_id] =
            session_has_malicious[row.session_id] || mal;
        CHECK(corpus.activity_class.at(row.activity_id) == row.label);
    }
    size_t malicious_sessions = 0;
    for (const auto& [sid, mal] : session_has_malicious) {
        if (mal) ++malicious_sessions;
    }
    CHECK(malicious_sessions > 0);
    CHECK(malicious_sessions < session_has_malicious.size());
}

TEST_CASE("benign routine stays in business hours; injected classes behave as designed") {
    GenConfig cfg = small_config();
    auto corpus = generate_synthetic_corpus(cfg);
    std::set<std::string> leaver_users, admin_users;
    for (const auto& [user, cls] : corpus.user_class) {
        if (cls == ThreatClass::wikileaks_leaver) leaver_users.insert(user);
        if (cls == ThreatClass::disgruntled_admin) admin_users.insert(user);
    }
    bool saw_after_hours_leaver = false;
    bool saw_cross_pc_admin = false;
    for (const auto& e : corpus.events) {
        ThreatClass cls = corpus.activity_class.at(e.id);
        int hour = hour_of_day(e.timestamp);
        if (cls == ThreatClass::benign) {
            CHECK(hour >= 8);
            CHECK(hour <= 18);
            CHECK(weekday(e.timestamp) < 5);
        }
        if (cls == ThreatClass::wikileaks_leaver && hour >= 20) saw_after_hours_leaver = true;
        if (cls == ThreatClass::disgruntled_admin && e.type == EventType::file) {
            // file dropped on someone else's machine
            if (e.pc != ("PC-" + e.user.substr(1))) saw_cross_pc_admin = true;
        }
    }
    CHECK(saw_after_hours_leaver);
    CHECK(saw_cross_pc_admin);
}

TEST_CASE("per-user sessions are pairwise disjoint on generated corpora") {
    GenConfig cfg = small_config();
    auto corpus = generate_synthetic_corpus(cfg);
    auto sessions = sessionize_all(corpus.events);
    std::map<std::string, std::vector<std::pair<int64_t, int64_t>>> spans;
    for (const auto& s : sessions) spans[s.user].push_back({s.start, s.end});
    for (auto& [user, list] : spans) {
        std::sort(list.begin(), list.end());
        for (size_t i = 1; i < list.size(); ++i) {
            CHECK(list[i].first > list[i - 1].second);
        }
    }
}

TEST_CASE("text_dominant profile keeps injections inside business hours on own pcs") {
    GenConfig cfg = small_config();
    cfg.profile = "text_dominant";
    auto corpus = generate_synthetic_corpus(cfg);
    REQUIRE(corpus.malicious_count > 0);
    for (const auto& e : corpus.events) {
        if (corpus.activity_class.at(e.id) == ThreatClass::benign) continue;
        int hour = hour_of_day(e.timestamp);
        CHECK(hour >= 8);
        CHECK(hour <= 18);
        CHECK(e.pc == "PC-" + e.user.substr(1));
        CHECK((e.type == EventType::http || e.type == EventType::email ||
               e.type == EventType::file));
        CHECK_FALSE(e.payload.empty());
    }
}

TEST_CASE("write_corpus emits csvs, ndjson and labels that re-parse") {
    GenConfig cfg = small_config();
    cfg.benign_users = 6;
    auto corpus = generate_synthetic_corpus(cfg);
    auto dir = std::filesystem::temp_directory_path() / "insight_test_corpus";
    std::filesystem::remove_all(dir);
    write_corpus(corpus, dir.string());
    auto parsed = read_cert_dir(dir.string());
    CHECK(parsed.size() == corpus.events.size());
    auto labels = read_labels_csv((dir / "labels.csv").string());
    CHECK(labels.size() == corpus.events.size());
    CHECK(std::filesystem::exists(dir / "events.ndjson"));
    CHECK(std::filesystem::exists(dir / "users.csv"));
}
