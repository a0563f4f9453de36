#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "insight/cert_csv.hpp"
#include "insight/events.hpp"
#include "insight/graph.hpp"
#include "insight/rng.hpp"
#include "insight/sessionize.hpp"

using namespace insight;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("insight_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

LogEvent ev(const std::string& user, const std::string& pc, EventType t,
            const std::string& ts, const std::string& id = "") {
    LogEvent e;
    e.user = user;
    e.pc = pc;
    e.type = t;
    e.timestamp = parse_timestamp(ts);
    e.id = id;
    return e;
}

// Brute-force sessionizer: builds explicit (logon, close) intervals per pc,
// then assigns every event by interval membership; leftovers become
// per-(pc, day) orphan buckets. Independent of the production scan.
struct RefSession {
    std::vector<LogEvent> events;
    bool incomplete = false;
};

std::vector<RefSession> reference_sessionize(std::vector<LogEvent> events) {
    sort_events(events);
    std::set<std::string> pcs;
    for (const auto& e : events) pcs.insert(e.pc);
    std::vector<RefSession> out;
    for (const auto& pc : pcs) {
        std::vector<const LogEvent*> list;
        for (const auto& e : events) {
            if (e.pc == pc) list.push_back(&e);
        }
        struct Interval {
            size_t logon_pos;
            size_t end_pos;   // inclusive; SIZE_MAX when cut by time
            int64_t cut_time; // valid when end_pos == SIZE_MAX
            bool incomplete;
        };
        std::vector<Interval> intervals;
        for (size_t i = 0; i < list.size(); ++i) {
            if (list[i]->type != EventType::logon) continue;
            size_t next_logon = list.size(), next_logoff = list.size();
            for (size_t j = i + 1; j < list.size(); ++j) {
                if (list[j]->type == EventType::logon) { next_logon = j; break; }
                if (list[j]->type == EventType::logoff && next_logoff == list.size()) next_logoff = j;
            }
            if (next_logoff < list.size() && (next_logon == list.size() || next_logoff < next_logon)) {
                intervals.push_back({i, next_logoff, 0, false});
            } else {
                intervals.push_back({i, SIZE_MAX, end_of_day(list[i]->timestamp), true});
            }
        }
        std::vector<bool> taken(list.size(), false);
        std::vector<RefSession> pc_sessions;
        for (size_t k = 0; k < intervals.size(); ++k) {
            const auto& iv = intervals[k];
            RefSession s;
            s.incomplete = iv.incomplete;
            size_t limit = (k + 1 < intervals.size()) ? intervals[k + 1].logon_pos : list.size();
            if (iv.end_pos != SIZE_MAX) {
                for (size_t j = iv.logon_pos; j <= iv.end_pos; ++j) {
                    s.events.push_back(*list[j]);
                    taken[j] = true;
                }
            } else {
                for (size_t j = iv.logon_pos; j < limit; ++j) {
                    if (list[j]->timestamp <= iv.cut_time) {
                        s.events.push_back(*list[j]);
                        taken[j] = true;
                    }
                }
            }
            pc_sessions.push_back(std::move(s));
        }
        // Orphans: runs of untaken events, split at taken events and at day
        // boundaries.
        RefSession orphan;
        int64_t orphan_day = -1;
        auto flush = [&] {
            if (!orphan.events.empty()) {
                orphan.incomplete = true;
                pc_sessions.push_back(orphan);
                orphan = RefSession{};
            }
        };
        for (size_t j = 0; j < list.size(); ++j) {
            if (taken[j]) {
                flush();
                continue;
            }
            int64_t d = day_index(list[j]->timestamp);
            if (!orphan.events.empty() && d != orphan_day) flush();
            orphan_day = d;
            orphan.events.push_back(*list[j]);
        }
        flush();
        out.insert(out.end(), pc_sessions.begin(), pc_sessions.end());
    }
    return out;
}

// Canonical multiset of (event-id sequence, incomplete flag) per session.
std::multiset<std::string> session_signature(const std::vector<Session>& sessions) {
    std::multiset<std::string> sig;
    for (const auto& s : sessions) {
        std::string k = s.incomplete ? "I:" : "C:";
        for (const auto& e : s.events) k += e.id + ",";
        sig.insert(k);
    }
    return sig;
}

std::multiset<std::string> session_signature_ref(const std::vector<RefSession>& sessions) {
    std::multiset<std::string> sig;
    for (const auto& s : sessions) {
        std::string k = s.incomplete ? "I:" : "C:";
        for (const auto& e : s.events) k += e.id + ",";
        sig.insert(k);
    }
    return sig;
}

} // namespace

TEST_CASE("timestamp parse and format round-trip") {
    std::string s = "01/02/2010 08:30:00";
    int64_t t = parse_timestamp(s);
    CHECK(format_timestamp(t) == s);
    CHECK(hour_of_day(t) == 8);
    CHECK(weekday(parse_date("2010-10-04")) == 0); // a Monday
    CHECK(weekday(parse_date("2010-10-09")) == 5); // a Saturday
    CHECK_THROWS_AS(parse_timestamp("2010-01-02 08:30:00"), Error);
}

TEST_CASE("activity codes are the documented bijection") {
    LogEvent e;
    e.timestamp = parse_timestamp("01/02/2010 00:00:00");
    e.type = EventType::logon;
    CHECK(activity_code(e) == 0);
    e.type = EventType::device_connect;
    e.timestamp = parse_timestamp("01/02/2010 09:15:00");
    CHECK(activity_code(e) == 2 * 24 + 9);

    std::set<int> seen;
    for (int tid = 0; tid < kEventTypeCount; ++tid) {
        for (int h = 0; h < 24; ++h) {
            LogEvent x;
            x.type = event_type_from_id(tid);
            x.timestamp = parse_date("2010-06-01") + h * 3600;
            int code = activity_code(x);
            CHECK(code >= 0);
            CHECK(code < kActivityCodeCount);
            seen.insert(code);
        }
    }
    CHECK(seen.size() == static_cast<size_t>(kActivityCodeCount));
}

TEST_CASE("logon csv row maps to the expected event") {
    auto dir = temp_dir("logon_row");
    {
        std::ofstream f(dir / "logon.csv");
        f << "id,date,user,pc,activity\n";
        f << "X1,01/02/2010 08:30:00,U77,PC-3,Logon\n";
    }
    auto events = parse_cert_csv((dir / "logon.csv").string(), SourceKind::logon);
    REQUIRE(events.size() == 1);
    CHECK(events[0].id == "X1");
    CHECK(events[0].user == "U77");
    CHECK(events[0].pc == "PC-3");
    CHECK(events[0].type == EventType::logon);
    CHECK(format_timestamp(events[0].timestamp) == "01/02/2010 08:30:00");
}

TEST_CASE("empty csv with valid header parses to empty list") {
    auto dir = temp_dir("empty_csv");
    {
        std::ofstream f(dir / "http.csv");
        f << "id,date,user,pc,url,content\n";
    }
    auto events = parse_cert_csv((dir / "http.csv").string(), SourceKind::http);
    CHECK(events.empty());
}

TEST_CASE("missing file and bad header raise errors") {
    auto dir = temp_dir("bad_csv");
    CHECK_THROWS_AS(parse_cert_csv((dir / "nope.csv").string(), SourceKind::logon), Error);
    {
        std::ofstream f(dir / "logon.csv");
        f << "id,date,user,activity\n";
    }
    CHECK_THROWS_AS(parse_cert_csv((dir / "logon.csv").string(), SourceKind::logon), Error);
}

TEST_CASE("malformed rows are tolerated below the threshold and fatal above it") {
    auto dir = temp_dir("malformed");
    {
        std::ofstream f(dir / "logon.csv");
        f << "id,date,user,pc,activity\n";
        for (int i = 0; i < 200; ++i) {
            f << "E" << i << ",01/02/2010 08:30:00,U1,PC-1,Logon\n";
        }
        f << "EBAD,not-a-date,U1,PC-1,Logon\n";
    }
    ParseStats stats;
    auto events = parse_cert_csv((dir / "logon.csv").string(), SourceKind::logon, &stats);
    CHECK(events.size() == 200);
    CHECK(stats.malformed == 1);

    {
        std::ofstream f(dir / "logon.csv", std::ios::trunc);
        f << "id,date,user,pc,activity\n";
        f << "E1,01/02/2010 08:30:00,U1,PC-1,Logon\n";
        f << "EBAD,not-a-date,U1,PC-1,Logon\n";
    }
    CHECK_THROWS_AS(parse_cert_csv((dir / "logon.csv").string(), SourceKind::logon), Error);
}

TEST_CASE("csv writer round-trips an event multiset through the parser") {
    Rng rng(99);
    std::vector<LogEvent> events;
    for (int i = 0; i < 1000; ++i) {
        LogEvent e;
        e.id = "E" + std::to_string(i);
        e.user = "U" + std::to_string(1 + rng.next_below(20));
        e.pc = "PC-" + std::to_string(1 + rng.next_below(25));
        e.timestamp = parse_date("2010-03-01") + static_cast<int64_t>(rng.next_below(86400 * 200));
        int t = static_cast<int>(rng.next_below(kEventTypeCount));
        e.type = event_type_from_id(t);
        if (e.type == EventType::http) {
            e.resource = "http://a.example.com/x";
            e.payload = "quoted, \"content\" with commas";
        } else if (e.type == EventType::email) {
            e.peers = {"U5@corp.com", "U9@corp.com"};
            e.payload = "hello team, see notes";
        } else if (e.type == EventType::file) {
            e.resource = "report.docx";
            e.payload = "draft summary";
        }
        events.push_back(std::move(e));
    }
    auto dir = temp_dir("roundtrip");
    write_cert_csvs(events, dir.string());
    auto parsed = read_cert_dir(dir.string());
    REQUIRE(parsed.size() == events.size());
    std::map<std::string, LogEvent> by_id;
    for (const auto& e : parsed) by_id[e.id] = e;
    for (const auto& e : events) {
        REQUIRE(by_id.count(e.id));
        CHECK(by_id.at(e.id) == e);
    }
}

TEST_CASE("simple logon-http-logoff stream forms one session") {
    std::vector<LogEvent> events = {
        ev("U1", "PC-1", EventType::logon, "01/04/2010 08:00:00", "a"),
        ev("U1", "PC-1", EventType::http, "01/04/2010 09:00:00", "b"),
        ev("U1", "PC-1", EventType::logoff, "01/04/2010 17:00:00", "c"),
    };
    auto sessions = sessionize(events);
    REQUIRE(sessions.size() == 1);
    CHECK(sessions[0].events.size() == 3);
    CHECK(sessions[0].incomplete == false);
    CHECK(sessions[0].id == "U1#0");
    CHECK(sessions[0].start == events[0].timestamp);
    CHECK(sessions[0].end == events[2].timestamp);
}

TEST_CASE("orphan event without logon lands in a flagged bucket") {
    std::vector<LogEvent> events = {
        ev("U1", "PC-1", EventType::http, "01/04/2010 07:00:00", "x"),
    };
    auto sessions = sessionize(events);
    REQUIRE(sessions.size() == 1);
    CHECK(sessions[0].incomplete);
    CHECK(sessions[0].events.size() == 1);
}

TEST_CASE("missing logoff closes at next logon or end of day") {
    std::vector<LogEvent> events = {
        ev("U1", "PC-1", EventType::logon, "01/04/2010 08:00:00", "a"),
        ev("U1", "PC-1", EventType::http, "01/04/2010 10:00:00", "b"),
        ev("U1", "PC-1", EventType::logon, "01/04/2010 13:00:00", "c"),
        ev("U1", "PC-1", EventType::logoff, "01/04/2010 17:00:00", "d"),
        ev("U1", "PC-1", EventType::logon, "01/05/2010 09:00:00", "e"),
        ev("U1", "PC-1", EventType::http, "01/06/2010 10:00:00", "f"),
    };
    auto sessions = sessionize(events);
    REQUIRE(sessions.size() == 4);
    // First session: cut by the 13:00 logon, incomplete.
    CHECK(sessions[0].incomplete);
    CHECK(sessions[0].events.size() == 2);
    CHECK(sessions[0].end == events[2].timestamp);
    // Second: closed by its logoff.
    CHECK_FALSE(sessions[1].incomplete);
    CHECK(sessions[1].events.size() == 2);
    // Third: logon on the 5th, cut at end of day.
    CHECK(sessions[2].incomplete);
    CHECK(sessions[2].events.size() == 1);
    // The http on the 6th is past the cut: orphan bucket.
    CHECK(sessions[3].incomplete);
    CHECK(sessions[3].events.size() == 1);
    CHECK(sessions[3].events[0].id == "f");
}

TEST_CASE("sessionize matches the brute-force interval matcher on random streams") {
    Rng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<LogEvent> events;
        int n = 1 + static_cast<int>(rng.next_below(24));
        for (int i = 0; i < n; ++i) {
            LogEvent e;
            e.user = "U1";
            e.pc = "PC-" + std::to_string(1 + rng.next_below(3));
            e.id = "E" + std::to_string(i);
            e.timestamp = parse_date("2010-02-01") +
                          static_cast<int64_t>(rng.next_below(4 * 86400));
            double roll = rng.uniform();
            if (roll < 0.3) e.type = EventType::logon;
            else if (roll < 0.55) e.type = EventType::logoff;
            else if (roll < 0.7) e.type = EventType::http;
            else if (roll < 0.85) e.type = EventType::file;
            else e.type = EventType::device_connect;
            events.push_back(std::move(e));
        }
        sort_events(events);
        auto got = sessionize(events);
        auto want = reference_sessionize(events);
        REQUIRE(session_signature(got) == session_signature_ref(want));

        // Partition property: every event appears in exactly one session.
        size_t total = 0;
        for (const auto& s : got) total += s.events.size();
        CHECK(total == events.size());
    }
}

TEST_CASE("temporal split is a strict partition") {
    std::vector<LogEvent> events;
    for (int i = 0; i < 50; ++i) {
        events.push_back(ev("U1", "PC-1", EventType::http,
                            i % 2 ? "11/10/2010 10:00:00" : "02/10/2011 10:00:00",
                            "E" + std::to_string(i)));
    }
    int64_t boundary = end_of_day(parse_date("2010-12-31"));
    auto [train, test] = temporal_split(events, boundary);
    CHECK(train.size() + test.size() == events.size());
    for (const auto& e : train) CHECK(e.timestamp <= boundary);
    for (const auto& e : test) CHECK(e.timestamp > boundary);

    auto [all, none] = temporal_split(events, end_of_day(parse_date("2011-12-31")));
    CHECK(none.empty());
    CHECK(all.size() == events.size());
}

TEST_CASE("interaction graph counts match a brute-force pair count") {
    std::vector<LogEvent> events;
    events.push_back(ev("U1", "PC-1", EventType::logon, "01/04/2010 08:00:00", "a"));
    auto g1 = build_interaction_graph(events);
    CHECK(g1.edge_count() == 1);
    CHECK(g1.edge_weight(g1.node_index("user:U1"), g1.node_index("pc:PC-1")) == 1.0);

    LogEvent mail = ev("U1", "PC-1", EventType::email, "01/04/2010 09:00:00", "m");
    mail.peers = {"U2@corp.com", "U3@corp.com"};
    events.push_back(mail);
    auto g2 = build_interaction_graph(events);
    CHECK(g2.edge_weight(g2.node_index("user:U1"), g2.node_index("user:U2")) == 1.0);
    CHECK(g2.edge_weight(g2.node_index("user:U1"), g2.node_index("user:U3")) == 1.0);

    // 50 random events vs a brute-force count over expected node pairs.
    Rng rng(7);
    std::vector<LogEvent> batch;
    std::map<std::pair<std::string, std::string>, double> expected;
    auto expect = [&](std::string a, std::string b) {
        if (a > b) std::swap(a, b);
        if (a != b) expected[{a, b}] += 1.0;
    };
    for (int i = 0; i < 50; ++i) {
        LogEvent e;
        e.user = "U" + std::to_string(1 + rng.next_below(4));
        e.pc = "PC-" + std::to_string(1 + rng.next_below(3));
        e.id = "E" + std::to_string(i);
        e.timestamp = parse_date("2010-02-01") + i * 60;
        switch (rng.next_below(5)) {
            case 0:
                e.type = EventType::logon;
                expect("user:" + e.user, "pc:" + e.pc);
                break;
            case 1:
                e.type = EventType::file;
                expect("user:" + e.user, "pc:" + e.pc);
                break;
            case 2:
                e.type = EventType::device_connect;
                expect("user:" + e.user, "pc:" + e.pc);
                break;
            case 3: {
                e.type = EventType::http;
                e.resource = "http://sub.host" + std::to_string(rng.next_below(3)) + ".com/a";
                expect("user:" + e.user, "dom:" + registrable_domain(e.resource));
                break;
            }
            default: {
                e.type = EventType::email;
                std::string peer = "U" + std::to_string(1 + rng.next_below(4));
                e.peers = {peer + "@corp.com"};
                if (peer != e.user) expect("user:" + e.user, "user:" + peer);
                break;
            }
        }
        batch.push_back(std::move(e));
    }
    auto g = build_interaction_graph(batch);
    size_t expected_edges = expected.size();
    CHECK(g.edge_count() == expected_edges);
    for (const auto& [pair, w] : expected) {
        int a = g.node_index(pair.first);
        int b = g.node_index(pair.second);
        REQUIRE(a >= 0);
        REQUIRE(b >= 0);
        CHECK(g.edge_weight(a, b) == w);
    }
}

TEST_CASE("registrable domain collapsing") {
    CHECK(registrable_domain("http://wikileaks.org/submit") == "wikileaks.org");
    CHECK(registrable_domain("https://a.b.news-daily.com/x?y=1") == "news-daily.com");
    CHECK(registrable_domain("portal.corp.com") == "corp.com");
    CHECK(registrable_domain("localhost") == "localhost");
}
