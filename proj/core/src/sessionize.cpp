#include "insight/sessionize.hpp"

#include <algorithm>
#include <map>

namespace insight {

namespace {

Session make_session(const std::string& user, const std::string& pc) {
    Session s;
    s.user = user;
    s.pc = pc;
    return s;
}

} // namespace

std::vector<Session> sessionize(const std::vector<LogEvent>& user_events) {
    if (user_events.empty()) return {};
    const std::string& user = user_events[0].user;
    for (const auto& e : user_events) {
        if (e.user != user) fail(ErrorKind::input, "sessionize expects a single user's events");
    }

    // Per-pc event indices, preserving canonical order.
    std::map<std::string, std::vector<size_t>> by_pc;
    for (size_t i = 0; i < user_events.size(); ++i) by_pc[user_events[i].pc].push_back(i);

    std::vector<Session> sessions;
    for (auto& [pc, idx] : by_pc) {
        size_t pos = 0;
        const size_t n = idx.size();
        // Orphans are grouped per day until the next session boundary.
        Session orphan = make_session(user, pc);
        auto flush_orphan = [&] {
            if (!orphan.events.empty()) {
                orphan.incomplete = true;
                orphan.start = orphan.events.front().timestamp;
                orphan.end = orphan.events.back().timestamp;
                sessions.push_back(std::move(orphan));
                orphan = make_session(user, pc);
            }
        };
        while (pos < n) {
            const LogEvent& e = user_events[idx[pos]];
            if (e.type != EventType::logon) {
                // Outside any session: bucket by day.
                if (!orphan.events.empty() &&
                    day_index(orphan.events.back().timestamp) != day_index(e.timestamp)) {
                    flush_orphan();
                }
                orphan.events.push_back(e);
                ++pos;
                continue;
            }
            flush_orphan();
            // Scan forward for the closing boundary.
            size_t next_logon = n, next_logoff = n;
            for (size_t j = pos + 1; j < n; ++j) {
                EventType t = user_events[idx[j]].type;
                if (t == EventType::logon) { next_logon = j; break; }
                if (t == EventType::logoff && next_logoff == n) { next_logoff = j; }
            }
            Session s = make_session(user, pc);
            s.start = e.timestamp;
            if (next_logoff < n && (next_logon == n || next_logoff < next_logon)) {
                for (size_t j = pos; j <= next_logoff; ++j) s.events.push_back(user_events[idx[j]]);
                s.end = user_events[idx[next_logoff]].timestamp;
                pos = next_logoff + 1;
            } else {
                int64_t cap = end_of_day(e.timestamp);
                int64_t cut = cap;
                if (next_logon < n) cut = std::min(cap, user_events[idx[next_logon]].timestamp);
                size_t j = pos;
                size_t limit = next_logon < n ? next_logon : n;
                while (j < limit && user_events[idx[j]].timestamp <= cap) {
                    s.events.push_back(user_events[idx[j]]);
                    ++j;
                }
                s.end = cut;
                s.incomplete = true;
                pos = j;
            }
            sessions.push_back(std::move(s));
        }
        flush_orphan();
    }

    std::stable_sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.pc < b.pc;
    });
    for (size_t i = 0; i < sessions.size(); ++i) {
        sessions[i].id = user + "#" + std::to_string(i);
    }
    return sessions;
}

std::vector<Session> sessionize_all(const std::vector<LogEvent>& events) {
    std::map<std::string, std::vector<LogEvent>> by_user;
    for (const auto& e : events) by_user[e.user].push_back(e);
    std::vector<Session> all;
    for (auto& [user, evs] : by_user) {
        sort_events(evs);
        auto part = sessionize(evs);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

} // namespace insight
