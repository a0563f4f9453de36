#pragma once

#include <vector>

#include "insight/events.hpp"

namespace insight {

// Groups one user's canonically sorted events into logon-to-logoff sessions,
// independently per pc:
//   - a logon opens a session; the next logoff on the same pc (with no logon
//     in between) closes it and is part of it, whatever the elapsed time;
//   - with no such logoff the session is cut at the next logon on the same pc
//     or at 23:59:59 of its start day, whichever comes first, and is flagged
//     incomplete;
//   - events not covered by any session interval go to per-(pc, day) orphan
//     buckets, also flagged incomplete.
// Session ids are "<user>#<index>" with sessions numbered by (start, pc).
std::vector<Session> sessionize(const std::vector<LogEvent>& user_events);

// Convenience: splits a mixed event stream by user and sessionizes each.
std::vector<Session> sessionize_all(const std::vector<LogEvent>& events);

} // namespace insight
