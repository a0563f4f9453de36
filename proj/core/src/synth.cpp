#include "insight/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "insight/rng.hpp"
#include "insight/sessionize.hpp"

namespace insight {

namespace {

const std::vector<std::string> kBenignDomains = {
    "portal.corp.com", "wiki.corp.com", "mail.corp.com", "news-daily.com",
    "search-hub.com", "docs-cloud.com", "weather-now.net", "tech-reader.org",
};

const std::vector<std::string> kBenignWords = {
    "please", "find", "quarterly", "report", "attached", "thanks", "team",
    "meeting", "schedule", "project", "update", "review", "notes", "budget",
    "plan", "good", "great", "appreciate", "client", "status", "minutes",
    "draft", "summary", "agenda", "presentation", "release", "deadline",
};

const std::vector<std::string> kBenignFiles = {
    "report.docx", "summary.xlsx", "notes.txt", "slides.pptx", "budget.xlsx",
};

const std::vector<std::string> kLeakWords = {
    "upload", "archive", "wikileaks", "leak", "transfer", "confidential",
    "dump", "expose", "documents", "unfair", "betrayed", "quit", "angry",
};

const std::vector<std::string> kStealWords = {
    "resume", "opportunity", "position", "salary", "offer", "interview",
    "rival", "competitor", "join", "copy", "client", "list", "portfolio",
};

const std::vector<std::string> kAdminWords = {
    "keylogger", "credentials", "password", "capture", "monitor", "revenge",
    "destroy", "panic", "sabotage", "furious", "hate", "payback",
};

struct PendingEvent {
    LogEvent event;
    ThreatClass label;
    size_t seq; // creation order, final tiebreak before ids exist
};

std::string make_text(Rng& rng, const std::vector<std::string>& main_bank,
                      int n_main, int n_fill, bool exclaim = false) {
    std::string out;
    for (int i = 0; i < n_main; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += main_bank[rng.next_below(main_bank.size())];
    }
    for (int i = 0; i < n_fill; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += kBenignWords[rng.next_below(kBenignWords.size())];
    }
    if (exclaim) out += "!";
    return out;
}

struct SessionWindow {
    int64_t logon = 0;
    int64_t logoff = 0;
};

struct UserPlan {
    std::string name;
    std::string pc;
    ThreatClass cls = ThreatClass::benign;
    std::vector<SessionWindow> windows; // benign sessions, chronological
};

class Generator {
public:
    explicit Generator(const GenConfig& cfg)
        : cfg_(cfg), root_(Rng(cfg.seed).fork("gen")) {}

    SyntheticCorpus run() {
        build_users();
        for (auto& u : users_) routine(u);
        size_t normal = events_.size();
        size_t target = 0;
        int threat_users = cfg_.leavers + cfg_.stealers + cfg_.admins;
        if (threat_users > 0 && cfg_.imbalance_ratio > 0.0) {
            target = static_cast<size_t>(std::llround(
                static_cast<double>(normal) / cfg_.imbalance_ratio));
            if (target == 0) target = 1;
        }
        inject_all(target);
        return finalize(normal);
    }

private:
    void build_users() {
        int total = cfg_.total_users();
        users_.reserve(total);
        for (int i = 0; i < total; ++i) {
            UserPlan u;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "U%03d", i + 1);
            u.name = buf;
            std::snprintf(buf, sizeof(buf), "PC-%03d", i + 1);
            u.pc = buf;
            if (i >= cfg_.benign_users + cfg_.leavers + cfg_.stealers) {
                u.cls = ThreatClass::disgruntled_admin;
            } else if (i >= cfg_.benign_users + cfg_.leavers) {
                u.cls = ThreatClass::competitor_stealer;
            } else if (i >= cfg_.benign_users) {
                u.cls = ThreatClass::wikileaks_leaver;
            }
            users_.push_back(std::move(u));
        }
    }

    void push(LogEvent e, ThreatClass label) {
        events_.push_back({std::move(e), label, events_.size()});
    }

    LogEvent base_event(const UserPlan& u, int64_t t, EventType type) {
        LogEvent e;
        e.timestamp = t;
        e.user = u.name;
        e.pc = u.pc;
        e.type = type;
        return e;
    }

    std::string random_colleague(Rng& rng, const UserPlan& self) {
        for (;;) {
            const auto& u = users_[rng.next_below(users_.size())];
            if (u.name != self.name) return u.name + "@corp.com";
        }
    }

    void benign_activity(Rng& rng, const UserPlan& u, int64_t t) {
        double roll = rng.uniform();
        if (roll < 0.45) {
            LogEvent e = base_event(u, t, EventType::http);
            const auto& dom = kBenignDomains[rng.next_below(kBenignDomains.size())];
            e.resource = "http://" + dom + "/" +
                         kBenignWords[rng.next_below(kBenignWords.size())];
            e.payload = make_text(rng, kBenignWords, 0, 5 + static_cast<int>(rng.next_below(5)));
            push(std::move(e), ThreatClass::benign);
        } else if (roll < 0.80) {
            LogEvent e = base_event(u, t, EventType::email);
            e.peers.push_back(random_colleague(rng, u));
            if (rng.uniform() < 0.3) e.peers.push_back(random_colleague(rng, u));
            e.payload = make_text(rng, kBenignWords, 0, 8 + static_cast<int>(rng.next_below(6)));
            push(std::move(e), ThreatClass::benign);
        } else {
            LogEvent e = base_event(u, t, EventType::file);
            e.resource = kBenignFiles[rng.next_below(kBenignFiles.size())];
            e.payload = make_text(rng, kBenignWords, 0, 4 + static_cast<int>(rng.next_below(4)));
            push(std::move(e), ThreatClass::benign);
        }
    }

    void routine(UserPlan& u) {
        Rng rng = root_.fork("routine." + u.name);
        int64_t start = parse_date(cfg_.start_date);
        int64_t end = parse_date(cfg_.end_date);
        for (int64_t day = start; day < end; day += 86400) {
            if (weekday(day) >= 5) continue;
            if (rng.uniform() >= cfg_.attendance) continue;
            int64_t logon = day + 8 * 3600 + static_cast<int64_t>(rng.next_below(120)) * 60;
            int64_t logoff = day + 17 * 3600 + static_cast<int64_t>(rng.next_below(90)) * 60;
            push(base_event(u, logon, EventType::logon), ThreatClass::benign);
            int k = cfg_.min_activities +
                    static_cast<int>(rng.next_below(cfg_.max_activities - cfg_.min_activities + 1));
            for (int a = 0; a < k; ++a) {
                int64_t t = logon + 300 +
                            static_cast<int64_t>(rng.next_below(
                                static_cast<uint64_t>(logoff - logon - 600) / 60)) * 60;
                benign_activity(rng, u, t);
            }
            if (rng.uniform() < cfg_.device_rate) {
                int64_t t = logon + 1800 + static_cast<int64_t>(rng.next_below(120)) * 60;
                push(base_event(u, t, EventType::device_connect), ThreatClass::benign);
                push(base_event(u, t + 600 + static_cast<int64_t>(rng.next_below(30)) * 60,
                                EventType::device_disconnect),
                     ThreatClass::benign);
            }
            push(base_event(u, logoff, EventType::logoff), ThreatClass::benign);
            u.windows.push_back({logon, logoff});
        }
    }

    // Picks a minute inside one of the user's benign session windows.
    bool in_session_slot(Rng& rng, const UserPlan& u, int64_t& t_out, int margin_s = 300) {
        if (u.windows.empty()) return false;
        const auto& w = u.windows[rng.next_below(u.windows.size())];
        int64_t lo = w.logon + margin_s, hi = w.logoff - margin_s;
        if (hi <= lo) return false;
        t_out = lo + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(hi - lo) / 60)) * 60;
        return true;
    }

    void inject_all(size_t target) {
        std::vector<UserPlan*> threats;
        for (auto& u : users_) {
            if (u.cls != ThreatClass::benign) threats.push_back(&u);
        }
        if (threats.empty() || target == 0) return;
        // Plan per-user budgets, round-robin remainder.
        size_t per = target / threats.size();
        size_t extra = target % threats.size();
        for (size_t i = 0; i < threats.size(); ++i) {
            size_t budget = per + (i < extra ? 1 : 0);
            inject_user(*threats[i], budget);
        }
    }

    void inject_user(UserPlan& u, size_t budget) {
        Rng rng = root_.fork("inject." + u.name);
        bool text_only = cfg_.profile == "text_dominant";
        std::vector<PendingEvent> planned;
        auto plan = [&](LogEvent e) {
            planned.push_back({std::move(e), u.cls, 0});
        };
        int64_t start = parse_date(cfg_.start_date);
        int64_t end = parse_date(cfg_.end_date);
        auto random_day = [&]() {
            int64_t span_days = (end - start) / 86400;
            return start + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(span_days))) * 86400;
        };
        int guard = 0;
        while (planned.size() < budget && guard++ < 10000) {
            switch (u.cls) {
                case ThreatClass::wikileaks_leaver: {
                    if (text_only) {
                        int64_t t;
                        if (!in_session_slot(rng, u, t)) break;
                        LogEvent h = base_event(u, t, EventType::http);
                        h.resource = "http://wikileaks.org/submit";
                        h.payload = make_text(rng, kLeakWords, 4, 3);
                        plan(std::move(h));
                        if (planned.size() < budget) {
                            int64_t t2;
                            if (in_session_slot(rng, u, t2)) {
                                LogEvent m = base_event(u, t2, EventType::email);
                                m.peers.push_back("contact@wikileaks.org");
                                m.payload = make_text(rng, kLeakWords, 5, 4, true);
                                plan(std::move(m));
                            }
                        }
                        break;
                    }
                    // After-hours exfiltration episode on the user's own pc.
                    int64_t day = random_day();
                    int64_t t0 = day + 20 * 3600 + static_cast<int64_t>(rng.next_below(150)) * 60;
                    plan(base_event(u, t0, EventType::logon));
                    if (planned.size() < budget) {
                        plan(base_event(u, t0 + 120, EventType::device_connect));
                    }
                    if (planned.size() < budget) {
                        LogEvent h = base_event(u, t0 + 300, EventType::http);
                        h.resource = "http://wikileaks.org/submit";
                        h.payload = make_text(rng, kLeakWords, 4, 3);
                        plan(std::move(h));
                    }
                    if (planned.size() < budget) {
                        plan(base_event(u, t0 + 480, EventType::device_disconnect));
                    }
                    if (planned.size() < budget && rng.uniform() < 0.35) {
                        LogEvent m = base_event(u, t0 + 600, EventType::email);
                        m.peers.push_back("contact@wikileaks.org");
                        m.payload = make_text(rng, kLeakWords, 5, 4, true);
                        plan(std::move(m));
                    }
                    if (planned.size() < budget) {
                        plan(base_event(u, t0 + 900, EventType::logoff));
                    }
                    break;
                }
                case ThreatClass::competitor_stealer: {
                    int64_t t;
                    if (!in_session_slot(rng, u, t)) break;
                    if (text_only) {
                        LogEvent m = base_event(u, t, EventType::email);
                        m.peers.push_back("careers@rival-corp.com");
                        m.payload = make_text(rng, kStealWords, 5, 4);
                        plan(std::move(m));
                        if (planned.size() < budget) {
                            int64_t t2;
                            if (in_session_slot(rng, u, t2)) {
                                LogEvent f = base_event(u, t2, EventType::file);
                                f.resource = "portfolio.zip";
                                f.payload = make_text(rng, kStealWords, 4, 2);
                                plan(std::move(f));
                            }
                        }
                        break;
                    }
                    plan(base_event(u, t, EventType::device_connect));
                    if (planned.size() < budget) {
                        LogEvent f = base_event(u, t + 300, EventType::file);
                        f.resource = "client_list.zip";
                        f.payload = make_text(rng, kStealWords, 4, 2);
                        plan(std::move(f));
                    }
                    if (planned.size() < budget) {
                        plan(base_event(u, t + 600, EventType::device_disconnect));
                    }
                    if (planned.size() < budget && rng.uniform() < 0.4) {
                        int64_t t2;
                        if (in_session_slot(rng, u, t2)) {
                            LogEvent m = base_event(u, t2, EventType::email);
                            m.peers.push_back("careers@rival-corp.com");
                            m.payload = make_text(rng, kStealWords, 5, 4);
                            plan(std::move(m));
                        }
                    }
                    break;
                }
                case ThreatClass::disgruntled_admin: {
                    if (text_only) {
                        int64_t t;
                        if (!in_session_slot(rng, u, t)) break;
                        LogEvent m = base_event(u, t, EventType::email);
                        m.peers.push_back(random_colleague(rng, u));
                        m.payload = make_text(rng, kAdminWords, 5, 4, true);
                        plan(std::move(m));
                        if (planned.size() < budget) {
                            int64_t t2;
                            if (in_session_slot(rng, u, t2)) {
                                LogEvent f = base_event(u, t2, EventType::file);
                                f.resource = "keylog.exe";
                                f.payload = make_text(rng, kAdminWords, 4, 2);
                                plan(std::move(f));
                            }
                        }
                        break;
                    }
                    // Evening keylogger drop on another user's machine.
                    int64_t day = random_day();
                    int64_t t = day + 19 * 3600 + static_cast<int64_t>(rng.next_below(90)) * 60;
                    const UserPlan* victim = &users_[rng.next_below(users_.size())];
                    if (victim->name == u.name) break;
                    LogEvent f = base_event(u, t, EventType::file);
                    f.pc = victim->pc;
                    f.resource = "keylog.exe";
                    f.payload = make_text(rng, kAdminWords, 4, 2);
                    plan(std::move(f));
                    if (planned.size() < budget && rng.uniform() < 0.5) {
                        int64_t t2;
                        if (in_session_slot(rng, u, t2)) {
                            LogEvent m = base_event(u, t2, EventType::email);
                            m.peers.push_back(random_colleague(rng, u));
                            m.payload = make_text(rng, kAdminWords, 5, 4, true);
                            plan(std::move(m));
                        }
                    }
                    break;
                }
                case ThreatClass::benign:
                    return;
            }
        }
        for (auto& p : planned) push(std::move(p.event), p.label);
    }

    SyntheticCorpus finalize(size_t normal) {
        // Deterministic order: (user, t, kind, creation seq), then assign ids.
        std::stable_sort(events_.begin(), events_.end(),
                         [](const PendingEvent& a, const PendingEvent& b) {
            if (a.event.user != b.event.user) return a.event.user < b.event.user;
            if (a.event.timestamp != b.event.timestamp) return a.event.timestamp < b.event.timestamp;
            int ka = static_cast<int>(source_kind_of(a.event.type));
            int kb = static_cast<int>(source_kind_of(b.event.type));
            if (ka != kb) return ka < kb;
            return a.seq < b.seq;
        });
        SyntheticCorpus corpus;
        corpus.events.reserve(events_.size());
        for (size_t i = 0; i < events_.size(); ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "E%07zu", i);
            events_[i].event.id = buf;
            corpus.activity_class[buf] = events_[i].label;
            corpus.events.push_back(events_[i].event);
            if (events_[i].label != ThreatClass::benign) ++corpus.malicious_count;
        }
        corpus.normal_count = normal;
        for (const auto& u : users_) corpus.user_class[u.name] = u.cls;

        // Session ids come from the same sessionizer the pipeline uses.
        auto sessions = sessionize_all(corpus.events);
        for (const auto& s : sessions) {
            for (const auto& e : s.events) {
                corpus.labels.push_back({s.user, s.id, e.id, corpus.activity_class.at(e.id)});
            }
        }
        return corpus;
    }

    GenConfig cfg_;
    Rng root_;
    std::vector<UserPlan> users_;
    std::vector<PendingEvent> events_;
};

} // namespace

void GenConfig::validate() const {
    if (benign_users < 1) fail(ErrorKind::config, "benign_users must be >= 1");
    if (leavers < 0 || stealers < 0 || admins < 0) {
        fail(ErrorKind::config, "threat user counts must be >= 0");
    }
    if (attendance < 0.0 || attendance > 1.0) fail(ErrorKind::config, "attendance must be in [0,1]");
    if (device_rate < 0.0 || device_rate > 1.0) fail(ErrorKind::config, "device_rate must be in [0,1]");
    if (imbalance_ratio < 0.0) fail(ErrorKind::config, "imbalance_ratio must be >= 0");
    if (min_activities < 1 || max_activities < min_activities) {
        fail(ErrorKind::config, "activity counts must satisfy 1 <= min <= max");
    }
    if (profile != "mixed" && profile != "text_dominant") {
        fail(ErrorKind::config, "profile must be mixed or text_dominant");
    }
    if (parse_date(end_date) <= parse_date(start_date)) {
        fail(ErrorKind::config, "end_date must be after start_date");
    }
}

SyntheticCorpus generate_synthetic_corpus(const GenConfig& cfg) {
    cfg.validate();
    Generator gen(cfg);
    return gen.run();
}

void write_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_cert_csvs(corpus.events, dir);
    write_events_ndjson(corpus.events, (std::filesystem::path(dir) / "events.ndjson").string());
    write_labels_csv(corpus.labels, (std::filesystem::path(dir) / "labels.csv").string());
    std::ofstream users((std::filesystem::path(dir) / "users.csv").string(),
                        std::ios::binary | std::ios::trunc);
    users << "user,class\n";
    for (const auto& [name, cls] : corpus.user_class) {
        users << name << ',' << threat_class_name(cls) << '\n';
    }
}

} // namespace insight
