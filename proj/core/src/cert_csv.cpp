#include "insight/cert_csv.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace insight {

namespace {

const std::map<SourceKind, std::vector<std::string>>& schemas() {
    static const std::map<SourceKind, std::vector<std::string>> s = {
        {SourceKind::logon, {"id", "date", "user", "pc", "activity"}},
        {SourceKind::device, {"id", "date", "user", "pc", "activity"}},
        {SourceKind::http, {"id", "date", "user", "pc", "url", "content"}},
        {SourceKind::email, {"id", "date", "user", "pc", "to", "cc", "bcc", "from", "size", "attachments", "content"}},
        {SourceKind::file, {"id", "date", "user", "pc", "filename", "content"}},
    };
    return s;
}

std::vector<std::string> split_addresses(const std::string& field) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : field) {
        if (c == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_addresses(const std::vector<std::string>& addrs, size_t begin, size_t end) {
    std::string out;
    for (size_t i = begin; i < end && i < addrs.size(); ++i) {
        if (!out.empty()) out.push_back(';');
        out += addrs[i];
    }
    return out;
}

LogEvent event_from_record(const std::vector<std::string>& rec, SourceKind kind) {
    LogEvent e;
    e.id = rec[0];
    e.timestamp = parse_timestamp(rec[1]);
    e.user = rec[2];
    e.pc = rec[3];
    if (e.user.empty()) fail(ErrorKind::format, "empty user");
    switch (kind) {
        case SourceKind::logon:
            if (rec[4] == "Logon") e.type = EventType::logon;
            else if (rec[4] == "Logoff") e.type = EventType::logoff;
            else fail(ErrorKind::format, "bad logon activity: " + rec[4]);
            break;
        case SourceKind::device:
            if (rec[4] == "Connect") e.type = EventType::device_connect;
            else if (rec[4] == "Disconnect") e.type = EventType::device_disconnect;
            else fail(ErrorKind::format, "bad device activity: " + rec[4]);
            break;
        case SourceKind::http:
            e.type = EventType::http;
            e.resource = rec[4];
            e.payload = rec[5];
            break;
        case SourceKind::email: {
            e.type = EventType::email;
            auto to = split_addresses(rec[4]);
            auto cc = split_addresses(rec[5]);
            auto bcc = split_addresses(rec[6]);
            e.peers = to;
            e.peers.insert(e.peers.end(), cc.begin(), cc.end());
            e.peers.insert(e.peers.end(), bcc.begin(), bcc.end());
            e.payload = rec[10];
            break;
        }
        case SourceKind::file:
            e.type = EventType::file;
            e.resource = rec[4];
            e.payload = rec[5];
            break;
    }
    return e;
}

std::vector<std::string> record_from_event(const LogEvent& e) {
    std::string date = format_timestamp(e.timestamp);
    switch (source_kind_of(e.type)) {
        case SourceKind::logon:
            return {e.id, date, e.user, e.pc, e.type == EventType::logon ? "Logon" : "Logoff"};
        case SourceKind::device:
            return {e.id, date, e.user, e.pc,
                    e.type == EventType::device_connect ? "Connect" : "Disconnect"};
        case SourceKind::http:
            return {e.id, date, e.user, e.pc, e.resource, e.payload};
        case SourceKind::email:
            return {e.id, date, e.user, e.pc, join_addresses(e.peers, 0, e.peers.size()),
                    "", "", e.user + "@corp.com", std::to_string(e.payload.size()), "0", e.payload};
        case SourceKind::file:
            return {e.id, date, e.user, e.pc, e.resource, e.payload};
    }
    fail(ErrorKind::state, "unreachable");
}

const char* csv_name(SourceKind k) {
    switch (k) {
        case SourceKind::logon: return "logon.csv";
        case SourceKind::device: return "device.csv";
        case SourceKind::http: return "http.csv";
        case SourceKind::email: return "email.csv";
        case SourceKind::file: return "file.csv";
    }
    return "?";
}

} // namespace

std::string csv_quote(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::vector<std::string>> read_csv_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    auto end_field = [&] {
        rec.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        // skip blank lines
        if (!(rec.size() == 1 && rec[0].empty())) records.push_back(rec);
        rec.clear();
    };
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() || !rec.empty()) end_record();
        } else if (c == '\r') {
            // swallow; \n handles the record break
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (!field.empty() || !rec.empty()) end_record();
    return records;
}

std::vector<LogEvent> parse_cert_csv(const std::string& path, SourceKind kind,
                                     ParseStats* stats, double malformed_threshold) {
    if (!std::filesystem::exists(path)) fail(ErrorKind::io, "missing file: " + path);
    auto records = read_csv_records(path);
    const auto& schema = schemas().at(kind);
    if (records.empty() || records[0] != schema) {
        std::string got = records.empty() ? "<empty>" : "";
        if (!records.empty()) {
            for (const auto& h : records[0]) got += h + ",";
        }
        fail(ErrorKind::format, std::string("header mismatch for ") + csv_name(kind) + ": " + got);
    }

    std::vector<LogEvent> events;
    size_t malformed = 0;
    for (size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != schema.size()) {
            ++malformed;
            continue;
        }
        try {
            events.push_back(event_from_record(rec, kind));
        } catch (const Error&) {
            ++malformed;
        }
    }
    size_t data_rows = records.size() - 1;
    if (stats) {
        stats->rows += data_rows;
        stats->malformed += malformed;
    }
    if (data_rows > 0 &&
        static_cast<double>(malformed) / static_cast<double>(data_rows) > malformed_threshold) {
        fail(ErrorKind::format, "malformed-row ratio above threshold in " + path + ": " +
                                    std::to_string(malformed) + "/" + std::to_string(data_rows));
    }
    return events;
}

void write_cert_csvs(const std::vector<LogEvent>& events, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::map<SourceKind, std::ofstream> files;
    for (const auto& [kind, schema] : schemas()) {
        auto path = std::filesystem::path(dir) / csv_name(kind);
        auto& out = files[kind];
        out.open(path, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot write " + path.string());
        for (size_t i = 0; i < schema.size(); ++i) {
            if (i) out << ',';
            out << schema[i];
        }
        out << '\n';
    }
    for (const auto& e : events) {
        auto rec = record_from_event(e);
        auto& out = files[source_kind_of(e.type)];
        for (size_t i = 0; i < rec.size(); ++i) {
            if (i) out << ',';
            out << csv_quote(rec[i]);
        }
        out << '\n';
    }
}

std::vector<LogEvent> read_cert_dir(const std::string& dir, ParseStats* stats) {
    std::vector<LogEvent> all;
    for (const auto& [kind, schema] : schemas()) {
        auto path = (std::filesystem::path(dir) / csv_name(kind)).string();
        auto part = parse_cert_csv(path, kind, stats);
        all.insert(all.end(), part.begin(), part.end());
    }
    sort_events(all);
    return all;
}

void write_events_ndjson(const std::vector<LogEvent>& events, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    for (const auto& e : events) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["ts"] = format_timestamp(e.timestamp);
        j["user"] = e.user;
        j["pc"] = e.pc;
        j["type"] = event_type_name(e.type);
        j["resource"] = e.resource;
        j["payload"] = e.payload;
        j["peers"] = e.peers;
        out << j.dump() << '\n';
    }
}

void write_labels_csv(const std::vector<ActivityLabel>& labels, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out << "user,session_id,activity_id,label\n";
    for (const auto& l : labels) {
        out << csv_quote(l.user) << ',' << csv_quote(l.session_id) << ','
            << csv_quote(l.activity_id) << ',' << threat_class_name(l.label) << '\n';
    }
}

std::vector<ActivityLabel> read_labels_csv(const std::string& path) {
    auto records = read_csv_records(path);
    if (records.empty() || records[0] != std::vector<std::string>{"user", "session_id", "activity_id", "label"}) {
        fail(ErrorKind::format, "bad labels header in " + path);
    }
    std::vector<ActivityLabel> out;
    out.reserve(records.size() - 1);
    for (size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != 4) fail(ErrorKind::format, "bad labels row in " + path);
        out.push_back({rec[0], rec[1], rec[2], threat_class_from_name(rec[3])});
    }
    return out;
}

} // namespace insight
