#include "insight/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "insight/encoders.hpp"
#include "insight/micro_lm.hpp"
#include "insight/rng.hpp"

namespace insight {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) fail(ErrorKind::format, "empty section name");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::format, "config line " + std::to_string(lineno) + " lacks '='");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail(ErrorKind::format, "empty key at line " + std::to_string(lineno));
        std::string full = section.empty() ? key : section + "." + key;
        cfg.values_[full] = value;
    }
    return cfg;
}

const std::string& KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::config, "missing config key: " + key);
    return it->second;
}

void KeyValueConfig::apply_overrides(const std::vector<std::string>& kvs) {
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::config, "override must be KEY=VALUE: " + kv);
        }
        values_[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
}

void KeyValueConfig::restrict_to(const KeyValueConfig& schema) const {
    for (const auto& [key, value] : values_) {
        if (!schema.has(key)) fail(ErrorKind::config, "unknown config key: " + key);
    }
}

void KeyValueConfig::merge_defaults(const KeyValueConfig& defaults) {
    for (const auto& [key, value] : defaults.values_) {
        values_.emplace(key, value); // keeps existing entries
    }
}

std::string KeyValueConfig::serialize() const {
    std::string out;
    std::string section;
    for (const auto& [key, value] : values_) {
        auto dot = key.find('.');
        std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (sec != section) {
            if (!out.empty()) out += "\n";
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += name + " = " + value + "\n";
    }
    return out;
}

uint64_t KeyValueConfig::hash() const {
    std::string canon;
    for (const auto& [key, value] : values_) canon += key + "=" + value + "\n";
    return fnv1a(canon);
}

int config_int(const KeyValueConfig& c, const std::string& key, int lo, int hi) {
    const std::string& s = c.get(key);
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        fail(ErrorKind::config, key + " must be an integer, got '" + s + "'");
    }
    if (v < lo || v > hi) {
        fail(ErrorKind::config, key + "=" + s + " outside [" + std::to_string(lo) + "," +
                                    std::to_string(hi) + "]");
    }
    return v;
}

double config_double(const KeyValueConfig& c, const std::string& key, double lo, double hi) {
    const std::string& s = c.get(key);
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (v < lo || v > hi) {
            fail(ErrorKind::config, key + "=" + s + " out of range");
        }
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(ErrorKind::config, key + " must be a number, got '" + s + "'");
    }
}

uint64_t config_u64(const KeyValueConfig& c, const std::string& key) {
    const std::string& s = c.get(key);
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        fail(ErrorKind::config, key + " must be a non-negative integer, got '" + s + "'");
    }
    return v;
}

bool config_bool(const KeyValueConfig& c, const std::string& key) {
    const std::string& s = c.get(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(ErrorKind::config, key + " must be a boolean, got '" + s + "'");
}

KeyValueConfig RunConfig::schema() { return RunConfig{}.to_kv(); }

KeyValueConfig RunConfig::to_kv() const {
    KeyValueConfig kv;
    kv.set("data.dir", data_dir);
    kv.set("data.boundary", boundary_date);
    kv.set("data.val_fraction", std::to_string(val_fraction));
    kv.set("data.cache_dir", cache_dir);

    kv.set("views.d_text", std::to_string(d_text));
    kv.set("views.d_sent", std::to_string(d_sent));
    kv.set("views.d_seq", std::to_string(d_seq));
    kv.set("views.d_topo", std::to_string(d_topo));
    kv.set("views.node2vec_p", std::to_string(n2v_p));
    kv.set("views.node2vec_q", std::to_string(n2v_q));
    kv.set("views.node2vec_walk_length", std::to_string(n2v_walk_length));
    kv.set("views.node2vec_walks_per_node", std::to_string(n2v_walks_per_node));
    kv.set("views.node2vec_window", std::to_string(n2v_window));
    kv.set("views.node2vec_negative", std::to_string(n2v_negative));
    kv.set("views.node2vec_epochs", std::to_string(n2v_epochs));
    kv.set("views.node2vec_lr", std::to_string(n2v_lr));
    for (int v = 0; v < kViewCount; ++v) {
        std::string name = view_name(static_cast<View>(v));
        kv.set("views.external_" + name + "_matrix", external_matrix[v]);
        kv.set("views.external_" + name + "_keys", external_keys[v]);
    }

    kv.set("model.d", std::to_string(d));
    kv.set("model.query_tokens", std::to_string(query_tokens));
    kv.set("model.fusion_tokens", std::to_string(fusion_tokens));
    kv.set("model.adapter_heads", std::to_string(adapter_heads));
    kv.set("model.fusion_heads", std::to_string(fusion_heads));
    kv.set("model.adapter_hidden", std::to_string(adapter_hidden));
    kv.set("model.alpha_res", std::to_string(alpha_res));
    kv.set("model.lm_layers", std::to_string(lm_layers));
    kv.set("model.lm_heads", std::to_string(lm_heads));
    kv.set("model.lm_ffn_hidden", std::to_string(lm_ffn_hidden));
    kv.set("model.lm_context", std::to_string(lm_context));
    kv.set("model.lora_rank", std::to_string(lora_rank));
    kv.set("model.lora_alpha", std::to_string(lora_alpha));
    kv.set("model.lora_dropout", std::to_string(lora_dropout));
    kv.set("model.head", head);
    kv.set("model.prompt", prompt_strategy);
    kv.set("model.verbalizer", verbalizer_strategy);

    std::string views_list;
    for (int v = 0; v < kViewCount; ++v) {
        if (!active_views[v]) continue;
        if (!views_list.empty()) views_list += ",";
        views_list += view_name(static_cast<View>(v));
    }
    kv.set("ablation.views", views_list);
    kv.set("ablation.intra", intra_mean ? "mean" : "attention");
    kv.set("ablation.fusion", fusion_mean ? "mean" : "attention");
    kv.set("ablation.ffn", identity_ffn ? "identity" : "gelu");

    kv.set("train.batch", std::to_string(batch));
    kv.set("train.epochs", std::to_string(epochs));
    kv.set("train.lr", std::to_string(lr));
    kv.set("train.weight_decay", std::to_string(weight_decay));
    kv.set("train.lr_step", std::to_string(lr_step));
    kv.set("train.lr_gamma", std::to_string(lr_gamma));
    kv.set("train.seed", std::to_string(seed));
    kv.set("train.granularity", granularity);
    return kv;
}

RunConfig RunConfig::from_kv(const KeyValueConfig& raw) {
    KeyValueConfig kv = raw;
    kv.merge_defaults(schema());
    kv.restrict_to(schema());

    RunConfig c;
    c.data_dir = kv.get("data.dir");
    c.boundary_date = kv.get("data.boundary");
    parse_date(c.boundary_date); // validates
    c.val_fraction = config_double(kv, "data.val_fraction", 0.0, 0.5);
    c.cache_dir = kv.get("data.cache_dir");

    c.d_text = config_int(kv, "views.d_text", 1, 4096);
    c.d_sent = config_int(kv, "views.d_sent", 1, 4096);
    c.d_seq = config_int(kv, "views.d_seq", 1, 4096);
    c.d_topo = config_int(kv, "views.d_topo", 1, 4096);
    c.n2v_p = config_double(kv, "views.node2vec_p", 1e-6, 1e6);
    c.n2v_q = config_double(kv, "views.node2vec_q", 1e-6, 1e6);
    c.n2v_walk_length = config_int(kv, "views.node2vec_walk_length", 1, 10000);
    c.n2v_walks_per_node = config_int(kv, "views.node2vec_walks_per_node", 1, 1000);
    c.n2v_window = config_int(kv, "views.node2vec_window", 1, 100);
    c.n2v_negative = config_int(kv, "views.node2vec_negative", 1, 100);
    c.n2v_epochs = config_int(kv, "views.node2vec_epochs", 1, 100);
    c.n2v_lr = config_double(kv, "views.node2vec_lr", 1e-9, 10.0);
    for (int v = 0; v < kViewCount; ++v) {
        std::string name = view_name(static_cast<View>(v));
        c.external_matrix[v] = kv.get("views.external_" + name + "_matrix");
        c.external_keys[v] = kv.get("views.external_" + name + "_keys");
    }

    c.d = config_int(kv, "model.d", 2, 8192);
    c.query_tokens = config_int(kv, "model.query_tokens", 1, 256);
    c.fusion_tokens = config_int(kv, "model.fusion_tokens", 1, 256);
    c.adapter_heads = config_int(kv, "model.adapter_heads", 1, 64);
    c.fusion_heads = config_int(kv, "model.fusion_heads", 1, 64);
    c.adapter_hidden = config_int(kv, "model.adapter_hidden", 1, 16384);
    c.alpha_res = config_double(kv, "model.alpha_res", 1e-9, 1.0);
    c.lm_layers = config_int(kv, "model.lm_layers", 1, 64);
    c.lm_heads = config_int(kv, "model.lm_heads", 1, 64);
    c.lm_ffn_hidden = config_int(kv, "model.lm_ffn_hidden", 1, 16384);
    c.lm_context = config_int(kv, "model.lm_context", 2, 4096);
    c.lora_rank = config_int(kv, "model.lora_rank", 1, 1024);
    c.lora_alpha = config_double(kv, "model.lora_alpha", 1e-9, 1e6);
    c.lora_dropout = config_double(kv, "model.lora_dropout", 0.0, 0.999);
    c.head = kv.get("model.head");
    if (c.head != "verbalizer" && c.head != "mlp") {
        fail(ErrorKind::config, "model.head must be verbalizer or mlp");
    }
    c.prompt_strategy = kv.get("model.prompt");
    prompt_strategy_from_name(c.prompt_strategy);
    c.verbalizer_strategy = kv.get("model.verbalizer");
    verbalizer_strategy_from_name(c.verbalizer_strategy);

    c.active_views = {false, false, false, false};
    {
        std::string list = kv.get("ablation.views");
        std::string cur;
        auto commit = [&] {
            if (cur.empty()) return;
            c.active_views[static_cast<int>(view_from_name(cur))] = true;
            cur.clear();
        };
        for (char ch : list) {
            if (ch == ',') commit();
            else if (!std::isspace(static_cast<unsigned char>(ch))) cur.push_back(ch);
        }
        commit();
    }
    if (c.active_views == std::array<bool, kViewCount>{false, false, false, false}) {
        fail(ErrorKind::config, "ablation.views must name at least one view");
    }
    c.intra_mean = kv.get("ablation.intra") == "mean";
    c.fusion_mean = kv.get("ablation.fusion") == "mean";
    c.identity_ffn = kv.get("ablation.ffn") == "identity";
    if (kv.get("ablation.intra") != "mean" && kv.get("ablation.intra") != "attention") {
        fail(ErrorKind::config, "ablation.intra must be attention or mean");
    }
    if (kv.get("ablation.fusion") != "mean" && kv.get("ablation.fusion") != "attention") {
        fail(ErrorKind::config, "ablation.fusion must be attention or mean");
    }
    if (kv.get("ablation.ffn") != "identity" && kv.get("ablation.ffn") != "gelu") {
        fail(ErrorKind::config, "ablation.ffn must be gelu or identity");
    }

    c.batch = config_int(kv, "train.batch", 1, 65536);
    c.epochs = config_int(kv, "train.epochs", 0, 10000);
    c.lr = config_double(kv, "train.lr", 0.0, 100.0);
    c.weight_decay = config_double(kv, "train.weight_decay", 0.0, 10.0);
    c.lr_step = config_int(kv, "train.lr_step", 1, 10000);
    c.lr_gamma = config_double(kv, "train.lr_gamma", 1e-9, 1.0);
    c.seed = config_u64(kv, "train.seed");
    c.granularity = kv.get("train.granularity");
    if (c.granularity != "activity" && c.granularity != "session") {
        fail(ErrorKind::config, "train.granularity must be activity or session");
    }

    if (c.d % c.adapter_heads != 0 || c.d % c.fusion_heads != 0 || c.d % c.lm_heads != 0) {
        fail(ErrorKind::config, "model.d must be divisible by every head count");
    }
    return c;
}

KeyValueConfig gen_schema() { return gen_config_to_kv(GenConfig{}); }

KeyValueConfig gen_config_to_kv(const GenConfig& g) {
    KeyValueConfig kv;
    kv.set("gen.benign_users", std::to_string(g.benign_users));
    kv.set("gen.leavers", std::to_string(g.leavers));
    kv.set("gen.stealers", std::to_string(g.stealers));
    kv.set("gen.admins", std::to_string(g.admins));
    kv.set("gen.start_date", g.start_date);
    kv.set("gen.end_date", g.end_date);
    kv.set("gen.attendance", std::to_string(g.attendance));
    kv.set("gen.min_activities", std::to_string(g.min_activities));
    kv.set("gen.max_activities", std::to_string(g.max_activities));
    kv.set("gen.device_rate", std::to_string(g.device_rate));
    kv.set("gen.imbalance_ratio", std::to_string(g.imbalance_ratio));
    kv.set("gen.profile", g.profile);
    kv.set("gen.seed", std::to_string(g.seed));
    return kv;
}

GenConfig gen_config_from_kv(const KeyValueConfig& raw) {
    KeyValueConfig kv = raw;
    kv.merge_defaults(gen_schema());
    kv.restrict_to(gen_schema());
    GenConfig g;
    g.benign_users = config_int(kv, "gen.benign_users", 1, 1000000);
    g.leavers = config_int(kv, "gen.leavers", 0, 1000000);
    g.stealers = config_int(kv, "gen.stealers", 0, 1000000);
    g.admins = config_int(kv, "gen.admins", 0, 1000000);
    g.start_date = kv.get("gen.start_date");
    g.end_date = kv.get("gen.end_date");
    g.attendance = config_double(kv, "gen.attendance", 0.0, 1.0);
    g.min_activities = config_int(kv, "gen.min_activities", 1, 1000);
    g.max_activities = config_int(kv, "gen.max_activities", 1, 1000);
    g.device_rate = config_double(kv, "gen.device_rate", 0.0, 1.0);
    g.imbalance_ratio = config_double(kv, "gen.imbalance_ratio", 0.0, 1e9);
    g.profile = kv.get("gen.profile");
    g.seed = config_u64(kv, "gen.seed");
    g.validate();
    return g;
}

} // namespace insight
