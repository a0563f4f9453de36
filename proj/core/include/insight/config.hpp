#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "insight/encoders.hpp"
#include "insight/error.hpp"
#include "insight/synth.hpp"

namespace insight {

// Flat key=value configuration with [section] headers; keys are addressed as
// "section.key". Unknown keys are rejected against the declared schema;
// overrides win over file values.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_text(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const std::string& get(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    // Merges overrides; every key must already be declared in `schema`.
    void apply_overrides(const std::vector<std::string>& key_equals_value);
    void restrict_to(const KeyValueConfig& schema) const; // unknown key -> config error
    void merge_defaults(const KeyValueConfig& defaults);

    std::string serialize() const; // sections in sorted order, stable
    uint64_t hash() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Typed accessors with range validation.
int config_int(const KeyValueConfig& c, const std::string& key, int lo, int hi);
double config_double(const KeyValueConfig& c, const std::string& key, double lo, double hi);
uint64_t config_u64(const KeyValueConfig& c, const std::string& key);
bool config_bool(const KeyValueConfig& c, const std::string& key);

struct RunConfig {
    // data
    std::string data_dir;
    std::string boundary_date = "2010-12-31";
    double val_fraction = 0.1;
    std::string cache_dir; // INSIGHT_CACHE_DIR overrides when set

    // views
    int d_text = 64, d_sent = 16, d_seq = 32, d_topo = 32;
    double n2v_p = 1.0, n2v_q = 1.0;
    int n2v_walk_length = 40, n2v_walks_per_node = 10, n2v_window = 5;
    int n2v_negative = 5, n2v_epochs = 2;
    double n2v_lr = 0.025;
    std::array<std::string, kViewCount> external_matrix{}; // optional per-view
    std::array<std::string, kViewCount> external_keys{};

    // model
    int d = 64;
    int query_tokens = 4;   // per-view fuse tokens
    int fusion_tokens = 8;  // inter-view fusion queries
    int adapter_heads = 8, fusion_heads = 8;
    int adapter_hidden = 128;
    double alpha_res = 0.7;
    int lm_layers = 2, lm_heads = 4, lm_ffn_hidden = 128, lm_context = 64;
    int lora_rank = 8;
    double lora_alpha = 16.0, lora_dropout = 0.05;
    std::string head = "verbalizer"; // verbalizer | mlp
    std::string prompt_strategy = "task_instruction";
    std::string verbalizer_strategy = "class_description";

    // ablation switches
    std::array<bool, kViewCount> active_views = {true, true, true, true};
    bool intra_mean = false;   // bypass intra-view attention
    bool fusion_mean = false;  // bypass inter-view attention
    bool identity_ffn = false; // drop the adapter FFN

    // training
    int batch = 16;
    int epochs = 30;
    double lr = 5e-5, weight_decay = 0.01;
    int lr_step = 2;
    double lr_gamma = 0.5;
    uint64_t seed = 42;
    std::string granularity = "activity"; // activity | session

    static KeyValueConfig schema(); // declared keys with defaults
    static RunConfig from_kv(const KeyValueConfig& kv);
    KeyValueConfig to_kv() const;
    uint64_t hash() const { return to_kv().hash(); }
};

KeyValueConfig gen_schema();
GenConfig gen_config_from_kv(const KeyValueConfig& kv);
KeyValueConfig gen_config_to_kv(const GenConfig& cfg);

} // namespace insight
