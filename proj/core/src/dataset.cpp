#include "insight/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include "insight/cert_csv.hpp"
#include "insight/embed_cache.hpp"
#include "insight/graph.hpp"
#include "insight/sessionize.hpp"

namespace insight {

namespace {

std::string sample_key(const std::string& user, const std::string& session_id,
                       const std::string& activity_id) {
    return user + "|" + session_id + "|" + activity_id;
}

std::string view_config_string(const RunConfig& cfg) {
    std::string s;
    s += "dt=" + std::to_string(cfg.d_text) + ";ds=" + std::to_string(cfg.d_sent) +
         ";dq=" + std::to_string(cfg.d_seq) + ";dg=" + std::to_string(cfg.d_topo);
    s += ";p=" + std::to_string(cfg.n2v_p) + ";q=" + std::to_string(cfg.n2v_q) +
         ";wl=" + std::to_string(cfg.n2v_walk_length) +
         ";wn=" + std::to_string(cfg.n2v_walks_per_node) +
         ";win=" + std::to_string(cfg.n2v_window) + ";neg=" + std::to_string(cfg.n2v_negative) +
         ";ne=" + std::to_string(cfg.n2v_epochs) + ";nlr=" + std::to_string(cfg.n2v_lr);
    s += ";seed=" + std::to_string(cfg.seed);
    s += ";dir=" + cfg.data_dir + ";boundary=" + cfg.boundary_date +
         ";val=" + std::to_string(cfg.val_fraction);
    for (int v = 0; v < kViewCount; ++v) {
        s += ";ext" + std::to_string(v) + "=" + cfg.external_matrix[v] + "," +
             cfg.external_keys[v];
    }
    return s;
}

std::string effective_cache_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("INSIGHT_CACHE_DIR"); env && *env) return env;
    return cfg.cache_dir;
}

} // namespace

uint64_t dataset_config_hash(const RunConfig& cfg) {
    return fnv1a(view_config_string(cfg));
}

Dataset build_dataset(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) fail(ErrorKind::config, "data.dir is required");
    auto events = read_cert_dir(cfg.data_dir);
    if (events.empty()) fail(ErrorKind::input, "corpus has no events");

    auto label_rows = read_labels_csv(
        (std::filesystem::path(cfg.data_dir) / "labels.csv").string());
    std::map<std::string, ThreatClass> label_of;
    for (const auto& row : label_rows) label_of[row.activity_id] = row.label;

    // Frozen encoders + topology table.
    EncoderConfig enc_cfg;
    enc_cfg.d_text = cfg.d_text;
    enc_cfg.d_sent = cfg.d_sent;
    enc_cfg.d_seq = cfg.d_seq;
    enc_cfg.d_topo = cfg.d_topo;
    enc_cfg.seed = cfg.seed;
    FrozenEncoders encoders(enc_cfg);

    std::array<ExternalEmbeddings, kViewCount> external;
    std::array<bool, kViewCount> has_external{};
    for (int v = 0; v < kViewCount; ++v) {
        if (cfg.external_matrix[v].empty()) continue;
        external[v] = load_external_embeddings(cfg.external_matrix[v], cfg.external_keys[v]);
        has_external[v] = true;
        int want = v == 0 ? cfg.d_text : v == 1 ? cfg.d_sent : v == 2 ? cfg.d_seq : cfg.d_topo;
        if (external[v].dim != want) {
            fail(ErrorKind::config, std::string("external embeddings for view ") +
                                        view_name(static_cast<View>(v)) + " have dim " +
                                        std::to_string(external[v].dim) + ", expected " +
                                        std::to_string(want));
        }
    }

    NodeEmbeddings topo;
    if (!has_external[static_cast<int>(View::topo)]) {
        auto graph = build_interaction_graph(events);
        Node2VecConfig n2v;
        n2v.p = cfg.n2v_p;
        n2v.q = cfg.n2v_q;
        n2v.walk_length = cfg.n2v_walk_length;
        n2v.walks_per_node = cfg.n2v_walks_per_node;
        n2v.window = cfg.n2v_window;
        n2v.dim = cfg.d_topo;
        n2v.negative_samples = cfg.n2v_negative;
        n2v.epochs = cfg.n2v_epochs;
        n2v.lr = cfg.n2v_lr;
        topo = node2vec_train(graph, n2v, Rng(cfg.seed).fork("node2vec"));
    }

    std::string cache_dir = effective_cache_dir(cfg);
    std::string cache_path;
    if (!cache_dir.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "emb_%016llx.bin",
                      static_cast<unsigned long long>(dataset_config_hash(cfg)));
        cache_path = (std::filesystem::path(cache_dir) / buf).string();
    }
    EmbeddingCache cache(cache_path, dataset_config_hash(cfg));

    auto external_lookup = [&](int v, const std::string& key) {
        auto it = external[v].table.find(key);
        if (it == external[v].table.end()) {
            fail(ErrorKind::index, std::string("external embedding missing key ") + key);
        }
        ViewEmbedding e;
        e.view = static_cast<View>(v);
        e.tokens = 1;
        e.dim = external[v].dim;
        e.data = it->second;
        return e;
    };

    const int64_t boundary = end_of_day(parse_date(cfg.boundary_date));
    auto sessions = sessionize_all(events);

    struct Tagged {
        Sample sample;
        int64_t session_start;
        bool train_period;
    };
    std::map<std::string, std::vector<size_t>> train_sessions_by_user; // session order
    std::vector<Tagged> all;
    std::map<std::string, size_t> session_index_of;
    std::vector<std::pair<std::string, bool>> session_meta; // id, train_period

    for (const auto& s : sessions) {
        bool train_period = s.start <= boundary;
        size_t sess_idx = session_meta.size();
        session_meta.push_back({s.id, train_period});
        session_index_of[s.id] = sess_idx;
        if (train_period) train_sessions_by_user[s.user].push_back(sess_idx);

        std::vector<int> prefix;
        prefix.reserve(s.events.size());
        for (const auto& e : s.events) {
            prefix.push_back(activity_code(e));
            Tagged t;
            t.session_start = s.start;
            t.train_period = e.timestamp <= boundary;
            Sample& smp = t.sample;
            smp.user = s.user;
            smp.session_id = s.id;
            smp.activity_id = e.id;
            smp.timestamp = e.timestamp;
            auto lit = label_of.find(e.id);
            smp.cls = lit == label_of.end() ? ThreatClass::benign : lit->second;
            smp.label = smp.cls == ThreatClass::benign ? 0 : 1;

            std::string key = sample_key(s.user, s.id, e.id);
            // text: recipients, resource and payload tokens of the event
            std::string text_blob;
            for (const auto& peer : e.peers) text_blob += peer + " ";
            if (!e.resource.empty()) text_blob += e.resource + " ";
            text_blob += e.payload;
            {
                std::vector<std::string> chunks;
                if (text_blob.find_first_not_of(' ') != std::string::npos) {
                    chunks.push_back(text_blob);
                }
                smp.views[0] = has_external[0]
                                   ? external_lookup(0, key)
                                   : cache.get_or_compute(key, View::text, [&] {
                                         return encoders.encode_text(chunks);
                                     });
            }
            {
                std::vector<std::string> chunks;
                if (!e.payload.empty()) chunks.push_back(e.payload);
                smp.views[1] = has_external[1]
                                   ? external_lookup(1, key)
                                   : cache.get_or_compute(key, View::sent, [&] {
                                         return encoders.encode_sentiment(chunks);
                                     });
            }
            {
                std::vector<int> codes = prefix; // up to and including this event
                smp.views[2] = has_external[2]
                                   ? external_lookup(2, key)
                                   : cache.get_or_compute(key, View::seq, [&] {
                                         return encoders.encode_sequence(codes);
                                     });
            }
            {
                if (has_external[3]) {
                    smp.views[3] = external_lookup(3, key);
                } else {
                    ViewEmbedding e3;
                    e3.view = View::topo;
                    e3.tokens = 1;
                    e3.dim = cfg.d_topo;
                    std::string node = "user:" + s.user;
                    if (topo.contains(node)) {
                        auto vec = topo.vector_of(node);
                        e3.data.assign(vec.begin(), vec.end());
                    } else {
                        e3.data.assign(cfg.d_topo, 0.0);
                    }
                    smp.views[3] = std::move(e3);
                }
            }
            all.push_back(std::move(t));
        }
    }

    // Validation: the last val_fraction of each user's training-period
    // sessions (by session start order).
    std::vector<bool> session_is_val(session_meta.size(), false);
    for (auto& [user, list] : train_sessions_by_user) {
        size_t take = static_cast<size_t>(static_cast<double>(list.size()) * cfg.val_fraction);
        for (size_t i = list.size() - take; i < list.size(); ++i) {
            session_is_val[list[i]] = true;
        }
    }

    Dataset ds;
    std::vector<int> train_labels;
    for (auto& t : all) {
        if (!t.train_period) {
            ds.test.push_back(std::move(t.sample));
        } else if (session_is_val[session_index_of[t.sample.session_id]]) {
            ds.val.push_back(std::move(t.sample));
        } else {
            train_labels.push_back(t.sample.label);
            ds.train.push_back(std::move(t.sample));
        }
    }
    if (ds.train.empty()) fail(ErrorKind::input, "training split is empty");
    if (ds.test.empty()) {
        std::cerr << "warning: test split is empty for boundary " << cfg.boundary_date << "\n";
    }
    ds.class_weights = compute_class_weights(train_labels);
    ds.cache_hits = cache.hits();
    ds.cache_misses = cache.misses();
    cache.flush();
    return ds;
}

} // namespace insight
