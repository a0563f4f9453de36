#pragma once

#include <array>
#include <string>
#include <vector>

#include "insight/config.hpp"
#include "insight/encoders.hpp"
#include "insight/events.hpp"
#include "insight/metrics.hpp"
#include "insight/node2vec.hpp"

namespace insight {

// One activity = one sample. Views are activity-centric: text/sentiment from
// the event's own payload (recipients and resource feed the text view), the
// sequence view from the containing session's activity codes up to and
// including the event, topology from the user's graph embedding.
struct Sample {
    std::string user;
    std::string session_id;
    std::string activity_id;
    int64_t timestamp = 0;
    int label = 0; // 0 normal, 1 malicious
    ThreatClass cls = ThreatClass::benign;
    std::array<ViewEmbedding, kViewCount> views;
};

struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
    Tensor class_weights; // inverse-frequency over train labels
    size_t cache_hits = 0;
    size_t cache_misses = 0;
};

// Reads the corpus CSVs + labels.csv from cfg.data_dir, sessionizes, encodes
// all views (through the embedding cache when data.cache_dir is set), splits
// train/test at the boundary date, and carves validation as the last
// val_fraction of each user's training-period sessions.
Dataset build_dataset(const RunConfig& cfg);

// View-relevant part of the config; datasets can be shared between runs whose
// hash matches (ablation/sweep drivers rely on this).
uint64_t dataset_config_hash(const RunConfig& cfg);

} // namespace insight
