#pragma once

#include <functional>
#include <map>
#include <string>

#include "insight/encoders.hpp"

namespace insight {

// Disk-backed memoization of frozen-encoder outputs, keyed by
// (source key, view) and validated against the encoder config hash.
// A corrupt or mismatched file is dropped with a warning and rebuilt.
class EmbeddingCache {
public:
    // Empty path disables persistence (memory-only).
    EmbeddingCache(std::string path, uint64_t config_hash);
    ~EmbeddingCache();

    ViewEmbedding get_or_compute(const std::string& key, View view,
                                 const std::function<ViewEmbedding()>& compute);

    void flush();
    size_t hits() const { return hits_; }
    size_t misses() const { return misses_; }
    size_t size() const { return entries_.size(); }

private:
    void load();

    std::string path_;
    uint64_t config_hash_;
    std::map<std::pair<std::string, int>, ViewEmbedding> entries_;
    size_t hits_ = 0;
    size_t misses_ = 0;
    bool dirty_ = false;
};

} // namespace insight
