#include "insight/embed_cache.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace insight {

namespace {
constexpr char kMagic[8] = {'I', 'N', 'S', 'E', 'M', 'B', 'C', '1'};
}

EmbeddingCache::EmbeddingCache(std::string path, uint64_t config_hash)
    : path_(std::move(path)), config_hash_(config_hash) {
    if (!path_.empty() && std::filesystem::exists(path_)) load();
}

EmbeddingCache::~EmbeddingCache() {
    try {
        flush();
    } catch (...) {
        // destructor must not throw; a failed flush only costs recompute time
    }
}

void EmbeddingCache::load() {
    try {
        std::ifstream in(path_, std::ios::binary);
        if (!in) fail(ErrorKind::io, "cannot open cache: " + path_);
        char magic[8];
        in.read(magic, sizeof(magic));
        if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
            fail(ErrorKind::format, "bad cache magic");
        }
        uint64_t stored_hash = 0;
        in.read(reinterpret_cast<char*>(&stored_hash), sizeof(stored_hash));
        if (!in) fail(ErrorKind::format, "cache truncated");
        if (stored_hash != config_hash_) {
            fail(ErrorKind::format, "encoder config changed");
        }
        uint64_t count = 0;
        in.read(reinterpret_cast<char*>(&count), sizeof(count));
        for (uint64_t i = 0; i < count; ++i) {
            uint32_t key_len = 0;
            in.read(reinterpret_cast<char*>(&key_len), sizeof(key_len));
            std::string key(key_len, '\0');
            in.read(key.data(), key_len);
            uint8_t view = 0;
            in.read(reinterpret_cast<char*>(&view), sizeof(view));
            uint32_t tokens = 0, dim = 0;
            in.read(reinterpret_cast<char*>(&tokens), sizeof(tokens));
            in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
            if (!in || view >= kViewCount || tokens == 0 || dim == 0 || tokens > 1u << 20) {
                fail(ErrorKind::format, "cache entry corrupt");
            }
            ViewEmbedding e;
            e.view = static_cast<View>(view);
            e.tokens = static_cast<int>(tokens);
            e.dim = static_cast<int>(dim);
            e.data.resize(static_cast<size_t>(tokens) * dim);
            in.read(reinterpret_cast<char*>(e.data.data()),
                    static_cast<std::streamsize>(e.data.size() * sizeof(double)));
            if (!in) fail(ErrorKind::format, "cache entry truncated");
            entries_[{std::move(key), view}] = std::move(e);
        }
    } catch (const Error& err) {
        std::cerr << "warning: dropping embedding cache " << path_ << " (" << err.what()
                  << "); recomputing\n";
        entries_.clear();
        dirty_ = true;
    }
}

ViewEmbedding EmbeddingCache::get_or_compute(const std::string& key, View view,
                                             const std::function<ViewEmbedding()>& compute) {
    auto it = entries_.find({key, static_cast<int>(view)});
    if (it != entries_.end()) {
        ++hits_;
        return it->second;
    }
    ++misses_;
    ViewEmbedding e = compute();
    entries_[{key, static_cast<int>(view)}] = e;
    dirty_ = true;
    return e;
}

void EmbeddingCache::flush() {
    if (path_.empty() || !dirty_) return;
    std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write cache: " + path_);
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&config_hash_), sizeof(config_hash_));
    uint64_t count = entries_.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& [key, e] : entries_) {
        uint32_t key_len = static_cast<uint32_t>(key.first.size());
        out.write(reinterpret_cast<const char*>(&key_len), sizeof(key_len));
        out.write(key.first.data(), key_len);
        uint8_t view = static_cast<uint8_t>(key.second);
        out.write(reinterpret_cast<const char*>(&view), sizeof(view));
        uint32_t tokens = static_cast<uint32_t>(e.tokens);
        uint32_t dim = static_cast<uint32_t>(e.dim);
        out.write(reinterpret_cast<const char*>(&tokens), sizeof(tokens));
        out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
        out.write(reinterpret_cast<const char*>(e.data.data()),
                  static_cast<std::streamsize>(e.data.size() * sizeof(double)));
    }
    dirty_ = false;
}

} // namespace insight
