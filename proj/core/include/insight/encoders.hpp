#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "insight/error.hpp"

namespace insight {

enum class View : int { text = 0, sent = 1, seq = 2, topo = 3 };
constexpr int kViewCount = 4;
const char* view_name(View v);
View view_from_name(const std::string& name);

struct ViewEmbedding {
    View view = View::text;
    int tokens = 0; // N_v >= 1
    int dim = 0;
    std::vector<double> data; // tokens x dim, row-major
};

struct EncoderConfig {
    int d_text = 64;
    int d_sent = 16;
    int d_seq = 32;
    int d_topo = 32;
    uint64_t seed = 42;

    uint64_t config_hash() const;
};

// Deterministic frozen encoders. Text: lowercase word+bigram hashing into
// d_text buckets, l2-normalized, one token per chunk. Sentiment: five lexicon
// features per chunk (positive, negative, hostility, exclamation density,
// negation count) through a fixed seeded 5 x d_sent projection. Sequence:
// activity-code embeddings mean-pooled at window sizes {1, 4, 16, all}; each
// scale's position-weighted pool is concatenated with the global mean and
// re-projected, one token per scale.
class FrozenEncoders {
public:
    explicit FrozenEncoders(const EncoderConfig& cfg);

    ViewEmbedding encode_text(const std::vector<std::string>& chunks) const;
    ViewEmbedding encode_sentiment(const std::vector<std::string>& chunks) const;
    ViewEmbedding encode_sequence(const std::vector<int>& codes) const;

    const EncoderConfig& config() const { return cfg_; }

    static std::vector<std::string> tokenize_words(const std::string& text);
    // [positive, negative, hostility, exclamation density, negation count]
    static std::array<double, 5> sentiment_features(const std::string& text);
    static size_t text_bucket(const std::string& token, int d);
    static size_t bigram_bucket(const std::string& a, const std::string& b, int d);

private:
    EncoderConfig cfg_;
    std::vector<double> sent_proj_;  // 5 x d_sent
    std::vector<double> code_embed_; // kActivityCodeCount x d_seq
    std::vector<double> seq_proj_;   // (2*d_seq) x d_seq
};

// Flat external-embedding table: matrix file starts with one header line
// "rows cols" followed by `rows` whitespace-separated lines; the key file has
// one key per line, line i naming row i.
struct ExternalEmbeddings {
    int dim = 0;
    std::map<std::string, std::vector<double>> table;
};

ExternalEmbeddings load_external_embeddings(const std::string& matrix_path,
                                            const std::string& key_path);

} // namespace insight
