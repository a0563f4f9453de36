#include "insight/encoders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "insight/events.hpp"
#include "insight/rng.hpp"

namespace insight {

namespace {

const std::set<std::string>& positive_lexicon() {
    static const std::set<std::string> s = {
        "good", "great", "happy", "thanks", "appreciate", "excellent",
        "glad", "welcome", "nice", "helpful",
    };
    return s;
}

const std::set<std::string>& negative_lexicon() {
    static const std::set<std::string> s = {
        "angry", "unfair", "betrayed", "quit", "resign", "hate", "furious",
        "upset", "disappointed", "awful", "tired", "sick",
    };
    return s;
}

const std::set<std::string>& hostility_lexicon() {
    static const std::set<std::string> s = {
        "revenge", "destroy", "sabotage", "panic", "attack", "threat",
        "ruin", "expose", "payback",
    };
    return s;
}

const std::set<std::string>& negation_lexicon() {
    static const std::set<std::string> s = {
        "not", "no", "never", "nobody", "nothing", "cannot", "wont", "dont",
    };
    return s;
}

// Position weights for the in-order pooling path; pure function of position.
double position_weight(size_t j) {
    uint64_t h = Rng::hash_label(std::to_string(j));
    return 1.0 + static_cast<double>(h >> 40) * 0x1.0p-24;
}

} // namespace

const char* view_name(View v) {
    switch (v) {
        case View::text: return "text";
        case View::sent: return "sent";
        case View::seq: return "seq";
        case View::topo: return "topo";
    }
    return "?";
}

View view_from_name(const std::string& name) {
    for (int i = 0; i < kViewCount; ++i) {
        if (name == view_name(static_cast<View>(i))) return static_cast<View>(i);
    }
    fail(ErrorKind::config, "unknown view: " + name);
}

uint64_t EncoderConfig::config_hash() const {
    std::string s = "text=" + std::to_string(d_text) + ";sent=" + std::to_string(d_sent) +
                    ";seq=" + std::to_string(d_seq) + ";topo=" + std::to_string(d_topo) +
                    ";seed=" + std::to_string(seed);
    return fnv1a(s);
}

FrozenEncoders::FrozenEncoders(const EncoderConfig& cfg) : cfg_(cfg) {
    if (cfg.d_text < 1 || cfg.d_sent < 1 || cfg.d_seq < 1 || cfg.d_topo < 1) {
        fail(ErrorKind::config, "encoder dims must be positive");
    }
    Rng root(cfg.seed);
    Rng sent_rng = root.fork("enc.sent.proj");
    sent_proj_.resize(5 * static_cast<size_t>(cfg.d_sent));
    for (auto& v : sent_proj_) v = sent_rng.normal(0.0, 1.0 / std::sqrt(5.0));

    Rng code_rng = root.fork("enc.seq.embed");
    code_embed_.resize(static_cast<size_t>(kActivityCodeCount) * cfg.d_seq);
    for (auto& v : code_embed_) v = code_rng.normal(0.0, 1.0);

    Rng proj_rng = root.fork("enc.seq.proj");
    seq_proj_.resize(2 * static_cast<size_t>(cfg.d_seq) * cfg.d_seq);
    for (auto& v : seq_proj_) v = proj_rng.normal(0.0, 1.0 / std::sqrt(2.0 * cfg.d_seq));
}

std::vector<std::string> FrozenEncoders::tokenize_words(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

size_t FrozenEncoders::text_bucket(const std::string& token, int d) {
    return fnv1a(token) % static_cast<size_t>(d);
}

size_t FrozenEncoders::bigram_bucket(const std::string& a, const std::string& b, int d) {
    return fnv1a(a + "\x1f" + b) % static_cast<size_t>(d);
}

ViewEmbedding FrozenEncoders::encode_text(const std::vector<std::string>& chunks) const {
    const int d = cfg_.d_text;
    ViewEmbedding out;
    out.view = View::text;
    out.dim = d;
    if (chunks.empty()) {
        out.tokens = 1;
        out.data.assign(d, 0.0);
        return out;
    }
    out.tokens = static_cast<int>(chunks.size());
    out.data.assign(static_cast<size_t>(out.tokens) * d, 0.0);
    for (size_t c = 0; c < chunks.size(); ++c) {
        double* row = &out.data[c * d];
        auto words = tokenize_words(chunks[c]);
        for (size_t i = 0; i < words.size(); ++i) {
            row[text_bucket(words[i], d)] += 1.0;
            if (i + 1 < words.size()) row[bigram_bucket(words[i], words[i + 1], d)] += 1.0;
        }
        double norm = 0.0;
        for (int j = 0; j < d; ++j) norm += row[j] * row[j];
        if (norm > 0.0) {
            norm = std::sqrt(norm);
            for (int j = 0; j < d; ++j) row[j] /= norm;
        }
    }
    return out;
}

std::array<double, 5> FrozenEncoders::sentiment_features(const std::string& text) {
    auto words = tokenize_words(text);
    double pos = 0, neg = 0, hostile = 0, negation = 0;
    for (const auto& w : words) {
        if (positive_lexicon().count(w)) pos += 1;
        if (negative_lexicon().count(w)) neg += 1;
        if (hostility_lexicon().count(w)) hostile += 1;
        if (negation_lexicon().count(w)) negation += 1;
    }
    double exclaim = 0;
    for (char ch : text) {
        if (ch == '!') exclaim += 1;
    }
    double density = words.empty() ? 0.0 : exclaim / static_cast<double>(words.size());
    return {pos, neg, hostile, density, negation};
}

ViewEmbedding FrozenEncoders::encode_sentiment(const std::vector<std::string>& chunks) const {
    const int d = cfg_.d_sent;
    ViewEmbedding out;
    out.view = View::sent;
    out.dim = d;
    if (chunks.empty()) {
        out.tokens = 1;
        out.data.assign(d, 0.0);
        return out;
    }
    out.tokens = static_cast<int>(chunks.size());
    out.data.assign(static_cast<size_t>(out.tokens) * d, 0.0);
    for (size_t c = 0; c < chunks.size(); ++c) {
        auto feats = sentiment_features(chunks[c]);
        double* row = &out.data[c * d];
        for (int f = 0; f < 5; ++f) {
            for (int j = 0; j < d; ++j) row[j] += feats[f] * sent_proj_[static_cast<size_t>(f) * d + j];
        }
    }
    return out;
}

ViewEmbedding FrozenEncoders::encode_sequence(const std::vector<int>& codes) const {
    if (codes.empty()) fail(ErrorKind::input, "encode_sequence requires at least one code");
    const int d = cfg_.d_seq;
    for (int c : codes) {
        if (c < 0 || c >= kActivityCodeCount) fail(ErrorKind::index, "activity code out of range");
    }
    const size_t n = codes.size();
    auto embed_row = [&](size_t i) { return &code_embed_[static_cast<size_t>(codes[i]) * d]; };

    // Global mean of the code embeddings.
    std::vector<double> global(d, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double* e = embed_row(i);
        for (int j = 0; j < d; ++j) global[j] += e[j];
    }
    for (int j = 0; j < d; ++j) global[j] /= static_cast<double>(n);

    const std::array<size_t, 4> scales = {1, 4, 16, 0}; // 0 = whole sequence
    ViewEmbedding out;
    out.view = View::seq;
    out.dim = d;
    out.tokens = static_cast<int>(scales.size());
    out.data.assign(scales.size() * static_cast<size_t>(d), 0.0);

    std::vector<double> pooled(d), window(d), cat(2 * static_cast<size_t>(d));
    for (size_t s = 0; s < scales.size(); ++s) {
        size_t w = scales[s] == 0 ? n : scales[s];
        std::fill(pooled.begin(), pooled.end(), 0.0);
        double weight_sum = 0.0;
        size_t wi = 0;
        for (size_t start = 0; start < n; start += w, ++wi) {
            size_t stop = std::min(start + w, n);
            std::fill(window.begin(), window.end(), 0.0);
            for (size_t i = start; i < stop; ++i) {
                const double* e = embed_row(i);
                for (int j = 0; j < d; ++j) window[j] += e[j];
            }
            double inv = 1.0 / static_cast<double>(stop - start);
            double pw = position_weight(wi);
            weight_sum += pw;
            for (int j = 0; j < d; ++j) pooled[j] += pw * window[j] * inv;
        }
        for (int j = 0; j < d; ++j) pooled[j] /= weight_sum;
        std::copy(pooled.begin(), pooled.end(), cat.begin());
        std::copy(global.begin(), global.end(), cat.begin() + d);
        double* row = &out.data[s * static_cast<size_t>(d)];
        for (int k = 0; k < 2 * d; ++k) {
            double v = cat[static_cast<size_t>(k)];
            if (v == 0.0) continue;
            const double* p = &seq_proj_[static_cast<size_t>(k) * d];
            for (int j = 0; j < d; ++j) row[j] += v * p[j];
        }
    }
    return out;
}

ExternalEmbeddings load_external_embeddings(const std::string& matrix_path,
                                            const std::string& key_path) {
    std::ifstream mat(matrix_path);
    if (!mat) fail(ErrorKind::io, "cannot open " + matrix_path);
    std::ifstream keys(key_path);
    if (!keys) fail(ErrorKind::io, "cannot open " + key_path);

    size_t rows = 0, cols = 0;
    std::string header;
    if (!std::getline(mat, header)) fail(ErrorKind::format, "empty matrix file");
    {
        std::istringstream hs(header);
        if (!(hs >> rows >> cols) || rows == 0 || cols == 0) {
            fail(ErrorKind::format, "matrix header must be 'rows cols'");
        }
    }
    ExternalEmbeddings out;
    out.dim = static_cast<int>(cols);
    std::string key_line;
    for (size_t r = 0; r < rows; ++r) {
        std::vector<double> row(cols);
        for (size_t c = 0; c < cols; ++c) {
            if (!(mat >> row[c])) fail(ErrorKind::format, "matrix truncated at row " + std::to_string(r));
        }
        if (!std::getline(keys, key_line)) fail(ErrorKind::format, "key file shorter than matrix");
        while (!key_line.empty() && (key_line.back() == '\r' || key_line.back() == '\n')) {
            key_line.pop_back();
        }
        out.table[key_line] = std::move(row);
    }
    return out;
}

} // namespace insight
