#include "insight/micro_lm.hpp"

#include <cmath>

namespace insight {

const char* prompt_strategy_name(PromptStrategy s) {
    switch (s) {
        case PromptStrategy::task_instruction: return "task_instruction";
        case PromptStrategy::task_agnostic: return "task_agnostic";
        case PromptStrategy::noisy: return "noisy";
        case PromptStrategy::none: return "none";
    }
    return "?";
}

PromptStrategy prompt_strategy_from_name(const std::string& s) {
    for (auto v : {PromptStrategy::task_instruction, PromptStrategy::task_agnostic,
                   PromptStrategy::noisy, PromptStrategy::none}) {
        if (s == prompt_strategy_name(v)) return v;
    }
    fail(ErrorKind::config, "unknown prompt strategy: " + s);
}

const char* verbalizer_strategy_name(VerbalizerStrategy s) {
    switch (s) {
        case VerbalizerStrategy::class_description: return "class_description";
        case VerbalizerStrategy::antonyms: return "antonyms";
        case VerbalizerStrategy::random_words: return "random_words";
        case VerbalizerStrategy::numeric: return "numeric";
    }
    return "?";
}

VerbalizerStrategy verbalizer_strategy_from_name(const std::string& s) {
    for (auto v : {VerbalizerStrategy::class_description, VerbalizerStrategy::antonyms,
                   VerbalizerStrategy::random_words, VerbalizerStrategy::numeric}) {
        if (s == verbalizer_strategy_name(v)) return v;
    }
    fail(ErrorKind::config, "unknown verbalizer strategy: " + s);
}

PromptSpec PromptSpec::make(PromptStrategy p, VerbalizerStrategy v, const Vocabulary& vocab,
                            uint64_t seed) {
    PromptSpec spec;
    spec.prompt_strategy = p;
    spec.verbalizer_strategy = v;
    switch (p) {
        case PromptStrategy::task_instruction:
            spec.prompt_text = "Classify user behavior types:";
            break;
        case PromptStrategy::task_agnostic:
            spec.prompt_text = "Process the following input data:";
            break;
        case PromptStrategy::noisy:
            spec.prompt_text = "The weather is nice today, plan a picnic.";
            break;
        case PromptStrategy::none:
            spec.prompt_text.clear();
            break;
    }
    switch (v) {
        case VerbalizerStrategy::class_description:
            spec.label_words = {{{"normal"}, {"malicious"}}};
            break;
        case VerbalizerStrategy::antonyms:
            spec.label_words = {{{"abnormal"}, {"harmless"}}};
            break;
        case VerbalizerStrategy::numeric:
            spec.label_words = {{{"0"}, {"1"}}};
            break;
        case VerbalizerStrategy::random_words: {
            Rng rng = Rng(seed).fork("verbalizer.random");
            int a = 1 + static_cast<int>(rng.next_below(vocab.size() - 1));
            int b = a;
            while (b == a) b = 1 + static_cast<int>(rng.next_below(vocab.size() - 1));
            spec.label_words = {{{vocab.word(a)}, {vocab.word(b)}}};
            break;
        }
    }
    for (const auto& words : spec.label_words) {
        for (const auto& w : words) {
            if (vocab.token_id(w) == Vocabulary::kUnk) {
                fail(ErrorKind::config, "verbalizer word not in vocabulary: " + w);
            }
        }
    }
    return spec;
}

MicroLM::MicroLM(const MicroLMConfig& cfg, const LoRAConfig& lora, const Vocabulary& vocab,
                 const Rng& root)
    : cfg_(cfg), lora_cfg_(lora), vocab_(&vocab) {
    if (cfg.d % cfg.heads != 0) fail(ErrorKind::config, "lm dim must be divisible by heads");
    if (lora.rank < 1) fail(ErrorKind::config, "lora rank must be >= 1");
    if (lora.dropout < 0.0 || lora.dropout >= 1.0) {
        fail(ErrorKind::config, "lora dropout must be in [0,1)");
    }

    Rng emb_rng = root.fork("init.lm.embedding");
    embedding_ = random_normal(vocab.size(), cfg.d, 0.0, 0.02, emb_rng, false);
    Rng pos_rng = root.fork("init.lm.positions");
    positions_ = random_normal(cfg.context, cfg.d, 0.0, 0.02, pos_rng, false);
    lnf_g = Tensor::full(1, cfg.d, 1.0);
    lnf_b = Tensor::zeros(1, cfg.d);

    blocks_.resize(cfg.layers);
    double lora_bound = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    for (int l = 0; l < cfg.layers; ++l) {
        Block& b = blocks_[l];
        std::string label = "init.lm.block" + std::to_string(l);
        b.ln1_g = Tensor::full(1, cfg.d, 1.0);
        b.ln1_b = Tensor::zeros(1, cfg.d);
        b.ln2_g = Tensor::full(1, cfg.d, 1.0);
        b.ln2_b = Tensor::zeros(1, cfg.d);
        Rng attn_rng = root.fork(label + ".attn");
        b.wq = Linear::init(cfg.d, cfg.d, attn_rng);
        b.wk = Linear::init(cfg.d, cfg.d, attn_rng);
        b.wv = Linear::init(cfg.d, cfg.d, attn_rng);
        b.wo = Linear::init(cfg.d, cfg.d, attn_rng);
        Rng ffn_rng = root.fork(label + ".ffn");
        b.ffn_in = Linear::init(cfg.d, cfg.ffn_hidden, ffn_rng);
        b.ffn_out = Linear::init(cfg.ffn_hidden, cfg.d, ffn_rng);
        Rng lora_rng = root.fork(label + ".lora");
        b.lora_q.down = random_uniform(cfg.d, lora.rank, -lora_bound, lora_bound, lora_rng, true);
        b.lora_q.up = Tensor::zeros(lora.rank, cfg.d, true);
        b.lora_v.down = random_uniform(cfg.d, lora.rank, -lora_bound, lora_bound, lora_rng, true);
        b.lora_v.up = Tensor::zeros(lora.rank, cfg.d, true);
    }
    // Everything except the LoRA pairs stays frozen.
    for (auto& [name, t] : frozen_parameters()) {
        const_cast<Tensor&>(t).set_requires_grad(false);
    }
}

std::vector<int> MicroLM::tokenize_to_ids(const std::string& text) const {
    std::vector<int> ids;
    for (const auto& tok : lm_tokenize(text)) ids.push_back(vocab_->token_id(tok));
    return ids;
}

Tensor MicroLM::embed_tokens(const std::vector<int>& ids) const {
    if (ids.empty()) fail(ErrorKind::input, "cannot embed an empty token sequence");
    std::vector<double> data(ids.size() * static_cast<size_t>(cfg_.d));
    for (size_t i = 0; i < ids.size(); ++i) {
        int id = ids[i];
        if (id < 0 || id >= vocab_->size()) fail(ErrorKind::index, "token id out of range");
        auto row = embedding_.data().subspan(static_cast<size_t>(id) * cfg_.d, cfg_.d);
        std::copy(row.begin(), row.end(), data.begin() + i * static_cast<size_t>(cfg_.d));
    }
    return Tensor::from_data(static_cast<int>(ids.size()), cfg_.d, std::move(data));
}

Tensor MicroLM::forward(const Tensor& fused, const std::vector<int>& prompt_ids, bool train,
                        Rng& dropout_rng) const {
    std::vector<Tensor> parts;
    if (fused.defined()) parts.push_back(fused);
    if (!prompt_ids.empty()) parts.push_back(embed_tokens(prompt_ids));
    if (parts.empty()) fail(ErrorKind::input, "lm forward on an empty sequence");
    Tensor x = parts.size() == 1 ? parts[0] : concat_rows(parts);
    const int len = x.rows();
    if (len > cfg_.context) fail(ErrorKind::input, "sequence exceeds lm context");
    x = add(x, slice_rows(positions_, 0, len));

    const double scaling = lora_cfg_.scaling();
    for (const auto& b : blocks_) {
        Tensor h = layer_norm(x, b.ln1_g, b.ln1_b, cfg_.ln_eps);
        Tensor h_drop = dropout(h, lora_cfg_.dropout, dropout_rng, train);
        Tensor qp = add(b.wq.forward(h),
                        scale(matmul(matmul(h_drop, b.lora_q.down), b.lora_q.up), scaling));
        Tensor kp = b.wk.forward(h);
        Tensor h_drop_v = dropout(h, lora_cfg_.dropout, dropout_rng, train);
        Tensor vp = add(b.wv.forward(h),
                        scale(matmul(matmul(h_drop_v, b.lora_v.down), b.lora_v.up), scaling));
        Tensor att = attention_core(qp, kp, vp, cfg_.heads, /*causal=*/true);
        x = add(x, b.wo.forward(att));
        Tensor h2 = layer_norm(x, b.ln2_g, b.ln2_b, cfg_.ln_eps);
        x = add(x, b.ffn_out.forward(gelu(b.ffn_in.forward(h2))));
    }
    return layer_norm(x, lnf_g, lnf_b, cfg_.ln_eps);
}

Tensor MicroLM::final_hidden(const Tensor& fused, const std::vector<int>& prompt_ids, bool train,
                             Rng& dropout_rng) const {
    Tensor all = forward(fused, prompt_ids, train, dropout_rng);
    return slice_rows(all, all.rows() - 1, all.rows());
}

std::array<std::vector<double>, 2> MicroLM::class_vectors(const PromptSpec& spec) const {
    std::array<std::vector<double>, 2> out;
    for (int c = 0; c < 2; ++c) {
        const auto& words = spec.label_words[c];
        if (words.empty()) fail(ErrorKind::config, "verbalizer class has no words");
        std::vector<double> acc(cfg_.d, 0.0);
        for (const auto& w : words) {
            int id = vocab_->token_id(w);
            auto row = embedding_.data().subspan(static_cast<size_t>(id) * cfg_.d, cfg_.d);
            for (int j = 0; j < cfg_.d; ++j) acc[j] += row[j];
        }
        for (auto& v : acc) v /= static_cast<double>(words.size());
        double norm = 0.0;
        for (double v : acc) norm += v * v;
        if (norm == 0.0) fail(ErrorKind::config, "verbalizer embedding is zero");
        norm = std::sqrt(norm);
        for (auto& v : acc) v /= norm;
        out[c] = std::move(acc);
    }
    return out;
}

Tensor MicroLM::class_score_matrix(const PromptSpec& spec) const {
    auto vecs = class_vectors(spec);
    std::vector<double> data(static_cast<size_t>(cfg_.d) * 2);
    for (int j = 0; j < cfg_.d; ++j) {
        data[static_cast<size_t>(j) * 2] = vecs[0][j];
        data[static_cast<size_t>(j) * 2 + 1] = vecs[1][j];
    }
    return Tensor::from_data(cfg_.d, 2, std::move(data));
}

std::vector<std::pair<std::string, Tensor>> MicroLM::lora_parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (size_t l = 0; l < blocks_.size(); ++l) {
        std::string prefix = "lm.block" + std::to_string(l);
        out.emplace_back(prefix + ".lora_q.down", blocks_[l].lora_q.down);
        out.emplace_back(prefix + ".lora_q.up", blocks_[l].lora_q.up);
        out.emplace_back(prefix + ".lora_v.down", blocks_[l].lora_v.down);
        out.emplace_back(prefix + ".lora_v.up", blocks_[l].lora_v.up);
    }
    return out;
}

std::vector<std::pair<std::string, Tensor>> MicroLM::frozen_parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("lm.embedding", embedding_);
    out.emplace_back("lm.positions", positions_);
    out.emplace_back("lm.lnf_g", lnf_g);
    out.emplace_back("lm.lnf_b", lnf_b);
    for (size_t l = 0; l < blocks_.size(); ++l) {
        const Block& b = blocks_[l];
        std::string prefix = "lm.block" + std::to_string(l);
        out.emplace_back(prefix + ".ln1_g", b.ln1_g);
        out.emplace_back(prefix + ".ln1_b", b.ln1_b);
        out.emplace_back(prefix + ".ln2_g", b.ln2_g);
        out.emplace_back(prefix + ".ln2_b", b.ln2_b);
        b.wq.collect(out, prefix + ".wq");
        b.wk.collect(out, prefix + ".wk");
        b.wv.collect(out, prefix + ".wv");
        b.wo.collect(out, prefix + ".wo");
        b.ffn_in.collect(out, prefix + ".ffn_in");
        b.ffn_out.collect(out, prefix + ".ffn_out");
    }
    return out;
}

Prediction verbalizer_predict(std::span<const double> h_final,
                              const std::array<std::vector<double>, 2>& class_vectors) {
    Prediction p;
    for (int c = 0; c < 2; ++c) {
        p.scores[c] = cosine_similarity(h_final, class_vectors[c]);
    }
    p.tie = p.scores[0] == p.scores[1];
    p.label = p.scores[1] > p.scores[0] ? 1 : 0;
    return p;
}

} // namespace insight
