#include "insight/model.hpp"

#include <algorithm>

#include "insight/checkpoint.hpp"

namespace insight {

InsightModel::InsightModel(const RunConfig& cfg)
    : cfg_(cfg),
      fusion_(fusion_init({cfg.d, cfg.fusion_tokens, cfg.fusion_heads}, Rng(cfg.seed))),
      lm_({cfg.d, cfg.lm_layers, cfg.lm_heads, cfg.lm_ffn_hidden, cfg.lm_context},
          {cfg.lora_rank, cfg.lora_alpha, cfg.lora_dropout}, Vocabulary::builtin(),
          Rng(cfg.seed)),
      dropout_rng_(Rng(cfg.seed).fork("dropout")) {
    Rng root(cfg.seed);
    std::array<int, kViewCount> dims = {cfg.d_text, cfg.d_sent, cfg.d_seq, cfg.d_topo};
    for (int v = 0; v < kViewCount; ++v) {
        if (!cfg.active_views[v]) continue;
        AdapterConfig ac;
        ac.d_view = dims[v];
        ac.d = cfg.d;
        ac.query_tokens = cfg.query_tokens;
        ac.hidden = cfg.adapter_hidden;
        ac.heads = cfg.adapter_heads;
        ac.alpha_res = cfg.alpha_res;
        adapters_[v] = adapter_init(static_cast<View>(v), ac, root);
    }
    prompt_spec_ = PromptSpec::make(prompt_strategy_from_name(cfg.prompt_strategy),
                                    verbalizer_strategy_from_name(cfg.verbalizer_strategy),
                                    lm_.vocab(), cfg.seed);
    prompt_ids_ = lm_.tokenize_to_ids(prompt_spec_.prompt_text);
    class_mat_ = lm_.class_score_matrix(prompt_spec_);
    class_vecs_ = lm_.class_vectors(prompt_spec_);
    if (cfg.head == "mlp") {
        Rng h_rng = root.fork("init.head.mlp");
        mlp_ = MlpHead{Linear::init(cfg.d, 32, h_rng), Linear::init(32, 2, h_rng)};
    }
    int seq_len = cfg.fusion_tokens + static_cast<int>(prompt_ids_.size());
    if (seq_len > cfg.lm_context) {
        fail(ErrorKind::config, "fusion tokens + prompt exceed lm context");
    }
}

Tensor InsightModel::forward_scores(const std::array<ViewEmbedding, kViewCount>& views,
                                    bool train, std::array<double, kViewCount>* view_mass) {
    std::array<Tensor, kViewCount> blocks;
    AdapterOptions opts;
    opts.bypass_attention = cfg_.intra_mean;
    opts.identity_ffn = cfg_.identity_ffn;
    for (int v = 0; v < kViewCount; ++v) {
        if (cfg_.active_views[v]) {
            blocks[v] = adapter_forward(views[v], *adapters_[v], nullptr, opts);
        } else {
            blocks[v] = Tensor::zeros(cfg_.query_tokens, cfg_.d);
        }
    }
    FusedRep fused = inter_fuse(blocks, cfg_.active_views, fusion_, cfg_.fusion_mean);
    if (view_mass) *view_mass = fused.view_attention_mass;
    Tensor h_final = lm_.final_hidden(fused.tokens, prompt_ids_, train, dropout_rng_);
    if (mlp_) {
        return mlp_->out.forward(gelu(mlp_->hidden.forward(h_final)));
    }
    return matmul(h_final, class_mat_);
}

InsightModel::EvalOutput InsightModel::predict(const std::array<ViewEmbedding, kViewCount>& views) {
    NoGradGuard guard;
    EvalOutput out;
    if (mlp_) {
        Tensor scores = forward_scores(views, /*train=*/false, &out.view_mass);
        out.pred.scores = {scores.at(0, 0), scores.at(0, 1)};
        out.pred.tie = out.pred.scores[0] == out.pred.scores[1];
        out.pred.label = out.pred.scores[1] > out.pred.scores[0] ? 1 : 0;
        return out;
    }
    std::array<Tensor, kViewCount> blocks;
    AdapterOptions opts;
    opts.bypass_attention = cfg_.intra_mean;
    opts.identity_ffn = cfg_.identity_ffn;
    for (int v = 0; v < kViewCount; ++v) {
        blocks[v] = cfg_.active_views[v]
                        ? adapter_forward(views[v], *adapters_[v], nullptr, opts)
                        : Tensor::zeros(cfg_.query_tokens, cfg_.d);
    }
    FusedRep fused = inter_fuse(blocks, cfg_.active_views, fusion_, cfg_.fusion_mean);
    out.view_mass = fused.view_attention_mass;
    Tensor h_final = lm_.final_hidden(fused.tokens, prompt_ids_, false, dropout_rng_);
    out.pred = verbalizer_predict(h_final.data(), class_vecs_);
    return out;
}

std::vector<std::pair<std::string, Tensor>> InsightModel::trainable_parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (int v = 0; v < kViewCount; ++v) {
        if (adapters_[v]) adapters_[v]->collect(out);
    }
    fusion_.collect(out);
    for (auto& p : lm_.lora_parameters()) out.push_back(p);
    if (mlp_) {
        mlp_->hidden.collect(out, "head.mlp.hidden");
        mlp_->out.collect(out, "head.mlp.out");
    }
    return out;
}

void InsightModel::save_checkpoint(const std::string& path) const {
    save_named_tensors(path, trainable_parameters());
}

void InsightModel::load_checkpoint(const std::string& path) {
    restore_named_tensors(path, trainable_parameters());
}

std::vector<std::vector<double>> InsightModel::snapshot_parameters() const {
    std::vector<std::vector<double>> snap;
    for (const auto& [name, t] : trainable_parameters()) {
        snap.emplace_back(t.data().begin(), t.data().end());
    }
    return snap;
}

void InsightModel::restore_parameters(const std::vector<std::vector<double>>& snap) {
    auto params = trainable_parameters();
    if (snap.size() != params.size()) fail(ErrorKind::state, "snapshot size mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
        auto dst = params[i].second.mutable_data();
        if (snap[i].size() != dst.size()) fail(ErrorKind::state, "snapshot shape mismatch");
        std::copy(snap[i].begin(), snap[i].end(), dst.begin());
    }
}

} // namespace insight
