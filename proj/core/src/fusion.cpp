#include "insight/fusion.hpp"

namespace insight {

void FusionParams::collect(std::vector<std::pair<std::string, Tensor>>& out) const {
    out.emplace_back("fusion.queries", queries);
    attn.collect(out, "fusion.attn");
}

FusionParams fusion_init(const FusionConfig& cfg, const Rng& root) {
    if (cfg.fusion_tokens < 1) fail(ErrorKind::config, "fusion_tokens must be >= 1");
    if (cfg.d % cfg.heads != 0) fail(ErrorKind::config, "fusion dim must be divisible by heads");
    FusionParams p;
    p.cfg = cfg;
    Rng q_rng = root.fork("init.fusion.queries");
    p.queries = random_normal(cfg.fusion_tokens, cfg.d, 0.0, 0.02, q_rng, true);
    Rng a_rng = root.fork("init.fusion.attn");
    p.attn = MhaParams::init(cfg.d, cfg.heads, a_rng);
    return p;
}

FusedRep inter_fuse(const std::array<Tensor, kViewCount>& blocks,
                    const std::array<bool, kViewCount>& active,
                    const FusionParams& params, bool mean_pool) {
    int m = -1;
    int active_count = 0;
    for (int v = 0; v < kViewCount; ++v) {
        if (!blocks[v].defined()) fail(ErrorKind::dimension, "missing aligned block");
        if (blocks[v].cols() != params.cfg.d) {
            fail(ErrorKind::dimension, "aligned block dim mismatch");
        }
        if (m < 0) m = blocks[v].rows();
        if (blocks[v].rows() != m) fail(ErrorKind::dimension, "aligned block token-count mismatch");
        if (active[v]) ++active_count;
    }
    if (active_count == 0) fail(ErrorKind::config, "at least one view must be active");

    FusedRep out;
    if (mean_pool) {
        Tensor acc;
        for (int v = 0; v < kViewCount; ++v) {
            if (!active[v]) continue;
            acc = acc.defined() ? add(acc, blocks[v]) : blocks[v];
        }
        Tensor mean_block = scale(acc, 1.0 / active_count);
        int times = (params.cfg.fusion_tokens + m - 1) / m;
        Tensor tiled = tile_rows(mean_block, times);
        out.tokens = slice_rows(tiled, 0, params.cfg.fusion_tokens);
        for (int v = 0; v < kViewCount; ++v) {
            out.view_attention_mass[v] = active[v] ? 1.0 / active_count : 0.0;
        }
        return out;
    }

    Tensor z_cat = concat_rows({blocks[0], blocks[1], blocks[2], blocks[3]});
    std::vector<uint8_t> mask(static_cast<size_t>(m) * kViewCount, 0);
    for (int v = 0; v < kViewCount; ++v) {
        if (!active[v]) continue;
        for (int t = 0; t < m; ++t) mask[static_cast<size_t>(v) * m + t] = 1;
    }
    AttentionWeights w;
    out.tokens = multi_head_attention(params.queries, z_cat, z_cat, params.attn, &w, &mask);
    double denom = static_cast<double>(w.heads) * w.n_q;
    for (int v = 0; v < kViewCount; ++v) {
        double mass = 0.0;
        for (int h = 0; h < w.heads; ++h) {
            for (int i = 0; i < w.n_q; ++i) {
                for (int t = 0; t < m; ++t) mass += w.at(h, i, v * m + t);
            }
        }
        out.view_attention_mass[v] = mass / denom;
    }
    return out;
}

} // namespace insight
