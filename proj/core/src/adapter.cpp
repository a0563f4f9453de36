#include "insight/adapter.hpp"

#include <cmath>

namespace insight {

void ViewAdapterParams::collect(std::vector<std::pair<std::string, Tensor>>& out) const {
    std::string prefix = std::string("adapter.") + view_name(view);
    out.emplace_back(prefix + ".w_in", w_in);
    out.emplace_back(prefix + ".ln_gain", ln_gain);
    out.emplace_back(prefix + ".ln_bias", ln_bias);
    out.emplace_back(prefix + ".queries", queries);
    attn.collect(out, prefix + ".attn");
    ffn_in.collect(out, prefix + ".ffn_in");
    ffn_out.collect(out, prefix + ".ffn_out");
}

size_t ViewAdapterParams::parameter_count() const {
    std::vector<std::pair<std::string, Tensor>> all;
    collect(all);
    size_t n = 0;
    for (const auto& [name, t] : all) n += t.size();
    return n;
}

ViewAdapterParams adapter_init(View view, const AdapterConfig& cfg, const Rng& root) {
    if (cfg.d_view < 1 || cfg.d < 1 || cfg.query_tokens < 1 || cfg.hidden < 1) {
        fail(ErrorKind::config, "adapter dims must be positive");
    }
    if (cfg.d % cfg.heads != 0) {
        fail(ErrorKind::config, "adapter dim must be divisible by heads");
    }
    if (!(cfg.alpha_res > 0.0 && cfg.alpha_res <= 1.0)) {
        fail(ErrorKind::config, "alpha_res must be in (0,1]");
    }
    ViewAdapterParams p;
    p.view = view;
    p.cfg = cfg;
    std::string label = std::string("init.adapter.") + view_name(view);
    Rng in_rng = root.fork(label + ".w_in");
    double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_view));
    p.w_in = random_uniform(cfg.d_view, cfg.d, -bound, bound, in_rng, true);
    p.ln_gain = Tensor::full(1, cfg.d, 1.0, true);
    p.ln_bias = Tensor::zeros(1, cfg.d, true);
    Rng q_rng = root.fork(label + ".queries");
    p.queries = random_normal(cfg.query_tokens, cfg.d, 0.0, 0.02, q_rng, true);
    Rng a_rng = root.fork(label + ".attn");
    p.attn = MhaParams::init(cfg.d, cfg.heads, a_rng);
    Rng f_rng = root.fork(label + ".ffn");
    p.ffn_in = Linear::init(cfg.d, cfg.hidden, f_rng);
    p.ffn_out = Linear::init(cfg.hidden, cfg.d, f_rng);
    return p;
}

Tensor adapter_forward(const ViewEmbedding& x, const ViewAdapterParams& params,
                       AttentionWeights* maps, const AdapterOptions& opts) {
    const auto& cfg = params.cfg;
    if (x.dim != cfg.d_view) {
        fail(ErrorKind::dimension, std::string("view ") + view_name(params.view) +
                                       " dim " + std::to_string(x.dim) + " != adapter d_view " +
                                       std::to_string(cfg.d_view));
    }
    if (x.tokens < 1) fail(ErrorKind::input, "adapter requires at least one token");
    Tensor tokens = Tensor::from_data(x.tokens, x.dim, x.data);
    Tensor projected = layer_norm(matmul(tokens, params.w_in), params.ln_gain,
                                  params.ln_bias, cfg.ln_eps);
    Tensor attended;
    if (opts.bypass_attention) {
        attended = tile_rows(mean_rows(projected), cfg.query_tokens);
    } else {
        attended = multi_head_attention(params.queries, projected, projected, params.attn, maps);
    }
    // gated residual toward the query tokens
    Tensor gated = add(scale(attended, cfg.alpha_res),
                       scale(params.queries, 1.0 - cfg.alpha_res));
    if (opts.identity_ffn) return gated;
    Tensor refined = params.ffn_out.forward(gelu(params.ffn_in.forward(gated)));
    return add(gated, refined);
}

} // namespace insight
