#pragma once

#include <string>
#include <vector>

#include "insight/encoders.hpp"
#include "insight/tensor.hpp"

namespace insight {

struct AdapterConfig {
    int d_view = 0;      // native view dim
    int d = 64;          // shared manifold dim
    int query_tokens = 4;
    int hidden = 128;    // FFN hidden size
    int heads = 8;
    double alpha_res = 0.7; // residual gate between attention output and queries
    double ln_eps = 1e-5;
};

// Per-view adapter: in-projection + layer norm, learnable query tokens
// cross-attending over the projected view tokens, gated residual, FFN
// residual. Output is query_tokens x d.
struct ViewAdapterParams {
    View view = View::text;
    AdapterConfig cfg;
    Tensor w_in;            // d_view x d, no bias
    Tensor ln_gain, ln_bias;
    Tensor queries;         // query_tokens x d
    MhaParams attn;
    Linear ffn_in, ffn_out;

    void collect(std::vector<std::pair<std::string, Tensor>>& out) const;
    size_t parameter_count() const;
};

// Parameter streams are label-forked per view, so two views built from the
// same seed never share values and construction order is irrelevant.
ViewAdapterParams adapter_init(View view, const AdapterConfig& cfg, const Rng& root);

struct AdapterOptions {
    bool bypass_attention = false; // replace attention with mean of projected tokens
    bool identity_ffn = false;     // drop the FFN refinement, keep the residual input
};

Tensor adapter_forward(const ViewEmbedding& x, const ViewAdapterParams& params,
                       AttentionWeights* maps = nullptr,
                       const AdapterOptions& opts = {});

} // namespace insight
