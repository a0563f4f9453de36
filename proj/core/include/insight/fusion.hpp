#pragma once

#include <array>
#include <string>
#include <vector>

#include "insight/encoders.hpp"
#include "insight/tensor.hpp"

namespace insight {

struct FusionConfig {
    int d = 64;
    int fusion_tokens = 8; // learnable fusion queries
    int heads = 8;
};

struct FusionParams {
    FusionConfig cfg;
    Tensor queries; // fusion_tokens x d
    MhaParams attn;

    void collect(std::vector<std::pair<std::string, Tensor>>& out) const;
};

FusionParams fusion_init(const FusionConfig& cfg, const Rng& root);

struct FusedRep {
    Tensor tokens;                       // fusion_tokens x d
    std::array<double, kViewCount> view_attention_mass{}; // sums to 1
};

// Concatenates the four aligned blocks in fixed order (text, sent, seq,
// topo) and attends with the fusion queries. Inactive views keep their span
// in the concatenation as zero blocks but are masked out of the softmax, so
// their attention mass is exactly zero. view_attention_mass averages each
// span's attention weight over heads and queries.
// mean_pool variant (fusion ablation): the four blocks are averaged and tiled
// to fusion_tokens rows; attribution is uniform over active views.
FusedRep inter_fuse(const std::array<Tensor, kViewCount>& blocks,
                    const std::array<bool, kViewCount>& active,
                    const FusionParams& params, bool mean_pool = false);

} // namespace insight
