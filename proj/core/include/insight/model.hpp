#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "insight/adapter.hpp"
#include "insight/config.hpp"
#include "insight/fusion.hpp"
#include "insight/micro_lm.hpp"

namespace insight {

// Full detection pipeline: per-view adapters -> inter-view fusion -> frozen
// causal LM with LoRA -> class scores. The verbalizer head scores the final
// hidden state against unit-normalized label-word vectors (inner product for
// the loss, cosine for prediction; the argmax coincides). The mlp head is a
// small trainable classifier over the same hidden state.
class InsightModel {
public:
    explicit InsightModel(const RunConfig& cfg);

    // Training-path scores (1 x 2) with gradients attached.
    Tensor forward_scores(const std::array<ViewEmbedding, kViewCount>& views, bool train,
                          std::array<double, kViewCount>* view_mass = nullptr);

    struct EvalOutput {
        Prediction pred;
        std::array<double, kViewCount> view_mass{};
    };
    EvalOutput predict(const std::array<ViewEmbedding, kViewCount>& views);

    std::vector<std::pair<std::string, Tensor>> trainable_parameters() const;
    std::vector<std::pair<std::string, Tensor>> lora_parameters() const { return lm_.lora_parameters(); }
    std::vector<std::pair<std::string, Tensor>> frozen_parameters() const { return lm_.frozen_parameters(); }

    const RunConfig& config() const { return cfg_; }
    const MicroLM& lm() const { return lm_; }
    const PromptSpec& prompt() const { return prompt_spec_; }
    const std::vector<int>& prompt_ids() const { return prompt_ids_; }

    void save_checkpoint(const std::string& path) const;
    void load_checkpoint(const std::string& path);

    std::vector<std::vector<double>> snapshot_parameters() const;
    void restore_parameters(const std::vector<std::vector<double>>& snap);

private:
    RunConfig cfg_;
    std::array<std::optional<ViewAdapterParams>, kViewCount> adapters_;
    FusionParams fusion_;
    MicroLM lm_;
    PromptSpec prompt_spec_;
    std::vector<int> prompt_ids_;
    Tensor class_mat_; // d x 2 constant, unit-normalized class vectors
    std::array<std::vector<double>, 2> class_vecs_;
    struct MlpHead {
        Linear hidden;
        Linear out;
    };
    std::optional<MlpHead> mlp_;
    Rng dropout_rng_;
};

} // namespace insight
